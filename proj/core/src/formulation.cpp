#include "rvpp/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "rvpp/robust_blocks.hpp"

namespace rvpp {

std::string to_string(BuildMode mode) {
  switch (mode) {
    case BuildMode::proposed: return "proposed";
    case BuildMode::deterministic: return "deterministic";
    case BuildMode::baseline23: return "baseline23";
  }
  return "?";
}

double ObjectiveBreakdown::total() const {
  double t = median_income - operating_cost - profile_cost;
  for (const auto& [name, red] : price_reduction) t -= red;
  return t;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string pt(const std::string& base, int t) { return base + "[" + std::to_string(t) + "]"; }

void addv(LinExpr& e, int var, double coef) {
  if (var >= 0 && coef != 0.0) e.add(var, coef);
}

SeriesVars make_series(int T) {
  SeriesVars s;
  s.at.assign(static_cast<size_t>(T), -1);
  return s;
}

// Worst-period selection machinery only exists in the proposed formulation;
// the deterministic and comparison variants never carry group binaries.
bool mode_uses_groups(BuildMode mode) { return mode == BuildMode::proposed; }

// This session's own open position at t (cleared constants live in row RHS).
std::vector<LinTerm> session_trade_terms(const SessionModelBundle& bundle, int t) {
  std::vector<LinTerm> out;
  const int var = bundle.p_trade[t];
  if (var >= 0) out.push_back({var, 1.0});
  return out;
}

struct BuildContext {
  const CaseConfig& cfg;
  const MarketSessionSpec& ses;
  const StarredResults& starred;
  BuildMode mode;
  SessionModelBundle& b;
  int T = 0;
  double dt = 1.0;
  int tau = 1;        // first period this session may still trade
  int row_start = 1;  // first period carrying balance and trade rows
  bool reserve_traded = false;   // reserve totals are variables here
  bool reserve_context = false;  // unit reserve variables exist at all
  BudgetSet budgets;
  double gen_cap = 0.0;
  double dem_cap = 0.0;

  ModelIR& m() const { return b.model; }

  double unit_budget(const std::string& id) const {
    if (mode != BuildMode::proposed) return 0.0;
    auto it = budgets.unit.find(id);
    return it == budgets.unit.end() ? 0.0 : it->second;
  }

  double price_budget(const std::string& stream) const {
    if (mode == BuildMode::deterministic) return 0.0;
    if (stream == "da") return budgets.price.da;
    if (stream == "sr_up") return budgets.price.sr_up;
    if (stream == "sr_down") return budgets.price.sr_down;
    return budgets.price.id;
  }

  // Per-period fractional cut applied to availability in the comparison model.
  std::vector<double> baseline_gamma(const std::string& id) const {
    auto it = cfg.baseline23.gamma_per_period.find(id);
    if (it != cfg.baseline23.gamma_per_period.end()) return it->second;
    return std::vector<double>(static_cast<size_t>(T), 0.0);
  }
};

const std::vector<double>& history_series(
    const std::map<std::string, std::vector<double>>& store, const std::string& id, int T,
    const std::string& session, const std::string& what) {
  auto it = store.find(id);
  if (it == store.end() || static_cast<int>(it->second.size()) != T)
    throw FormulationError("session '" + session + "' needs the previous session's " + what +
                           " for '" + id + "'");
  return it->second;
}

int committed_profile(const BuildContext& ctx, const FlexDemandUnit& d) {
  auto it = ctx.starred.profile_choice.find(d.id);
  if (it == ctx.starred.profile_choice.end() || it->second < 0 ||
      it->second >= static_cast<int>(d.profiles.size()))
    throw FormulationError("session '" + ctx.ses.name + "' needs a committed profile for demand '" +
                           d.id + "'");
  return it->second;
}

void check_starred_shape(const BuildContext& ctx) {
  const auto& s = ctx.starred;
  const std::string& name = ctx.ses.name;
  switch (ctx.ses.kind) {
    case SessionKind::dam_srm:
      if (s.has_dam() || s.has_reserve() || !s.p_id.empty())
        throw FormulationError("session '" + name + "' opens the chain; prior results must be empty");
      return;
    case SessionKind::srm_idm1:
      if (!s.has_dam() || static_cast<int>(s.p_da.size()) != ctx.T)
        throw FormulationError("session '" + name + "' needs cleared day-ahead results");
      if (s.has_reserve())
        throw FormulationError("session '" + name + "' re-trades reserve that is already cleared");
      if (!s.p_id.empty())
        throw FormulationError("session '" + name + "' precedes every intraday clearing");
      return;
    case SessionKind::idm_k:
      if (!s.has_dam() || static_cast<int>(s.p_da.size()) != ctx.T)
        throw FormulationError("session '" + name + "' needs cleared day-ahead results");
      if (s.has_reserve() && (static_cast<int>(s.r_up.size()) != ctx.T ||
                              static_cast<int>(s.r_down.size()) != ctx.T))
        throw FormulationError("session '" + name + "' received reserve series of the wrong length");
      for (const auto& [j, series] : s.p_id) {
        if (j >= ctx.ses.idm_index)
          throw FormulationError("session '" + name + "' expects intraday results only for markets before #" +
                                 std::to_string(ctx.ses.idm_index) + "; found #" + std::to_string(j));
        if (static_cast<int>(series.size()) != ctx.T)
          throw FormulationError("session '" + name + "' received an intraday series of the wrong length");
      }
      return;
  }
}

// ---- unit blocks ---------------------------------------------------------

void add_ndres_block(BuildContext& ctx, const NdResUnit& u) {
  ModelIR& m = ctx.m();
  const int T = ctx.T;
  const ForecastBand& band = u.band_for(ctx.ses.name);

  UnitVarRefs refs;
  refs.p = make_series(T);
  for (int t = 1; t <= T; ++t)
    refs.p.at[t - 1] = m.add_var(pt(u.id + ".p", t), u.p_min, u.p_max);
  if (ctx.reserve_context) {
    refs.r_up = make_series(T);
    refs.r_down = make_series(T);
    for (int t = 1; t <= T; ++t) {
      refs.r_up.at[t - 1] =
          m.add_var(pt(u.id + ".r_up", t), 0.0, ctx.ses.sr_action_time * u.sr_ramp_up);
      refs.r_down.at[t - 1] =
          m.add_var(pt(u.id + ".r_down", t), 0.0, ctx.ses.sr_action_time * u.sr_ramp_down);
    }
  }

  RobustGroupRefs rob;
  bool robust = false;
  const double budget = ctx.unit_budget(u.id);
  if (mode_uses_groups(ctx.mode) && budget > 0.0) {
    std::vector<double> devs(band.neg_dev.begin() + (ctx.row_start - 1), band.neg_dev.end());
    rob = add_production_robust_group(m, u.id + ".rob", devs, budget, ctx.cfg.solver.big_m,
                                      ctx.cfg.solver.epsilon);
    ctx.b.robust_window_start[u.id + ".rob"] = ctx.row_start;
    robust = true;
  }

  const std::vector<double> bgamma =
      ctx.mode == BuildMode::baseline23 ? ctx.baseline_gamma(u.id) : std::vector<double>();

  for (int t = ctx.row_start; t <= T; ++t) {
    double cap = band.median[t - 1];
    if (ctx.mode == BuildMode::baseline23) cap -= bgamma[t - 1] * band.neg_dev[t - 1];
    LinExpr e;
    addv(e, refs.p[t], 1.0);
    if (ctx.reserve_context) addv(e, refs.r_up[t], 1.0);
    if (robust) addv(e, rob.y[t - ctx.row_start], 1.0);
    m.add_con(pt(u.id + ".cap", t), std::move(e), Sense::le, cap);
    if (ctx.reserve_context) {
      LinExpr lo;
      addv(lo, refs.p[t], 1.0);
      addv(lo, refs.r_down[t], -1.0);
      m.add_con(pt(u.id + ".pmin", t), std::move(lo), Sense::ge, u.p_min);
    }
  }
  ctx.b.ndres[u.id] = std::move(refs);
}

void add_stu_block(BuildContext& ctx, const StuUnit& u) {
  ModelIR& m = ctx.m();
  const int T = ctx.T;
  const double dt = ctx.dt;
  const ForecastBand& band = u.band_for(ctx.ses.name);

  StuVarRefs refs;
  refs.p = make_series(T);
  refs.p_sf = make_series(T);
  refs.q = make_series(T);
  refs.e = make_series(T);
  for (int t = 1; t <= T; ++t) {
    refs.p.at[t - 1] = m.add_var(pt(u.id + ".p", t), u.p_min, u.p_max);
    refs.p_sf.at[t - 1] = m.add_var(pt(u.id + ".p_sf", t), 0.0, kInf);
    refs.q.at[t - 1] = m.add_var(pt(u.id + ".q", t), 0.0, u.p_max / u.pb_efficiency);
    refs.e.at[t - 1] = m.add_var(pt(u.id + ".e", t), 0.0, u.storage_capacity);
  }
  if (ctx.reserve_context) {
    refs.r_up = make_series(T);
    refs.r_down = make_series(T);
    for (int t = 1; t <= T; ++t) {
      refs.r_up.at[t - 1] =
          m.add_var(pt(u.id + ".r_up", t), 0.0, ctx.ses.sr_action_time * u.sr_ramp_up);
      refs.r_down.at[t - 1] =
          m.add_var(pt(u.id + ".r_down", t), 0.0, ctx.ses.sr_action_time * u.sr_ramp_down);
    }
  }

  RobustGroupRefs rob;
  bool robust = false;
  const double budget = ctx.unit_budget(u.id);
  if (mode_uses_groups(ctx.mode) && budget > 0.0) {
    std::vector<double> devs(band.neg_dev.begin() + (ctx.row_start - 1), band.neg_dev.end());
    rob = add_production_robust_group(m, u.id + ".rob", devs, budget, ctx.cfg.solver.big_m,
                                      ctx.cfg.solver.epsilon);
    ctx.b.robust_window_start[u.id + ".rob"] = ctx.row_start;
    robust = true;
  }

  const std::vector<double> bgamma =
      ctx.mode == BuildMode::baseline23 ? ctx.baseline_gamma(u.id) : std::vector<double>();

  // Storage balance spans the whole day: frozen charge/discharge history still
  // determines the level entering the tradable window.
  for (int t = 1; t <= T; ++t) {
    LinExpr e;
    addv(e, refs.e[t], 1.0);
    if (t > 1) addv(e, refs.e[t - 1], -1.0);
    addv(e, refs.p_sf[t], -dt);
    addv(e, refs.q[t], dt);
    m.add_con(pt(u.id + ".storage", t), std::move(e), Sense::eq,
              t == 1 ? u.initial_storage : 0.0);
  }

  for (int t = ctx.row_start; t <= T; ++t) {
    double cap = band.median[t - 1];
    if (ctx.mode == BuildMode::baseline23) cap -= bgamma[t - 1] * band.neg_dev[t - 1];
    LinExpr sf;
    addv(sf, refs.p_sf[t], 1.0);
    if (robust) addv(sf, rob.y[t - ctx.row_start], 1.0);
    m.add_con(pt(u.id + ".sf_cap", t), std::move(sf), Sense::le, cap);

    LinExpr conv;
    addv(conv, refs.p[t], 1.0);
    addv(conv, refs.q[t], -u.pb_efficiency);
    m.add_con(pt(u.id + ".convert", t), std::move(conv), Sense::eq, 0.0);

    if (ctx.reserve_context) {
      LinExpr head;
      addv(head, refs.p[t], 1.0);
      addv(head, refs.r_up[t], 1.0);
      m.add_con(pt(u.id + ".headroom", t), std::move(head), Sense::le, u.p_max);
      LinExpr back;
      addv(back, refs.r_down[t], 1.0);
      addv(back, refs.p[t], -1.0);
      m.add_con(pt(u.id + ".backoff", t), std::move(back), Sense::le, 0.0);
    }
  }
  ctx.b.stu[u.id] = std::move(refs);
}

void add_demand_block(BuildContext& ctx, const FlexDemandUnit& d) {
  ModelIR& m = ctx.m();
  const int T = ctx.T;
  const bool first_session = ctx.ses.kind == SessionKind::dam_srm;

  DemandVarRefs refs;
  for (size_t k = 0; k < d.profiles.size(); ++k)
    refs.u.push_back(m.add_var(d.id + ".u[" + std::to_string(k) + "]", 0.0, 1.0, VarKind::binary));
  refs.p = make_series(T);
  for (int t = 1; t <= T; ++t)
    refs.p.at[t - 1] = m.add_var(pt(d.id + ".p", t), d.p_min, d.p_max);
  if (ctx.reserve_context) {
    refs.r_up = make_series(T);
    refs.r_down = make_series(T);
    for (int t = 1; t <= T; ++t) {
      refs.r_up.at[t - 1] =
          m.add_var(pt(d.id + ".r_up", t), 0.0, ctx.ses.sr_action_time * d.sr_ramp_up);
      refs.r_down.at[t - 1] =
          m.add_var(pt(d.id + ".r_down", t), 0.0, ctx.ses.sr_action_time * d.sr_ramp_down);
    }
  }

  LinExpr pick;
  for (int uv : refs.u) pick.add(uv, 1.0);
  m.add_con(d.id + ".pick", std::move(pick), Sense::eq, 1.0);

  if (first_session) {
    RobustGroupRefs rob;
    bool robust = false;
    const double budget = ctx.unit_budget(d.id);
    if (mode_uses_groups(ctx.mode) && budget > 0.0) {
      std::vector<std::vector<double>> profile_devs;
      for (const auto& prof : d.profiles) profile_devs.push_back(prof.band.pos_dev);
      rob = add_demand_robust_group(m, d.id + ".rob", refs.u, profile_devs, budget,
                                    ctx.cfg.solver.big_m, ctx.cfg.solver.epsilon);
      ctx.b.robust_window_start[d.id + ".rob"] = 1;
      robust = true;
    }
    const std::vector<double> bgamma =
        ctx.mode == BuildMode::baseline23 ? ctx.baseline_gamma(d.id) : std::vector<double>();
    for (int t = 1; t <= T; ++t) {
      LinExpr sched;
      addv(sched, refs.p[t], 1.0);
      for (size_t k = 0; k < d.profiles.size(); ++k) {
        double med = d.profiles[k].band.median[t - 1];
        if (ctx.mode == BuildMode::baseline23)
          med += bgamma[t - 1] * d.profiles[k].band.pos_dev[t - 1];
        addv(sched, refs.u[k], -med);
      }
      if (robust) addv(sched, rob.y[t - 1], -1.0);
      m.add_con(pt(d.id + ".sched", t), std::move(sched), Sense::eq, 0.0);
    }
  } else {
    // The committed profile pins the selector; consumption may move around the
    // committed median within the flexibility share.
    const int choice = committed_profile(ctx, d);
    for (size_t k = 0; k < refs.u.size(); ++k)
      m.fix_var(refs.u[k], static_cast<int>(k) == choice ? 1.0 : 0.0);
    const ForecastBand& prof = d.profiles[static_cast<size_t>(choice)].band;
    for (int t = ctx.row_start; t <= T; ++t) {
      const double med = prof.median[t - 1];
      LinExpr hi;
      addv(hi, refs.p[t], 1.0);
      m.add_con(pt(d.id + ".win_hi", t), std::move(hi), Sense::le,
                (1.0 + d.flex_up[t - 1]) * med);
      LinExpr lo;
      addv(lo, refs.p[t], 1.0);
      m.add_con(pt(d.id + ".win_lo", t), std::move(lo), Sense::ge,
                (1.0 - d.flex_down[t - 1]) * med);
    }
  }

  if (ctx.reserve_context) {
    for (int t = ctx.row_start; t <= T; ++t) {
      LinExpr fl;
      addv(fl, refs.r_up[t], 1.0);
      addv(fl, refs.p[t], -d.flex_down[t - 1]);
      m.add_con(pt(d.id + ".flex_lo", t), std::move(fl), Sense::le, 0.0);
      LinExpr fh;
      addv(fh, refs.r_down[t], 1.0);
      addv(fh, refs.p[t], -d.flex_up[t - 1]);
      m.add_con(pt(d.id + ".flex_hi", t), std::move(fh), Sense::le, 0.0);
      LinExpr slo;
      addv(slo, refs.p[t], 1.0);
      addv(slo, refs.r_up[t], -1.0);
      m.add_con(pt(d.id + ".state_lo", t), std::move(slo), Sense::ge, d.p_min);
      LinExpr shi;
      addv(shi, refs.p[t], 1.0);
      addv(shi, refs.r_down[t], 1.0);
      m.add_con(pt(d.id + ".state_hi", t), std::move(shi), Sense::le, d.p_max);
    }
  }

  // Consumption ramps must survive the worst activation pattern: ramping up
  // right after delivering up-reserve, ramping down after down-reserve.
  for (int t = std::max(2, ctx.row_start); t <= T; ++t) {
    LinExpr ru;
    addv(ru, refs.p[t], 1.0);
    addv(ru, refs.p[t - 1], -1.0);
    if (ctx.reserve_context) {
      addv(ru, refs.r_down[t], 1.0);
      addv(ru, refs.r_up[t - 1], 1.0);
    }
    m.add_con(pt(d.id + ".ramp_up", t), std::move(ru), Sense::le, d.ramp_up * ctx.dt);
    LinExpr rd;
    addv(rd, refs.p[t - 1], 1.0);
    addv(rd, refs.p[t], -1.0);
    if (ctx.reserve_context) {
      addv(rd, refs.r_down[t - 1], 1.0);
      addv(rd, refs.r_up[t], 1.0);
    }
    m.add_con(pt(d.id + ".ramp_down", t), std::move(rd), Sense::le, d.ramp_down * ctx.dt);
  }

  LinExpr energy;
  for (int t = 1; t <= T; ++t) {
    addv(energy, refs.p[t], ctx.dt);
    if (ctx.reserve_context) addv(energy, refs.r_up[t], -ctx.dt);
  }
  m.add_con(d.id + ".energy", std::move(energy), Sense::ge, d.min_daily_energy);

  ctx.b.demand[d.id] = std::move(refs);
}

// ---- history, balance, trade ---------------------------------------------

void freeze_history(BuildContext& ctx) {
  if (ctx.ses.kind != SessionKind::idm_k || ctx.tau <= 1) return;
  ModelIR& m = ctx.m();
  const auto& latest = ctx.starred.latest;
  const std::string& name = ctx.ses.name;

  auto fix_series = [&](const SeriesVars& vars, const std::vector<double>& vals) {
    for (int t = 1; t < ctx.tau; ++t) m.fix_var(vars[t], vals[t - 1]);
  };

  for (const auto& u : ctx.cfg.ndres) {
    const UnitVarRefs& refs = ctx.b.ndres[u.id];
    fix_series(refs.p, history_series(latest.unit_p, u.id, ctx.T, name, "dispatch"));
    if (ctx.reserve_context) {
      fix_series(refs.r_up, history_series(latest.unit_r_up, u.id, ctx.T, name, "up-reserve split"));
      fix_series(refs.r_down,
                 history_series(latest.unit_r_down, u.id, ctx.T, name, "down-reserve split"));
    }
  }
  for (const auto& u : ctx.cfg.stu) {
    const StuVarRefs& refs = ctx.b.stu[u.id];
    fix_series(refs.p, history_series(latest.unit_p, u.id, ctx.T, name, "dispatch"));
    fix_series(refs.p_sf, history_series(latest.stu_p_sf, u.id, ctx.T, name, "field schedule"));
    fix_series(refs.q, history_series(latest.stu_q, u.id, ctx.T, name, "storage draw"));
    if (ctx.reserve_context) {
      fix_series(refs.r_up, history_series(latest.unit_r_up, u.id, ctx.T, name, "up-reserve split"));
      fix_series(refs.r_down,
                 history_series(latest.unit_r_down, u.id, ctx.T, name, "down-reserve split"));
    }
  }
  for (const auto& d : ctx.cfg.demands) {
    const DemandVarRefs& refs = ctx.b.demand[d.id];
    fix_series(refs.p, history_series(latest.unit_p, d.id, ctx.T, name, "consumption"));
    if (ctx.reserve_context) {
      fix_series(refs.r_up, history_series(latest.unit_r_up, d.id, ctx.T, name, "up-reserve split"));
      fix_series(refs.r_down,
                 history_series(latest.unit_r_down, d.id, ctx.T, name, "down-reserve split"));
    }
  }
}

struct TradeAt {
  std::vector<LinTerm> vars;  // this session's open positions
  double constant = 0.0;      // positions cleared by earlier sessions
};

TradeAt cumulative_trade(const BuildContext& ctx, int t) {
  TradeAt out;
  switch (ctx.ses.kind) {
    case SessionKind::dam_srm:
      if (t >= ctx.tau) out.vars.push_back({ctx.b.p_trade[t], 1.0});
      break;
    case SessionKind::srm_idm1:
      out.constant += ctx.starred.p_da[t - 1];
      if (t >= ctx.tau) out.vars.push_back({ctx.b.p_trade[t], 1.0});
      break;
    case SessionKind::idm_k:
      out.constant += ctx.starred.p_da[t - 1];
      for (const auto& [j, series] : ctx.starred.p_id) out.constant += series[t - 1];
      if (t >= ctx.tau) out.vars.push_back({ctx.b.p_trade[t], 1.0});
      break;
  }
  return out;
}

void add_balance_rows(BuildContext& ctx) {
  ModelIR& m = ctx.m();
  for (int t = ctx.row_start; t <= ctx.T; ++t) {
    const TradeAt trade = cumulative_trade(ctx, t);
    const double r_up_const =
        (!ctx.reserve_traded && ctx.starred.has_reserve()) ? ctx.starred.r_up[t - 1] : 0.0;
    const double r_down_const =
        (!ctx.reserve_traded && ctx.starred.has_reserve()) ? ctx.starred.r_down[t - 1] : 0.0;

    LinExpr none;
    for (const auto& [id, refs] : ctx.b.ndres) addv(none, refs.p[t], 1.0);
    for (const auto& [id, refs] : ctx.b.stu) addv(none, refs.p[t], 1.0);
    for (const auto& [id, refs] : ctx.b.demand) addv(none, refs.p[t], -1.0);
    for (const auto& term : trade.vars) none.add(term.var, -term.coef);
    m.add_con(pt("balance.none", t), std::move(none), Sense::eq, trade.constant);

    if (!ctx.reserve_context) continue;

    LinExpr up;
    for (const auto& [id, refs] : ctx.b.ndres) {
      addv(up, refs.p[t], 1.0);
      addv(up, refs.r_up[t], 1.0);
    }
    for (const auto& [id, refs] : ctx.b.stu) {
      addv(up, refs.p[t], 1.0);
      addv(up, refs.r_up[t], 1.0);
    }
    for (const auto& [id, refs] : ctx.b.demand) {
      addv(up, refs.p[t], -1.0);
      addv(up, refs.r_up[t], 1.0);
    }
    for (const auto& term : trade.vars) up.add(term.var, -term.coef);
    if (ctx.reserve_traded) addv(up, ctx.b.r_up[t], -1.0);
    m.add_con(pt("balance.up", t), std::move(up), Sense::eq, trade.constant + r_up_const);

    LinExpr down;
    for (const auto& [id, refs] : ctx.b.ndres) {
      addv(down, refs.p[t], 1.0);
      addv(down, refs.r_down[t], -1.0);
    }
    for (const auto& [id, refs] : ctx.b.stu) {
      addv(down, refs.p[t], 1.0);
      addv(down, refs.r_down[t], -1.0);
    }
    for (const auto& [id, refs] : ctx.b.demand) {
      addv(down, refs.p[t], -1.0);
      addv(down, refs.r_down[t], -1.0);
    }
    for (const auto& term : trade.vars) down.add(term.var, -term.coef);
    if (ctx.reserve_traded) addv(down, ctx.b.r_down[t], 1.0);
    m.add_con(pt("balance.down", t), std::move(down), Sense::eq, trade.constant - r_down_const);
  }
}

void add_trade_limit_rows(BuildContext& ctx) {
  ModelIR& m = ctx.m();
  for (int t = ctx.row_start; t <= ctx.T; ++t) {
    const TradeAt trade = cumulative_trade(ctx, t);
    const double r_up_const =
        (!ctx.reserve_traded && ctx.starred.has_reserve()) ? ctx.starred.r_up[t - 1] : 0.0;
    const double r_down_const =
        (!ctx.reserve_traded && ctx.starred.has_reserve()) ? ctx.starred.r_down[t - 1] : 0.0;

    LinExpr hi;
    for (const auto& term : trade.vars) hi.add(term.var, term.coef);
    if (ctx.reserve_traded) addv(hi, ctx.b.r_up[t], 1.0);
    m.add_con(pt("trade.cap_hi", t), std::move(hi), Sense::le,
              ctx.gen_cap - trade.constant - r_up_const);

    LinExpr lo;
    for (const auto& term : trade.vars) lo.add(term.var, term.coef);
    if (ctx.reserve_traded) addv(lo, ctx.b.r_down[t], -1.0);
    m.add_con(pt("trade.cap_lo", t), std::move(lo), Sense::ge,
              -ctx.dem_cap - trade.constant + r_down_const);

    if (ctx.reserve_traded) {
      LinExpr link;
      addv(link, ctx.b.r_up[t], 1.0);
      addv(link, ctx.b.r_down[t], -ctx.ses.rho[t - 1]);
      m.add_con(pt("trade.reserve_link", t), std::move(link), Sense::eq, 0.0);
      LinExpr cap;
      addv(cap, ctx.b.r_up[t], 1.0);
      m.add_con(pt("trade.reserve_cap", t), std::move(cap), Sense::le,
                ctx.ses.kappa * ctx.gen_cap);
    }
  }
}

// ---- prices and objective -------------------------------------------------

const ForecastBand& stream_band(const MarketSessionSpec& ses, const std::string& stream) {
  if (stream == "da") return ses.lambda_da;
  if (stream == "sr_up") return ses.lambda_sr_up;
  if (stream == "sr_down") return ses.lambda_sr_down;
  return ses.lambda_id;
}

// Income coefficient per period: the band median, or for the comparison model
// the mean price (override or median shifted by half the deviation skew).
std::vector<double> income_prices(const BuildContext& ctx, const std::string& stream) {
  const ForecastBand& band = stream_band(ctx.ses, stream);
  std::vector<double> out(band.median);
  if (ctx.mode != BuildMode::baseline23) return out;
  auto sit = ctx.cfg.baseline23.mean_prices.find(ctx.ses.name);
  if (sit != ctx.cfg.baseline23.mean_prices.end()) {
    auto bit = sit->second.find(stream);
    if (bit != sit->second.end()) return bit->second;
  }
  for (size_t i = 0; i < out.size(); ++i) out[i] += (band.pos_dev[i] - band.neg_dev[i]) / 2.0;
  return out;
}

ForecastBand price_band_for_mode(const BuildContext& ctx, const std::string& stream) {
  const ForecastBand& band = stream_band(ctx.ses, stream);
  if (ctx.mode != BuildMode::baseline23) return band;
  ForecastBand sym;
  sym.median = income_prices(ctx, stream);
  sym.pos_dev.resize(band.pos_dev.size());
  sym.neg_dev.resize(band.neg_dev.size());
  for (size_t i = 0; i < band.pos_dev.size(); ++i)
    sym.pos_dev[i] = sym.neg_dev[i] = (band.pos_dev[i] + band.neg_dev[i]) / 2.0;
  return sym;
}

std::vector<int> window_vars(const SeriesVars& s, int first_period) {
  std::vector<int> out;
  for (size_t i = static_cast<size_t>(first_period - 1); i < s.at.size(); ++i)
    out.push_back(s.at[i]);
  return out;
}

void add_objective(BuildContext& ctx) {
  SessionModelBundle& b = ctx.b;
  const double dt = ctx.dt;

  switch (ctx.ses.kind) {
    case SessionKind::dam_srm: {
      const std::vector<double> da = income_prices(ctx, "da");
      for (int t = ctx.tau; t <= ctx.T; ++t) addv(b.income_expr, b.p_trade[t], da[t - 1] * dt);
      const std::vector<double> sru = income_prices(ctx, "sr_up");
      const std::vector<double> srd = income_prices(ctx, "sr_down");
      for (int t = 1; t <= ctx.T; ++t) {
        addv(b.income_expr, b.r_up[t], sru[t - 1]);
        addv(b.income_expr, b.r_down[t], srd[t - 1]);
      }
      break;
    }
    case SessionKind::srm_idm1: {
      const std::vector<double> sru = income_prices(ctx, "sr_up");
      const std::vector<double> srd = income_prices(ctx, "sr_down");
      for (int t = 1; t <= ctx.T; ++t) {
        addv(b.income_expr, b.r_up[t], sru[t - 1]);
        addv(b.income_expr, b.r_down[t], srd[t - 1]);
      }
      const std::vector<double> id = income_prices(ctx, "id");
      for (int t = ctx.tau; t <= ctx.T; ++t) addv(b.income_expr, b.p_trade[t], id[t - 1] * dt);
      break;
    }
    case SessionKind::idm_k: {
      const std::vector<double> id = income_prices(ctx, "id");
      for (int t = ctx.tau; t <= ctx.T; ++t) addv(b.income_expr, b.p_trade[t], id[t - 1] * dt);
      break;
    }
  }

  for (const auto& u : ctx.cfg.ndres) {
    const UnitVarRefs& refs = b.ndres[u.id];
    for (int t = 1; t <= ctx.T; ++t) addv(b.op_cost_expr, refs.p[t], u.op_cost * dt);
  }
  for (const auto& u : ctx.cfg.stu) {
    const StuVarRefs& refs = b.stu[u.id];
    for (int t = 1; t <= ctx.T; ++t) addv(b.op_cost_expr, refs.p[t], u.op_cost * dt);
  }
  for (const auto& d : ctx.cfg.demands) {
    const DemandVarRefs& refs = b.demand[d.id];
    for (size_t k = 0; k < d.profiles.size(); ++k)
      addv(b.profile_cost_expr, refs.u[k], d.profiles[k].cost);
  }

  LinExpr obj;
  for (const auto& term : b.income_expr.terms) obj.add(term.var, term.coef);
  for (const auto& term : b.op_cost_expr.terms) obj.add(term.var, -term.coef);
  for (const auto& term : b.profile_cost_expr.terms) obj.add(term.var, -term.coef);
  b.model.objective = std::move(obj);
}

void add_price_blocks(BuildContext& ctx) {
  SessionModelBundle& b = ctx.b;
  auto add = [&](const std::string& stream, const std::vector<int>& quantity, int first,
                 bool is_signed, bool is_energy) {
    const double gamma = ctx.price_budget(stream);
    if (gamma <= 0.0 || quantity.empty()) return;
    add_price_robust_terms(b, stream, quantity, first, price_band_for_mode(ctx, stream), gamma,
                           is_signed, is_energy);
  };

  switch (ctx.ses.kind) {
    case SessionKind::dam_srm:
      add("da", window_vars(b.p_trade, ctx.tau), ctx.tau, true, true);
      add("sr_up", window_vars(b.r_up, 1), 1, false, false);
      add("sr_down", window_vars(b.r_down, 1), 1, false, false);
      break;
    case SessionKind::srm_idm1:
      add("sr_up", window_vars(b.r_up, 1), 1, false, false);
      add("sr_down", window_vars(b.r_down, 1), 1, false, false);
      add("id", window_vars(b.p_trade, ctx.tau), ctx.tau, true, true);
      break;
    case SessionKind::idm_k:
      add("id", window_vars(b.p_trade, ctx.tau), ctx.tau, true, true);
      break;
  }
}

}  // namespace

void add_price_robust_terms(SessionModelBundle& bundle, const std::string& stream,
                            const std::vector<int>& quantity, int first_period,
                            const ForecastBand& band, double gamma, bool signed_quantity,
                            bool energy_quantity) {
  ModelIR& m = bundle.model;
  const int n = static_cast<int>(quantity.size());
  if (n == 0) return;
  if (band.periods() < first_period - 1 + n)
    throw FormulationError("price stream '" + stream + "' band shorter than the trade window");

  PriceStreamRefs refs;
  refs.name = stream;
  refs.gamma = gamma;
  refs.first_period = first_period;
  const std::string base = "price." + stream;
  const double scale = energy_quantity ? bundle.grid.delta_t : 1.0;

  refs.v = m.add_var(base + ".v", 0.0, kInf);
  for (int i = 0; i < n; ++i) {
    const int t = first_period + i;
    const double neg = band.neg_dev[t - 1];
    const double pos = band.pos_dev[t - 1];
    const bool priced = neg > 0.0 || pos > 0.0;
    const int y = m.add_var(pt(base + ".y", t), 0.0, priced ? kInf : 0.0);
    const int eta = m.add_var(pt(base + ".eta", t), 0.0, kInf);
    refs.y.push_back(y);
    refs.eta.push_back(eta);
    if (priced) {
      // Worst case removes `gamma` periods' worth of margin: v + eta covers
      // the per-unit loss on the absorbed quantity y.
      m.add_con(pt(base + ".cover", t),
                LinExpr{}.add(refs.v, 1.0).add(eta, 1.0).add(y, -neg), Sense::ge, 0.0);
      m.add_con(pt(base + ".link_hi", t), LinExpr{}.add(quantity[i], scale).add(y, -1.0),
                Sense::le, 0.0);
      if (signed_quantity && pos > 0.0) {
        if (neg > 0.0) {
          // A bought unit loses pos when the price rises; expressed through
          // the same absorber at the sell-side rate.
          m.add_con(pt(base + ".link_lo", t),
                    LinExpr{}.add(quantity[i], -scale).add(y, -neg / pos), Sense::le, 0.0);
        } else if (m.vars[static_cast<size_t>(quantity[i])].lb < 0.0) {
          throw FormulationError("price stream '" + stream + "' carries upward deviation without " +
                                 "downward deviation in period " + std::to_string(t) +
                                 "; a buying position cannot be protected");
        }
      }
    }
    m.objective.add(eta, -1.0);
  }
  m.objective.add(refs.v, -gamma);
  bundle.price_streams.push_back(std::move(refs));
}

ObjectiveBreakdown SessionModelBundle::decompose(const std::vector<double>& values) const {
  ObjectiveBreakdown out;
  out.median_income = eval_expr(income_expr, values);
  out.operating_cost = eval_expr(op_cost_expr, values);
  out.profile_cost = eval_expr(profile_cost_expr, values);
  for (const auto& s : price_streams) {
    double red = s.gamma * values[static_cast<size_t>(s.v)];
    for (int e : s.eta) red += values[static_cast<size_t>(e)];
    out.price_reduction[s.name] = red;
  }
  return out;
}

SessionModelBundle build_session_model(const CaseConfig& cfg, const std::string& session_name,
                                       const StarredResults& starred, BuildMode mode) {
  const MarketSessionSpec* ses = cfg.find_session(session_name);
  if (!ses) throw FormulationError("unknown session '" + session_name + "'");

  SessionModelBundle bundle;
  bundle.session_name = ses->name;
  bundle.kind = ses->kind;
  bundle.idm_index = ses->idm_index;
  bundle.grid = ses->grid;
  bundle.mode = mode;
  bundle.model.name = ses->name + (mode == BuildMode::proposed ? "" : "." + to_string(mode));

  BuildContext ctx{cfg, *ses, starred, mode, bundle};
  ctx.T = ses->grid.period_count;
  ctx.dt = ses->grid.delta_t;
  ctx.tau = ses->grid.session_start;
  ctx.row_start = ses->kind == SessionKind::idm_k ? ctx.tau : 1;
  ctx.reserve_traded = ses->has_srm();
  ctx.reserve_context = ctx.reserve_traded || starred.has_reserve();
  ctx.budgets = cfg.budgets_for(ses->name);
  ctx.gen_cap = cfg.total_generation_capacity();
  ctx.dem_cap = cfg.total_demand_capacity();

  check_starred_shape(ctx);

  ModelIR& m = bundle.model;
  bundle.p_trade = make_series(ctx.T);
  const double trade_box = ses->kind == SessionKind::dam_srm ? 0.0 : ctx.gen_cap + ctx.dem_cap;
  for (int t = ctx.tau; t <= ctx.T; ++t)
    bundle.p_trade.at[t - 1] =
        m.add_var(pt("trade.p", t), ses->kind == SessionKind::dam_srm ? -ctx.dem_cap : -trade_box,
                  ses->kind == SessionKind::dam_srm ? ctx.gen_cap : trade_box);
  if (ctx.reserve_traded) {
    bundle.r_up = make_series(ctx.T);
    bundle.r_down = make_series(ctx.T);
    for (int t = 1; t <= ctx.T; ++t) {
      bundle.r_up.at[t - 1] = m.add_var(pt("trade.r_up", t), 0.0, ctx.gen_cap);
      bundle.r_down.at[t - 1] = m.add_var(pt("trade.r_down", t), 0.0, ctx.gen_cap + ctx.dem_cap);
    }
  }

  for (const auto& u : cfg.ndres) add_ndres_block(ctx, u);
  for (const auto& u : cfg.stu) add_stu_block(ctx, u);
  for (const auto& d : cfg.demands) add_demand_block(ctx, d);

  freeze_history(ctx);
  add_balance_rows(ctx);
  add_trade_limit_rows(ctx);
  add_objective(ctx);
  add_price_blocks(ctx);
  return bundle;
}

SessionModelBundle build_baseline23_model(const CaseConfig& cfg, const std::string& session_name,
                                          const StarredResults& starred) {
  return build_session_model(cfg, session_name, starred, BuildMode::baseline23);
}

void build_network_extension(SessionModelBundle& bundle, const CaseConfig& cfg,
                             const NetworkSpec& net) {
  ModelIR& m = bundle.model;
  const int T = bundle.grid.period_count;

  std::unordered_map<std::string, int> bus_index;
  for (size_t i = 0; i < net.buses.size(); ++i) bus_index[net.buses[i].id] = static_cast<int>(i);
  if (net.buses.empty()) throw FormulationError("network needs at least one bus");
  auto rit = bus_index.find(net.reference_bus);
  if (rit == bus_index.end())
    throw FormulationError("network reference bus '" + net.reference_bus + "' unknown");
  const int ref_bus = rit->second;

  std::vector<int> main_buses;
  for (size_t i = 0; i < net.buses.size(); ++i)
    if (net.buses[i].main_subregion) main_buses.push_back(static_cast<int>(i));
  if (main_buses.empty())
    throw FormulationError("network needs at least one main-subregion bus");

  auto bus_of = [&](const std::string& unit) {
    auto it = net.unit_bus.find(unit);
    if (it == net.unit_bus.end())
      throw FormulationError("network does not place unit '" + unit + "' on a bus");
    auto bit = bus_index.find(it->second);
    if (bit == bus_index.end())
      throw FormulationError("network places unit '" + unit + "' on unknown bus '" + it->second + "'");
    return bit->second;
  };
  for (const auto& line : net.lines) {
    if (!bus_index.count(line.from) || !bus_index.count(line.to))
      throw FormulationError("network line endpoint unknown");
    if (line.reactance <= 0.0) throw FormulationError("network line reactance must be positive");
  }

  // Pull out the aggregate balance rows; their RHS carries the positions
  // cleared by earlier sessions, which the per-state export sums take over.
  const char* state_names[3] = {"none", "up", "down"};
  std::map<std::string, Constraint> removed;
  {
    std::vector<Constraint> kept;
    kept.reserve(m.cons.size());
    for (auto& con : m.cons) {
      if (con.name.rfind("balance.", 0) == 0)
        removed.emplace(con.name, std::move(con));
      else
        kept.push_back(std::move(con));
    }
    if (removed.empty())
      throw FormulationError("network extension needs a session model with balance rows");
    m.cons = std::move(kept);
  }

  const double box = cfg.total_generation_capacity() + cfg.total_demand_capacity();

  for (int s = 0; s < 3; ++s) {
    const std::string sn = state_names[s];
    for (int t = 1; t <= T; ++t) {
      auto rem = removed.find(pt("balance." + sn, t));
      if (rem == removed.end()) continue;

      std::vector<int> theta(net.buses.size(), -1);
      for (size_t i = 0; i < net.buses.size(); ++i)
        theta[i] = m.add_var(pt("net." + sn + ".theta[" + net.buses[i].id + "]", t), -kPi, kPi);
      m.fix_var(theta[static_cast<size_t>(ref_bus)], 0.0);

      std::vector<int> flow(net.lines.size(), -1);
      for (size_t l = 0; l < net.lines.size(); ++l)
        flow[l] = m.add_var(pt("net." + sn + ".flow[" + std::to_string(l) + "]", t),
                            -net.lines[l].capacity, net.lines[l].capacity);

      std::vector<int> exports(net.buses.size(), -1);
      for (int bi : main_buses)
        exports[static_cast<size_t>(bi)] =
            m.add_var(pt("net." + sn + ".exp[" + net.buses[static_cast<size_t>(bi)].id + "]", t),
                      -box, box);

      std::vector<LinExpr> bus_rows(net.buses.size());
      auto inject = [&](int bus, int var, double coef) {
        addv(bus_rows[static_cast<size_t>(bus)], var, coef);
      };
      for (const auto& [id, refs] : bundle.ndres) {
        const int bi = bus_of(id);
        inject(bi, refs.p[t], 1.0);
        if (s == 1) inject(bi, refs.r_up.empty() ? -1 : refs.r_up[t], 1.0);
        if (s == 2) inject(bi, refs.r_down.empty() ? -1 : refs.r_down[t], -1.0);
      }
      for (const auto& [id, refs] : bundle.stu) {
        const int bi = bus_of(id);
        inject(bi, refs.p[t], 1.0);
        if (s == 1) inject(bi, refs.r_up.empty() ? -1 : refs.r_up[t], 1.0);
        if (s == 2) inject(bi, refs.r_down.empty() ? -1 : refs.r_down[t], -1.0);
      }
      for (const auto& [id, refs] : bundle.demand) {
        const int bi = bus_of(id);
        inject(bi, refs.p[t], -1.0);
        if (s == 1) inject(bi, refs.r_up.empty() ? -1 : refs.r_up[t], 1.0);
        if (s == 2) inject(bi, refs.r_down.empty() ? -1 : refs.r_down[t], -1.0);
      }

      for (size_t l = 0; l < net.lines.size(); ++l) {
        const int from = bus_index[net.lines[l].from];
        const int to = bus_index[net.lines[l].to];
        const double susceptance = 1.0 / net.lines[l].reactance;
        LinExpr def;
        def.add(flow[l], 1.0);
        def.add(theta[static_cast<size_t>(from)], -susceptance);
        def.add(theta[static_cast<size_t>(to)], susceptance);
        m.add_con(pt("net." + sn + ".def[" + std::to_string(l) + "]", t), std::move(def),
                  Sense::eq, 0.0);
        bus_rows[static_cast<size_t>(from)].add(flow[l], -1.0);
        bus_rows[static_cast<size_t>(to)].add(flow[l], 1.0);
      }

      for (size_t i = 0; i < net.buses.size(); ++i) {
        addv(bus_rows[i], exports[i], -1.0);
        m.add_con(pt("net." + sn + ".bus[" + net.buses[i].id + "]", t), std::move(bus_rows[i]),
                  Sense::eq, 0.0);
      }

      // Exports from the main subregion take over the unit terms of the
      // erased aggregate row; trade variables and reserve totals keep the
      // signs they had there, and the RHS carries the cleared constants.
      LinExpr total;
      for (int bi : main_buses) addv(total, exports[static_cast<size_t>(bi)], 1.0);
      for (const auto& term : session_trade_terms(bundle, t)) total.add(term.var, -term.coef);
      if (s == 1 && !bundle.r_up.empty()) addv(total, bundle.r_up[t], -1.0);
      if (s == 2 && !bundle.r_down.empty()) addv(total, bundle.r_down[t], 1.0);
      m.add_con(pt("net." + sn + ".trade", t), std::move(total), Sense::eq, rem->second.rhs);
    }
  }
}

}  // namespace rvpp
