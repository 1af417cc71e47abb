#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rvpp/domain.hpp"

namespace rvpp {

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& f : findings)
    out << (f.error ? "error" : "warning") << " " << f.path << ": " << f.message << "\n";
  return out.str();
}

namespace {

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}

  void error(const std::string& path, const std::string& msg) {
    report_.findings.push_back({true, path, msg});
  }
  void warn(const std::string& path, const std::string& msg) {
    report_.findings.push_back({false, path, msg});
  }

  void check_band(const ForecastBand& band, const std::string& path, bool power_series) {
    for (int t = 0; t < band.periods(); ++t) {
      const auto i = static_cast<size_t>(t);
      if (band.pos_dev[i] < 0.0)
        error(path, "pos_dev must be nonnegative at t=" + std::to_string(t + 1));
      if (band.neg_dev[i] < 0.0)
        error(path, "neg_dev must be nonnegative at t=" + std::to_string(t + 1));
      if (power_series && band.median[i] - band.neg_dev[i] < 0.0)
        error(path, "band lower edge median - neg_dev is negative at t=" + std::to_string(t + 1));
    }
  }

 private:
  ValidationReport& report_;
};

// Periods where every profile still has room above its median; only those
// periods can carry a demand deviation regardless of the profile picked.
int demand_positive_count(const FlexDemandUnit& u) {
  if (u.profiles.empty()) return 0;
  const int T = u.profiles.front().band.periods();
  int count = 0;
  for (int t = 0; t < T; ++t) {
    bool all = true;
    for (const auto& p : u.profiles)
      if (t >= p.band.periods() || p.band.pos_dev[static_cast<size_t>(t)] <= 0.0) all = false;
    if (all) ++count;
  }
  return count;
}

bool is_integer(double v) { return std::floor(v) == v; }

}  // namespace

ValidationReport validate_case(CaseConfig& cfg) {
  ValidationReport report;
  Checker ck(report);

  if (cfg.sessions.empty()) {
    ck.error("sessions", "at least one session is required");
    return report;
  }

  const int T = cfg.sessions.front().grid.period_count;
  const double delta_t = cfg.sessions.front().grid.delta_t;
  const bool buying_possible = cfg.total_demand_capacity() > 0.0;

  // session chain shape: one DAM_SRM first, optionally one SRM_IDM1, then
  // IDM_K sessions with strictly increasing index >= 2
  for (size_t i = 0; i < cfg.sessions.size(); ++i) {
    const auto& s = cfg.sessions[i];
    const std::string sp = "sessions[" + std::to_string(i) + "](" + s.name + ")";
    if (i == 0 && s.kind != SessionKind::dam_srm)
      ck.error(sp, "the first session must be DAM_SRM");
    if (i > 0 && s.kind == SessionKind::dam_srm)
      ck.error(sp, "only the first session may be DAM_SRM");
    if (s.kind == SessionKind::srm_idm1 && i != 1)
      ck.error(sp, "SRM_IDM1 must come immediately after DAM_SRM");
    if (s.kind == SessionKind::idm_k) {
      if (s.idm_index < 2)
        ck.error(sp, "idm_index must be at least 2 (IDM#1 is traded by SRM_IDM1)");
      for (size_t j = 0; j < i; ++j)
        if (cfg.sessions[j].kind == SessionKind::idm_k &&
            cfg.sessions[j].idm_index >= s.idm_index)
          ck.error(sp, "idm_index must increase along the session list");
    }

    const auto& g = s.grid;
    if (g.period_count != T)
      ck.error(sp + ".periods", "all sessions must share one horizon (expected " +
                                    std::to_string(T) + ")");
    if (g.delta_t != delta_t)
      ck.error(sp + ".delta_t", "all sessions must share one period length");
    if (g.delta_t <= 0.0) ck.error(sp + ".delta_t", "must be positive");
    if (g.session_start < 1 || g.session_start > g.period_count)
      ck.error(sp + ".session_start", "must lie in [1, " + std::to_string(g.period_count) + "]");

    if (s.has_srm()) {
      if (s.kappa < 0.0 || s.kappa > 1.0)
        ck.error(sp + ".kappa", "must lie in [0, 1]");
      if (s.sr_action_time <= 0.0) ck.error(sp + ".sr_action_time", "must be positive");
      for (size_t t = 0; t < s.rho.size(); ++t)
        if (s.rho[t] <= 0.0)
          ck.error(sp + ".rho", "must be positive at t=" + std::to_string(t + 1));
      ck.check_band(s.lambda_sr_up, sp + ".prices.sr_up", false);
      ck.check_band(s.lambda_sr_down, sp + ".prices.sr_down", false);
    }
    if (s.has_dam()) ck.check_band(s.lambda_da, sp + ".prices.da", false);
    if (s.has_idm()) ck.check_band(s.lambda_id, sp + ".prices.id", false);
  }

  // fleet
  std::set<std::string> unit_ids;
  for (size_t i = 0; i < cfg.ndres.size(); ++i) {
    const auto& u = cfg.ndres[i];
    const std::string up = "fleet.ndres[" + std::to_string(i) + "](" + u.id + ")";
    unit_ids.insert(u.id);
    if (u.p_min < 0.0 || u.p_min > u.p_max) ck.error(up, "need 0 <= p_min <= p_max");
    if (u.op_cost < 0.0) ck.error(up + ".op_cost", "must be nonnegative");
    if (u.sr_ramp_up < 0.0 || u.sr_ramp_down < 0.0)
      ck.error(up, "secondary reserve ramps must be nonnegative");
    ck.check_band(u.forecast, up + ".forecast", true);
    for (const auto& [name, band] : u.forecast_updates)
      ck.check_band(band, up + ".forecast_updates." + name, true);
  }
  for (size_t i = 0; i < cfg.stu.size(); ++i) {
    const auto& u = cfg.stu[i];
    const std::string up = "fleet.stu[" + std::to_string(i) + "](" + u.id + ")";
    unit_ids.insert(u.id);
    if (u.p_min < 0.0 || u.p_min > u.p_max) ck.error(up, "need 0 <= p_min <= p_max");
    if (u.op_cost < 0.0) ck.error(up + ".op_cost", "must be nonnegative");
    if (u.storage_capacity < 0.0) ck.error(up + ".storage_capacity", "must be nonnegative");
    if (u.initial_storage < 0.0 || u.initial_storage > u.storage_capacity)
      ck.error(up + ".initial_storage", "must lie in [0, storage_capacity]");
    if (u.pb_efficiency <= 0.0 || u.pb_efficiency > 1.0)
      ck.error(up + ".pb_efficiency", "must lie in (0, 1]");
    if (u.sr_ramp_up < 0.0 || u.sr_ramp_down < 0.0)
      ck.error(up, "secondary reserve ramps must be nonnegative");
    ck.check_band(u.solar_field_forecast, up + ".solar_field_forecast", true);
    for (const auto& [name, band] : u.forecast_updates)
      ck.check_band(band, up + ".forecast_updates." + name, true);
  }
  for (size_t i = 0; i < cfg.demands.size(); ++i) {
    const auto& u = cfg.demands[i];
    const std::string up = "fleet.demands[" + std::to_string(i) + "](" + u.id + ")";
    unit_ids.insert(u.id);
    if (u.profiles.empty()) ck.error(up + ".profiles", "needs at least one candidate profile");
    if (u.p_min < 0.0 || u.p_min > u.p_max) ck.error(up, "need 0 <= p_min <= p_max");
    if (u.ramp_up < 0.0 || u.ramp_down < 0.0) ck.error(up, "ramps must be nonnegative");
    if (u.sr_ramp_up < 0.0 || u.sr_ramp_down < 0.0)
      ck.error(up, "secondary reserve ramps must be nonnegative");
    if (u.min_daily_energy < 0.0) ck.error(up + ".min_daily_energy", "must be nonnegative");
    for (size_t t = 0; t < u.flex_up.size(); ++t)
      if (u.flex_up[t] < 0.0 || u.flex_up[t] > 1.0)
        ck.error(up + ".flex_up", "must lie in [0, 1] at t=" + std::to_string(t + 1));
    for (size_t t = 0; t < u.flex_down.size(); ++t)
      if (u.flex_down[t] < 0.0 || u.flex_down[t] > 1.0)
        ck.error(up + ".flex_down", "must lie in [0, 1] at t=" + std::to_string(t + 1));
    for (size_t p = 0; p < u.profiles.size(); ++p) {
      const std::string pp = up + ".profiles[" + std::to_string(p) + "]";
      ck.check_band(u.profiles[p].band, pp, false);
      for (int t = 0; t < u.profiles[p].band.periods(); ++t)
        if (u.profiles[p].band.median[static_cast<size_t>(t)] < 0.0)
          ck.error(pp, "consumption median is negative at t=" + std::to_string(t + 1));
    }
  }

  // a priced buy needs a hedgeable band: with a positive budget on a signed
  // stream, pos_dev must be positive wherever the session trades (the worst
  // buying price is uncapped otherwise) and neg_dev must accompany pos_dev
  // (a bought unit's worst-case loss is charged through the sell-side rate).
  // Day-ahead buys require demand; intraday buys can also unwind earlier
  // sales, so the intraday rule does not depend on the fleet.
  for (size_t i = 0; i < cfg.sessions.size(); ++i) {
    const auto& s = cfg.sessions[i];
    const std::string sp = "sessions[" + std::to_string(i) + "](" + s.name + ")";
    const auto budget = cfg.budgets_for(s.name);
    auto check_signed = [&](const ForecastBand& band, double gamma, const char* stream,
                            bool can_buy) {
      if (gamma <= 0.0 || !can_buy) return;
      bool pos_ok = true, neg_ok = true;
      for (int t = s.grid.session_start; t <= band.periods() && (pos_ok || neg_ok); ++t) {
        const size_t j = static_cast<size_t>(t - 1);
        if (pos_ok && band.pos_dev[j] <= 0.0) {
          ck.error(sp + ".prices." + stream,
                   "pos_dev must be positive at t=" + std::to_string(t) +
                       " (a buy is possible and the price budget is positive)");
          pos_ok = false;
        }
        if (neg_ok && band.pos_dev[j] > 0.0 && band.neg_dev[j] <= 0.0) {
          ck.error(sp + ".prices." + stream,
                   "neg_dev must be positive wherever pos_dev is (t=" + std::to_string(t) +
                       "); a bought unit's worst-case loss is charged at the sell-side rate");
          neg_ok = false;
        }
      }
    };
    if (s.has_dam()) check_signed(s.lambda_da, budget.price.da, "da", buying_possible);
    if (s.has_idm()) check_signed(s.lambda_id, budget.price.id, "id", true);
  }

  // budgets: integer unit budgets, clamped to the periods where a deviation
  // can actually materialize; price budgets clamped to the horizon length
  for (auto& [session_name, budget] : cfg.budgets) {
    const std::string bp = "budgets." + session_name;
    const MarketSessionSpec* s = cfg.find_session(session_name);
    if (!s) {
      ck.error(bp, "references unknown session '" + session_name + "'");
      continue;
    }
    auto clamp_price = [&](double& gamma, const char* stream) {
      if (gamma < 0.0) {
        ck.error(bp + ".price." + stream, "must be nonnegative");
      } else if (gamma > s->grid.period_count) {
        ck.warn(bp + ".price." + stream,
                "exceeds the horizon length; clamped to " + std::to_string(s->grid.period_count));
        gamma = s->grid.period_count;
      }
    };
    clamp_price(budget.price.da, "da");
    clamp_price(budget.price.sr_up, "sr_up");
    clamp_price(budget.price.sr_down, "sr_down");
    clamp_price(budget.price.id, "id");

    for (auto& [unit_id, gamma] : budget.unit) {
      const std::string gp = bp + ".units." + unit_id;
      if (unit_ids.find(unit_id) == unit_ids.end()) {
        ck.error(gp, "references unknown unit '" + unit_id + "'");
        continue;
      }
      if (!is_integer(gamma)) {
        ck.error(gp, "unit budgets must be integers");
        continue;
      }
      if (gamma < 0.0) {
        ck.error(gp, "must be nonnegative");
        continue;
      }
      int limit = -1;
      for (const auto& u : cfg.ndres)
        if (u.id == unit_id)
          limit = positive_deviation_count(u.band_for(session_name).neg_dev,
                                           s->grid.session_start);
      for (const auto& u : cfg.stu)
        if (u.id == unit_id)
          limit = positive_deviation_count(u.band_for(session_name).neg_dev,
                                           s->grid.session_start);
      for (const auto& u : cfg.demands)
        if (u.id == unit_id) {
          if (s->kind != SessionKind::dam_srm) {
            ck.warn(gp, "demand budgets apply to the day-ahead session only; ignored here");
            limit = -1;
            break;
          }
          limit = demand_positive_count(u);
        }
      if (limit >= 0 && gamma > limit) {
        ck.warn(gp, "exceeds the " + std::to_string(limit) +
                        " periods with positive deviation; clamped to " + std::to_string(limit));
        gamma = limit;
      }
    }
  }

  // network
  if (cfg.network) {
    const auto& n = *cfg.network;
    const std::string np = "network";
    std::set<std::string> bus_ids;
    bool any_main = false;
    for (size_t i = 0; i < n.buses.size(); ++i) {
      if (!bus_ids.insert(n.buses[i].id).second)
        ck.error(np + ".buses[" + std::to_string(i) + "]",
                 "duplicate bus id '" + n.buses[i].id + "'");
      if (n.buses[i].main_subregion) any_main = true;
    }
    if (n.buses.empty()) ck.error(np + ".buses", "needs at least one bus");
    if (!any_main) ck.error(np + ".buses", "at least one bus must be marked main");
    if (bus_ids.find(n.reference_bus) == bus_ids.end())
      ck.error(np + ".reference_bus", "references unknown bus '" + n.reference_bus + "'");
    for (size_t i = 0; i < n.lines.size(); ++i) {
      const std::string lp = np + ".lines[" + std::to_string(i) + "]";
      if (bus_ids.find(n.lines[i].from) == bus_ids.end())
        ck.error(lp, "references unknown bus '" + n.lines[i].from + "'");
      if (bus_ids.find(n.lines[i].to) == bus_ids.end())
        ck.error(lp, "references unknown bus '" + n.lines[i].to + "'");
      if (n.lines[i].reactance <= 0.0) ck.error(lp + ".reactance", "must be positive");
      if (n.lines[i].capacity < 0.0) ck.error(lp + ".capacity", "must be nonnegative");
    }
    for (const auto& [unit_id, bus_id] : n.unit_bus) {
      if (unit_ids.find(unit_id) == unit_ids.end())
        ck.error(np + ".unit_bus." + unit_id, "references unknown unit");
      if (bus_ids.find(bus_id) == bus_ids.end())
        ck.error(np + ".unit_bus." + unit_id, "references unknown bus '" + bus_id + "'");
    }
    for (const auto& id : unit_ids)
      if (n.unit_bus.find(id) == n.unit_bus.end())
        ck.error(np + ".unit_bus", "unit '" + id + "' is not mapped to a bus");
  }

  // solver knobs
  if (cfg.solver.combination_cap < 1) ck.error("solver.combination_cap", "must be at least 1");
  if (cfg.solver.max_iterations < 1) ck.error("solver.max_iterations", "must be at least 1");
  if (cfg.solver.feas_tol <= 0.0) ck.error("solver.feas_tol", "must be positive");
  if (cfg.solver.pivot_tol <= 0.0) ck.error("solver.pivot_tol", "must be positive");

  // per-period comparison budgets
  for (const auto& [unit_id, series] : cfg.baseline23.gamma_per_period) {
    const std::string gp = "baseline23.gamma_per_period." + unit_id;
    if (unit_ids.find(unit_id) == unit_ids.end())
      ck.error(gp, "references unknown unit '" + unit_id + "'");
    for (size_t t = 0; t < series.size(); ++t)
      if (series[t] < 0.0 || series[t] > 1.0)
        ck.error(gp, "must lie in [0, 1] at t=" + std::to_string(t + 1));
  }
  for (const auto& [session_name, streams] : cfg.baseline23.mean_prices) {
    if (!cfg.find_session(session_name))
      ck.error("baseline23.mean_prices." + session_name,
               "references unknown session '" + session_name + "'");
    for (const auto& [stream, series] : streams) {
      (void)series;
      if (stream != "da" && stream != "sr_up" && stream != "sr_down" && stream != "id")
        ck.error("baseline23.mean_prices." + session_name + "." + stream,
                 "unknown stream (expected da, sr_up, sr_down or id)");
    }
  }

  return report;
}

}  // namespace rvpp
