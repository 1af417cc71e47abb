#include "rvpp/assessment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace rvpp {

namespace {

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string pt(const std::string& base, int t) { return base + "[" + std::to_string(t) + "]"; }

double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double realize(const ScenarioGenSpec& spec, double med, double pos, double neg, double u) {
  const double lo = med - neg, hi = med + pos;
  if (spec.distribution == ScenarioDistribution::three_point) {
    if (u < spec.p_low) return lo;
    if (u < spec.p_low + spec.p_mid) return med;
    return hi;
  }
  if (hi <= lo) return med;
  const double k = spec.weibull_shape;
  const double x = std::pow(-std::log1p(-u), 1.0 / k);
  const double q01 = std::pow(-std::log(0.99), 1.0 / k);
  const double q99 = std::pow(-std::log(0.01), 1.0 / k);
  const double v = lo + (x - q01) * (hi - lo) / (q99 - q01);
  return std::min(hi, std::max(lo, v));
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t i = static_cast<size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

}  // namespace

bool ScenarioSet::contained(double tol) const {
  for (const auto& draw : draws) {
    if (draw.series.size() != bands.size()) return false;
    for (const auto& [key, band] : bands) {
      auto it = draw.series.find(key);
      if (it == draw.series.end() || it->second.size() != band.median.size()) return false;
      for (size_t t = 0; t < it->second.size(); ++t) {
        if (it->second[t] < band.median[t] - band.neg_dev[t] - tol) return false;
        if (it->second[t] > band.median[t] + band.pos_dev[t] + tol) return false;
      }
    }
  }
  return true;
}

ScenarioSet generate_scenarios(const CaseConfig& cfg, const ScenarioGenSpec& spec) {
  if (spec.count <= 0) throw AssessmentError("scenario count must be positive");
  if (cfg.sessions.empty()) throw AssessmentError("config has no market sessions");
  if (spec.distribution == ScenarioDistribution::three_point) {
    if (spec.p_low < 0.0 || spec.p_mid < 0.0 || spec.p_high < 0.0 ||
        std::abs(spec.p_low + spec.p_mid + spec.p_high - 1.0) > 1e-9)
      throw AssessmentError("three-point probabilities must be nonnegative and sum to 1");
  } else if (spec.weibull_shape <= 0.0) {
    throw AssessmentError("weibull shape must be positive");
  }

  ScenarioSet set;
  set.periods = cfg.sessions.front().grid.period_count;
  const std::string& newest = cfg.sessions.back().name;
  for (const auto& u : cfg.ndres) set.bands["unit." + u.id] = u.band_for(newest);
  for (const auto& u : cfg.stu) set.bands["unit." + u.id] = u.band_for(newest);
  for (const auto& d : cfg.demands)
    for (size_t k = 0; k < d.profiles.size(); ++k)
      set.bands["demand." + d.id + "." + std::to_string(k)] = d.profiles[k].band;
  for (const auto& s : cfg.sessions) {
    if (s.has_dam()) set.bands["price." + s.name + ".da"] = s.lambda_da;
    if (s.has_srm()) {
      set.bands["price." + s.name + ".sr_up"] = s.lambda_sr_up;
      set.bands["price." + s.name + ".sr_down"] = s.lambda_sr_down;
    }
    if (s.has_idm()) set.bands["price." + s.name + ".id"] = s.lambda_id;
  }

  // one uniform per band and period, bands in key order: the stream of draws
  // is a pure function of (seed, count) regardless of distribution
  std::mt19937_64 rng(spec.seed);
  set.draws.resize(static_cast<size_t>(spec.count));
  for (auto& draw : set.draws)
    for (const auto& [key, band] : set.bands) {
      auto& out = draw.series[key];
      out.resize(band.median.size());
      for (size_t t = 0; t < band.median.size(); ++t)
        out[t] = realize(spec, band.median[t], band.pos_dev[t], band.neg_dev[t], unit_draw(rng));
    }
  return set;
}

AssessmentResult out_of_sample_evaluate(const CaseConfig& cfg, const StarredResults& positions,
                                        const ScenarioSet& scenarios,
                                        const AssessmentOptions& opts) {
  if (cfg.sessions.empty()) throw AssessmentError("config has no market sessions");
  if (!positions.has_dam())
    throw AssessmentError("assessment needs committed day-ahead positions");
  const int T = cfg.sessions.front().grid.period_count;
  const double dt = cfg.sessions.front().grid.delta_t;
  if (static_cast<int>(positions.p_da.size()) != T)
    throw AssessmentError("day-ahead position length does not match the horizon");
  if (scenarios.periods != T)
    throw AssessmentError("scenario horizon does not match the config");
  const bool with_reserve = positions.has_reserve();
  if (with_reserve && (static_cast<int>(positions.r_up.size()) != T ||
                       static_cast<int>(positions.r_down.size()) != T))
    throw AssessmentError("reserve position length does not match the horizon");

  // the session that committed a position prices it
  const MarketSessionSpec* dam = nullptr;
  const MarketSessionSpec* reserve_session = nullptr;
  std::map<int, const MarketSessionSpec*> idm_sessions;
  for (const auto& s : cfg.sessions) {
    if (s.kind == SessionKind::dam_srm) {
      dam = &s;
      if (!reserve_session) reserve_session = &s;
    }
    if (s.kind == SessionKind::srm_idm1) {
      reserve_session = &s;
      idm_sessions[1] = &s;
    }
    if (s.kind == SessionKind::idm_k) idm_sessions[s.idm_index] = &s;
  }
  if (!dam) throw AssessmentError("pipeline has no day-ahead session");
  for (const auto& [k, v] : positions.p_id) {
    if (!idm_sessions.count(k))
      throw AssessmentError("no session in the pipeline trades intraday market #" +
                            std::to_string(k));
    if (static_cast<int>(v.size()) != T)
      throw AssessmentError("intraday position length does not match the horizon");
  }

  std::vector<std::string> demand_keys;
  double profile_cost = 0.0;
  for (const auto& d : cfg.demands) {
    auto it = positions.profile_choice.find(d.id);
    if (it == positions.profile_choice.end() || it->second < 0 ||
        it->second >= static_cast<int>(d.profiles.size()))
      throw AssessmentError("no committed profile for demand '" + d.id + "'");
    demand_keys.push_back("demand." + d.id + "." + std::to_string(it->second));
    profile_cost += d.profiles[static_cast<size_t>(it->second)].cost;
  }

  std::vector<double> p_star(positions.p_da);
  for (const auto& [k, v] : positions.p_id)
    for (int t = 0; t < T; ++t) p_star[static_cast<size_t>(t)] += v[static_cast<size_t>(t)];

  auto series = [&](const Scenario& w, const std::string& key) -> const std::vector<double>& {
    auto it = w.series.find(key);
    if (it == w.series.end() || static_cast<int>(it->second.size()) != T)
      throw AssessmentError("scenario set has no series '" + key + "'");
    return it->second;
  };

  const double action = reserve_session ? reserve_session->sr_action_time : 0.0;
  const ReferenceSolveOptions solve_opts = make_solve_options(cfg.solver);

  AssessmentResult res;
  res.profit.reserve(scenarios.draws.size());
  res.penalty.reserve(scenarios.draws.size());

  for (const Scenario& w : scenarios.draws) {
    double income = 0.0;
    {
      const auto& lda = series(w, "price." + dam->name + ".da");
      for (int t = 0; t < T; ++t) income += lda[t] * positions.p_da[t] * dt;
      if (with_reserve) {
        const auto& lup = series(w, "price." + reserve_session->name + ".sr_up");
        const auto& ldn = series(w, "price." + reserve_session->name + ".sr_down");
        for (int t = 0; t < T; ++t)
          income += lup[t] * positions.r_up[t] + ldn[t] * positions.r_down[t];
      }
      for (const auto& [k, v] : positions.p_id) {
        const auto& lid = series(w, "price." + idm_sessions.at(k)->name + ".id");
        for (int t = 0; t < T; ++t) income += lid[t] * v[t] * dt;
      }
    }

    std::vector<double> d_tot(static_cast<size_t>(T), 0.0);
    std::vector<const std::vector<double>*> d_real;
    for (const auto& key : demand_keys) {
      const auto& s = series(w, key);
      d_real.push_back(&s);
      for (int t = 0; t < T; ++t) d_tot[static_cast<size_t>(t)] += s[t];
    }

    // Real-time re-dispatch: committed positions are constants, units move
    // freely inside realized availability, demand consumes its realized load
    // and can still flex for reserve delivery. One slack per period absorbs
    // the worst imbalance across the three activation states.
    ModelIR m;
    m.name = "recourse";
    LinExpr op_expr, pen_expr;
    std::vector<LinExpr> pool(static_cast<size_t>(T));
    std::vector<LinExpr> up_row(static_cast<size_t>(T)), down_row(static_cast<size_t>(T));

    auto add_unit_rows = [&](const std::string& id, double p_min, double p_max, double op_cost,
                             const std::vector<double>& avail, double ramp_up, double ramp_down,
                             bool cap_is_power) {
      std::vector<int> p_idx;
      p_idx.reserve(static_cast<size_t>(T));
      for (int t = 1; t <= T; ++t) {
        const int p = m.add_var(pt(id + ".p", t), p_min, p_max);
        p_idx.push_back(p);
        op_expr.add(p, op_cost * dt);
        pool[static_cast<size_t>(t - 1)].add(p, 1.0);
        int ru = -1, rd = -1;
        if (with_reserve) {
          ru = m.add_var(pt(id + ".r_up", t), 0.0, action * ramp_up);
          rd = m.add_var(pt(id + ".r_down", t), 0.0, action * ramp_down);
          up_row[static_cast<size_t>(t - 1)].add(p, 1.0);
          up_row[static_cast<size_t>(t - 1)].add(ru, 1.0);
          down_row[static_cast<size_t>(t - 1)].add(p, 1.0);
          down_row[static_cast<size_t>(t - 1)].add(rd, -1.0);
          LinExpr lo;
          lo.add(p, 1.0);
          lo.add(rd, -1.0);
          m.add_con(pt(id + ".floor", t), std::move(lo), Sense::ge, p_min);
        }
        if (cap_is_power) {
          LinExpr cap;
          cap.add(p, 1.0);
          if (ru >= 0) cap.add(ru, 1.0);
          m.add_con(pt(id + ".cap", t), std::move(cap), Sense::le,
                    avail[static_cast<size_t>(t - 1)]);
        } else if (ru >= 0) {
          LinExpr head;
          head.add(p, 1.0);
          head.add(ru, 1.0);
          m.add_con(pt(id + ".cap", t), std::move(head), Sense::le, p_max);
        }
      }
      return p_idx;
    };

    for (const auto& u : cfg.ndres)
      add_unit_rows(u.id, u.p_min, u.p_max, u.op_cost, series(w, "unit." + u.id), u.sr_ramp_up,
                    u.sr_ramp_down, true);

    for (const auto& u : cfg.stu) {
      const auto& field = series(w, "unit." + u.id);
      const std::vector<int> p_idx = add_unit_rows(u.id, u.p_min, u.p_max, u.op_cost, field,
                                                   u.sr_ramp_up, u.sr_ramp_down, false);
      int prev_e = -1;
      for (int t = 1; t <= T; ++t) {
        const int p_sf = m.add_var(pt(u.id + ".p_sf", t), 0.0, kInf);
        const int q = m.add_var(pt(u.id + ".q", t), 0.0,
                                u.pb_efficiency > 0.0 ? u.p_max / u.pb_efficiency : 0.0);
        const int e = m.add_var(pt(u.id + ".e", t), 0.0, u.storage_capacity);
        LinExpr sf;
        sf.add(p_sf, 1.0);
        m.add_con(pt(u.id + ".sf_cap", t), std::move(sf), Sense::le,
                  field[static_cast<size_t>(t - 1)]);
        LinExpr st;
        st.add(e, 1.0);
        if (prev_e >= 0) st.add(prev_e, -1.0);
        st.add(p_sf, -dt);
        st.add(q, dt);
        m.add_con(pt(u.id + ".storage", t), std::move(st), Sense::eq,
                  t == 1 ? u.initial_storage : 0.0);
        LinExpr conv;
        conv.add(p_idx[static_cast<size_t>(t - 1)], 1.0);
        conv.add(q, -u.pb_efficiency);
        m.add_con(pt(u.id + ".convert", t), std::move(conv), Sense::eq, 0.0);
        prev_e = e;
      }
    }

    if (with_reserve) {
      for (size_t i = 0; i < cfg.demands.size(); ++i) {
        const auto& d = cfg.demands[i];
        for (int t = 1; t <= T; ++t) {
          const double load = (*d_real[i])[static_cast<size_t>(t - 1)];
          const int ru = m.add_var(
              pt(d.id + ".r_up", t), 0.0,
              std::min(action * d.sr_ramp_up,
                       std::max(0.0, d.flex_down[static_cast<size_t>(t - 1)] * load)));
          const int rd = m.add_var(
              pt(d.id + ".r_down", t), 0.0,
              std::min(action * d.sr_ramp_down,
                       std::max(0.0, d.flex_up[static_cast<size_t>(t - 1)] * load)));
          up_row[static_cast<size_t>(t - 1)].add(ru, 1.0);
          down_row[static_cast<size_t>(t - 1)].add(rd, -1.0);
        }
      }
    }

    for (int t = 1; t <= T; ++t) {
      const int s = m.add_var(pt("imbalance", t), -kInf, kInf);
      const int kap = m.add_var(pt("penalty", t), 0.0, kInf);
      pen_expr.add(kap, opts.imbalance_penalty * dt);
      pool[static_cast<size_t>(t - 1)].add(s, -1.0);
      m.add_con(pt("pool", t), std::move(pool[static_cast<size_t>(t - 1)]), Sense::eq,
                d_tot[static_cast<size_t>(t - 1)] + p_star[static_cast<size_t>(t - 1)]);
      LinExpr hi;
      hi.add(s, 1.0);
      hi.add(kap, -1.0);
      m.add_con(pt("imb_hi", t), std::move(hi), Sense::le, 0.0);
      LinExpr lo;
      lo.add(s, -1.0);
      lo.add(kap, -1.0);
      m.add_con(pt("imb_lo", t), std::move(lo), Sense::le, 0.0);
      if (with_reserve) {
        up_row[static_cast<size_t>(t - 1)].add(kap, 1.0);
        down_row[static_cast<size_t>(t - 1)].add(kap, -1.0);
        const double base =
            d_tot[static_cast<size_t>(t - 1)] + p_star[static_cast<size_t>(t - 1)];
        m.add_con(pt("up", t), std::move(up_row[static_cast<size_t>(t - 1)]), Sense::ge,
                  base + positions.r_up[static_cast<size_t>(t - 1)]);
        m.add_con(pt("down", t), std::move(down_row[static_cast<size_t>(t - 1)]), Sense::le,
                  base - positions.r_down[static_cast<size_t>(t - 1)]);
      }
    }

    for (const auto& term : pen_expr.terms) m.objective.add(term.var, -term.coef);
    for (const auto& term : op_expr.terms) m.objective.add(term.var, -term.coef);

    Solution sol = solve_reference(m, solve_opts);
    if (sol.status != SolveStatus::optimal)
      throw SolveFailure("recourse dispatch did not solve: solver status " +
                         to_string(sol.status));

    const double op = eval_expr(op_expr, sol.values);
    const double pen = eval_expr(pen_expr, sol.values);
    res.profit.push_back(income - op - profile_cost);
    res.penalty.push_back(pen);
  }

  double sum_p = 0.0, sum_k = 0.0;
  for (double v : res.profit) sum_p += v;
  for (double v : res.penalty) sum_k += v;
  const double n = static_cast<double>(res.profit.size());
  res.average_profit = n > 0 ? sum_p / n : 0.0;
  res.average_penalty = n > 0 ? sum_k / n : 0.0;
  return res;
}

SweepResult sweep_budgets(const CaseConfig& cfg, const SweepSpec& spec) {
  if (cfg.sessions.empty()) throw AssessmentError("config has no market sessions");
  if (spec.grid.empty()) throw AssessmentError("sweep grid is empty");
  const std::string session = cfg.sessions.front().name;
  const MarketSessionSpec& ses = cfg.sessions.front();
  const bool touch_energy = spec.which != SweepDimension::price;
  const bool touch_price = spec.which != SweepDimension::energy;

  SweepResult out;
  double prev = kInf;
  for (double g : spec.grid) {
    if (g < 0.0) throw AssessmentError("budgets must be nonnegative");
    if (touch_energy && std::abs(g - std::round(g)) > 1e-9)
      throw AssessmentError("unit budgets must be integers");

    CaseConfig c = cfg;
    BudgetSet& b = c.budgets[session];
    if (touch_energy) {
      for (const auto& u : c.ndres) b.unit[u.id] = g;
      for (const auto& u : c.stu) b.unit[u.id] = g;
      if (ses.kind == SessionKind::dam_srm)
        for (const auto& d : c.demands) b.unit[d.id] = g;
    }
    if (touch_price) {
      if (ses.has_dam()) b.price.da = g;
      if (ses.has_srm()) {
        b.price.sr_up = g;
        b.price.sr_down = g;
      }
      if (ses.has_idm()) b.price.id = g;
    }

    ValidationReport report = validate_case(c);  // clamps oversized budgets
    if (!report.ok())
      throw AssessmentError("sweep config failed validation:\n" + report.to_string());

    SessionModelBundle bundle = spec.mode == BuildMode::baseline23
                                    ? build_baseline23_model(c, session, {})
                                    : build_session_model(c, session, {}, spec.mode);
    if (c.network) build_network_extension(bundle, c, *c.network);
    Solution sol = solve_reference(bundle.model, make_solve_options(c.solver));
    if (sol.status != SolveStatus::optimal)
      throw SolveFailure("sweep aborted at budget " + g6(g) + ": solver status " +
                         to_string(sol.status));

    out.monotone =
        out.monotone && sol.objective <= prev + 1e-7 * std::max(1.0, std::abs(prev));
    prev = sol.objective;
    out.points.push_back({g, sol.objective, bundle.decompose(sol.values)});
  }
  return out;
}

double InfeasibilityProfile::total() const {
  double s = 0.0;
  for (double v : per_period) s += v;
  return s;
}

double InfeasibilityProfile::worst_sum(int k) const {
  std::vector<double> v = per_period;
  std::sort(v.begin(), v.end(), std::greater<double>());
  double s = 0.0;
  for (int i = 0; i < k && i < static_cast<int>(v.size()); ++i) s += v[i];
  return s;
}

InfeasibilityProfile possible_infeasibility(const CaseConfig& cfg, const SessionResult& result) {
  InfeasibilityProfile prof;
  prof.per_period.assign(result.p_trade.size(), 0.0);
  auto add = [&](const std::vector<double>& sourced, const ForecastBand& band) {
    const size_t n = std::min({prof.per_period.size(), sourced.size(), band.median.size()});
    for (size_t t = 0; t < n; ++t)
      prof.per_period[t] += std::max(0.0, sourced[t] - (band.median[t] - band.neg_dev[t]));
  };
  for (const auto& u : cfg.ndres) {
    auto it = result.unit_p.find(u.id);
    if (it != result.unit_p.end()) add(it->second, u.band_for(result.session));
  }
  for (const auto& u : cfg.stu) {
    auto it = result.stu_p_sf.find(u.id);
    if (it != result.stu_p_sf.end()) add(it->second, u.band_for(result.session));
  }
  return prof;
}

std::string assessment_csv(const AssessmentResult& result) {
  std::string out = "scenario,profit,penalty\n";
  for (size_t i = 0; i < result.profit.size(); ++i)
    out += std::to_string(i + 1) + "," + g6(result.profit[i]) + "," + g6(result.penalty[i]) +
           "\n";
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "budget,objective\n";
  for (const auto& p : result.points) out += g6(p.budget) + "," + g6(p.objective) + "\n";
  return out;
}

std::string histogram_csv(const std::vector<double>& values) {
  std::string out = "bin_lo,bin_hi,count\n";
  if (values.empty()) return out;
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  const double lo = v.front(), hi = v.back();
  int bins = 1;
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  if (iqr > 0.0 && hi > lo) {
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));
    bins = std::min(10000, std::max(1, static_cast<int>(std::ceil((hi - lo) / width))));
  }
  std::vector<long> counts(static_cast<size_t>(bins), 0);
  const double width = bins > 0 && hi > lo ? (hi - lo) / bins : 1.0;
  for (double x : v) {
    int idx = hi > lo ? static_cast<int>((x - lo) / width) : 0;
    idx = std::min(bins - 1, std::max(0, idx));
    ++counts[static_cast<size_t>(idx)];
  }
  for (int i = 0; i < bins; ++i)
    out += g6(lo + i * width) + "," + g6(hi > lo ? lo + (i + 1) * width : hi) + "," +
           std::to_string(counts[static_cast<size_t>(i)]) + "\n";
  return out;
}

}  // namespace rvpp
