#include "rvpp/robust_blocks.hpp"

#include <algorithm>
#include <cmath>

namespace rvpp {
namespace {

double max_dev(const std::vector<double>& d) {
  double m = 0.0;
  for (double x : d) m = std::max(m, x);
  return m;
}

}  // namespace

double default_big_m(const std::vector<double>& deviations) {
  return 2.0 * max_dev(deviations) + 1.0;
}

double default_epsilon(const std::vector<double>& deviations) {
  return 1e-6 * std::max(1.0, max_dev(deviations));
}

namespace {

RobustGroupRefs add_group_machinery(ModelIR& model, const std::string& id, int T,
                                    double budget, double big_m, double epsilon,
                                    const std::vector<double>& y_ub) {
  RobustGroupRefs refs;
  refs.v = model.add_var(id + ".v", 0.0, kInf);
  for (int t = 0; t < T; ++t) {
    refs.chi.push_back(model.add_var(id + ".chi[" + std::to_string(t) + "]", 0.0, 1.0, VarKind::binary));
    refs.y.push_back(model.add_var(id + ".y[" + std::to_string(t) + "]", 0.0, y_ub[t]));
    refs.eta.push_back(model.add_var(id + ".eta[" + std::to_string(t) + "]", 0.0, kInf));
  }
  for (int t = 0; t < T; ++t) {
    const std::string st = std::to_string(t);
    // y >= v + eta - M (1 - chi)
    model.add_con(id + ".activate[" + st + "]",
                  LinExpr{}.add(refs.y[t], 1.0).add(refs.v, -1.0).add(refs.eta[t], -1.0).add(refs.chi[t], -big_m),
                  Sense::ge, -big_m);
    // eta in [eps chi, M chi]
    model.add_con(id + ".eta_lo[" + st + "]",
                  LinExpr{}.add(refs.eta[t], 1.0).add(refs.chi[t], -epsilon), Sense::ge, 0.0);
    model.add_con(id + ".eta_hi[" + st + "]",
                  LinExpr{}.add(refs.eta[t], 1.0).add(refs.chi[t], -big_m), Sense::le, 0.0);
  }
  LinExpr budget_row;
  for (int t = 0; t < T; ++t) budget_row.add(refs.chi[t], 1.0);
  model.add_con(id + ".budget", std::move(budget_row), Sense::eq, budget);
  return refs;
}

}  // namespace

RobustGroupRefs add_production_robust_group(ModelIR& model, const std::string& id,
                                            const std::vector<double>& deviations,
                                            double budget, double big_m, double epsilon) {
  const int T = static_cast<int>(deviations.size());
  if (big_m <= 0.0) big_m = default_big_m(deviations);
  if (epsilon <= 0.0) epsilon = default_epsilon(deviations);

  RobustGroupRefs refs = add_group_machinery(model, id, T, budget, big_m, epsilon, deviations);
  for (int t = 0; t < T; ++t) {
    // v + eta >= deviation, every period
    model.add_con(id + ".cover[" + std::to_string(t) + "]",
                  LinExpr{}.add(refs.v, 1.0).add(refs.eta[t], 1.0), Sense::ge, deviations[t]);
  }

  RobustGroup g;
  g.id = id;
  g.direction = RobustDirection::production_cut;
  g.budget = budget;
  g.chi = refs.chi;
  g.y = refs.y;
  g.v = refs.v;
  g.eta = refs.eta;
  g.deviations = deviations;
  model.robust_groups.push_back(std::move(g));
  return refs;
}

RobustGroupRefs add_demand_robust_group(ModelIR& model, const std::string& id,
                                        const std::vector<int>& profile_vars,
                                        const std::vector<std::vector<double>>& profile_deviations,
                                        double budget, double big_m, double epsilon) {
  const int T = static_cast<int>(profile_deviations.front().size());
  std::vector<double> dev_ub(T, 0.0);
  std::vector<double> all;
  for (const auto& p : profile_deviations)
    for (int t = 0; t < T; ++t) {
      dev_ub[t] = std::max(dev_ub[t], p[t]);
      all.push_back(p[t]);
    }
  if (big_m <= 0.0) big_m = default_big_m(all);
  if (epsilon <= 0.0) epsilon = default_epsilon(all);

  RobustGroupRefs refs = add_group_machinery(model, id, T, budget, big_m, epsilon, dev_ub);
  for (int t = 0; t < T; ++t) {
    const std::string st = std::to_string(t);
    // consumption add is forced off outside the active set
    model.add_con(id + ".y_off[" + st + "]",
                  LinExpr{}.add(refs.y[t], 1.0).add(refs.chi[t], -big_m), Sense::le, 0.0);
    // y bounded by the selected profile's deviation
    LinExpr ycap = LinExpr{}.add(refs.y[t], 1.0);
    for (size_t p = 0; p < profile_vars.size(); ++p)
      ycap.add(profile_vars[p], -profile_deviations[p][t]);
    model.add_con(id + ".y_cap[" + st + "]", std::move(ycap), Sense::le, 0.0);
    // v + eta >= selected profile's deviation
    LinExpr cover = LinExpr{}.add(refs.v, 1.0).add(refs.eta[t], 1.0);
    for (size_t p = 0; p < profile_vars.size(); ++p)
      cover.add(profile_vars[p], -profile_deviations[p][t]);
    model.add_con(id + ".cover[" + st + "]", std::move(cover), Sense::ge, 0.0);
  }

  RobustGroup g;
  g.id = id;
  g.direction = RobustDirection::demand_add;
  g.budget = budget;
  g.chi = refs.chi;
  g.y = refs.y;
  g.v = refs.v;
  g.eta = refs.eta;
  g.profile_vars = profile_vars;
  g.profile_deviations = profile_deviations;
  model.robust_groups.push_back(std::move(g));
  return refs;
}

}  // namespace rvpp
