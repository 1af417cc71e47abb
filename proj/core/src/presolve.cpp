#include "rvpp/presolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rvpp {
namespace {

std::vector<double> resolve_deviations(const ModelIR& model, const RobustGroup& g) {
  if (g.profile_vars.empty()) return g.deviations;
  int chosen = -1;
  for (size_t p = 0; p < g.profile_vars.size(); ++p) {
    const auto& v = model.vars[g.profile_vars[p]];
    if (v.lb != v.ub)
      throw std::runtime_error("robust group '" + g.id +
                               "': profile selector '" + v.name +
                               "' must be fixed before presolve");
    if (v.lb > 0.5) chosen = static_cast<int>(p);
  }
  if (chosen < 0)
    throw std::runtime_error("robust group '" + g.id + "': no profile selected");
  return g.profile_deviations[chosen];
}

}  // namespace

PresolvedModel presolve_fix_robust_binaries(const ModelIR& model) {
  PresolvedModel out;
  const int n = static_cast<int>(model.vars.size());
  out.var_map.assign(n, 0);
  out.fixed_values.assign(n, 0.0);
  std::vector<bool> removed(n, false);

  for (const auto& g : model.robust_groups) {
    const std::vector<double> dev = resolve_deviations(model, g);
    const int T = static_cast<int>(dev.size());
    const long budget = std::min<long>(std::lround(g.budget), T);

    std::vector<int> order(T);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dev[a] > dev[b]; });

    std::vector<bool> active(T, false);
    GroupActiveSet as{g.id, {}};
    for (long k = 0; k < budget; ++k) {
      active[order[k]] = true;
      as.periods.push_back(order[k]);
    }
    std::sort(as.periods.begin(), as.periods.end());
    out.active_sets.push_back(std::move(as));

    double v_val = 0.0;
    for (int t = 0; t < T; ++t)
      if (!active[t]) v_val = std::max(v_val, dev[t]);

    auto fix = [&](int var, double value) {
      removed[var] = true;
      out.fixed_values[var] = value;
    };
    for (int t = 0; t < T; ++t) {
      fix(g.chi[t], active[t] ? 1.0 : 0.0);
      fix(g.y[t], active[t] ? dev[t] : 0.0);
      fix(g.eta[t], active[t] ? std::max(0.0, dev[t] - v_val) : 0.0);
    }
    fix(g.v, v_val);
  }

  // compact the kept variables
  out.model.name = model.name;
  for (int j = 0; j < n; ++j) {
    if (removed[j]) {
      out.var_map[j] = -1;
      continue;
    }
    out.var_map[j] = static_cast<int>(out.model.vars.size());
    out.model.vars.push_back(model.vars[j]);
  }

  // Substitute fixed values into rows. A row whose remaining support is
  // entirely pinned (removed vars plus lb==ub vars) is dropped when satisfied;
  // a violated pinned row is replaced by an unsatisfiable marker row so the
  // reduced solve reports infeasibility decisively. The violation can be as
  // thin as the separation epsilon (ties at the budget cut, or an active
  // period with zero deviation forcing eta >= epsilon against y <= 0), which
  // solver feasibility tolerances would otherwise absorb; exact arithmetic
  // here is what keeps the reduction faithful to the strict model.
  for (const auto& con : model.cons) {
    Constraint c;
    c.name = con.name;
    c.sense = con.sense;
    c.rhs = con.rhs;
    bool live = false;
    double pinned_lhs = 0.0;
    for (const auto& term : con.expr.terms) {
      if (removed[term.var]) {
        c.rhs -= term.coef * out.fixed_values[term.var];
        continue;
      }
      c.expr.add(out.var_map[term.var], term.coef);
      const auto& v = model.vars[term.var];
      if (v.lb != v.ub)
        live = true;
      else
        pinned_lhs += term.coef * v.lb;
    }
    if (!live) {
      const double tol = 1e-9 * std::max(1.0, std::abs(c.rhs));
      const bool ok = c.sense == Sense::le   ? pinned_lhs <= c.rhs + tol
                      : c.sense == Sense::ge ? pinned_lhs >= c.rhs - tol
                                             : std::abs(pinned_lhs - c.rhs) <= tol;
      if (ok) continue;
      c.expr.terms.clear();
      c.sense = Sense::ge;
      c.rhs = 1.0;
    }
    out.model.cons.push_back(std::move(c));
  }

  out.model.objective_constant = model.objective_constant;
  for (const auto& term : model.objective.terms) {
    if (removed[term.var])
      out.model.objective_constant += term.coef * out.fixed_values[term.var];
    else
      out.model.objective.add(out.var_map[term.var], term.coef);
  }
  return out;
}

Solution PresolvedModel::expand(const Solution& reduced) const {
  Solution full;
  full.status = reduced.status;
  full.objective = reduced.objective;
  full.iterations = reduced.iterations;
  full.active_sets = active_sets;
  full.values.assign(var_map.size(), 0.0);
  for (size_t j = 0; j < var_map.size(); ++j)
    full.values[j] = var_map[j] < 0 ? fixed_values[j] : reduced.values[var_map[j]];
  return full;
}

}  // namespace rvpp
