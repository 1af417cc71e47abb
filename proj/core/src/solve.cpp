#include "rvpp/solve.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace rvpp {
namespace {

// Exclusive selector groups: equality rows "sum of binaries = 1" with unit
// coefficients. Every free binary outside the robust groups must belong to
// exactly one such row for enumeration to apply.
std::vector<std::vector<int>> selector_groups(const ModelIR& model) {
  std::vector<bool> is_group_chi(model.vars.size(), false);
  for (const auto& g : model.robust_groups)
    for (int v : g.chi) is_group_chi[v] = true;

  std::vector<bool> free_binary(model.vars.size(), false);
  for (size_t j = 0; j < model.vars.size(); ++j)
    free_binary[j] = model.vars[j].kind == VarKind::binary &&
                     model.vars[j].lb < model.vars[j].ub && !is_group_chi[j];

  std::vector<std::vector<int>> groups;
  std::vector<bool> covered(model.vars.size(), false);
  for (const auto& con : model.cons) {
    if (con.sense != Sense::eq || con.rhs != 1.0) continue;
    bool all_unit_binary = !con.expr.terms.empty();
    for (const auto& t : con.expr.terms)
      if (t.coef != 1.0 || !free_binary[t.var]) { all_unit_binary = false; break; }
    if (!all_unit_binary) continue;
    std::vector<int> g;
    bool fresh = true;
    for (const auto& t : con.expr.terms) {
      if (covered[t.var]) fresh = false;
      g.push_back(t.var);
    }
    if (!fresh) continue;
    for (int v : g) covered[v] = true;
    groups.push_back(std::move(g));
  }
  for (size_t j = 0; j < model.vars.size(); ++j)
    if (free_binary[j] && !covered[j])
      throw std::runtime_error("free binary '" + model.vars[j].name +
                               "' is not part of an exclusive selector row; "
                               "cannot enumerate");
  return groups;
}

}  // namespace

Solution solve_reference(const ModelIR& model, const ReferenceSolveOptions& opts) {
  const auto groups = selector_groups(model);

  long combos = 1;
  for (const auto& g : groups) {
    combos *= static_cast<long>(g.size());
    if (combos > opts.combination_cap)
      throw std::runtime_error("selector combinations exceed cap of " +
                               std::to_string(opts.combination_cap));
  }

  ModelIR work = model;
  std::vector<size_t> choice(groups.size(), 0);
  Solution best;
  bool have_best = false;
  bool any_unbounded = false;
  bool any_iteration_limit = false;
  Solution last_infeasible;
  long total_iterations = 0;

  for (long c = 0; c < combos; ++c) {
    long rem = c;
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      choice[gi] = rem % groups[gi].size();
      rem /= groups[gi].size();
      for (size_t p = 0; p < groups[gi].size(); ++p)
        work.fix_var(groups[gi][p], p == choice[gi] ? 1.0 : 0.0);
    }
    PresolvedModel pre = presolve_fix_robust_binaries(work);
    Solution reduced = solve_lp(pre.model, opts.simplex);
    total_iterations += reduced.iterations;
    Solution full = pre.expand(reduced);
    if (full.status == SolveStatus::optimal) {
      if (!have_best || full.objective > best.objective) {
        best = full;
        have_best = true;
      }
    } else if (full.status == SolveStatus::unbounded) {
      any_unbounded = true;
    } else if (full.status == SolveStatus::iteration_limit) {
      any_iteration_limit = true;
    } else {
      last_infeasible = full;
    }
  }

  Solution out;
  if (have_best)
    out = best;
  else if (any_unbounded)
    out.status = SolveStatus::unbounded;
  else if (any_iteration_limit)
    out.status = SolveStatus::iteration_limit;
  else {
    out = last_infeasible;
    out.status = SolveStatus::infeasible;
  }
  out.iterations = total_iterations;
  return out;
}

}  // namespace rvpp
