#pragma once

#include <vector>

#include "rvpp/model_ir.hpp"

namespace rvpp {

// Structural presolve of budget-controlled uncertainty groups. In every
// optimal solution of the faithful MILP the worst-case binaries select the
// `budget` periods of largest deviation (ties broken toward the lower period
// index), the absorbers y equal the deviation on those periods and zero
// elsewhere, and the v/eta pair follows. The machinery variables and rows are
// therefore removed up front and the fixed y values substituted into the
// remaining rows, leaving a model with no group binaries.
//
// Groups whose deviations depend on a profile selector require the selector
// fixed (lb == ub) beforehand; otherwise a std::runtime_error is thrown.
struct PresolvedModel {
  ModelIR model;                     // reduced model
  std::vector<int> var_map;          // original var -> reduced var, -1 if removed
  std::vector<double> fixed_values;  // original-indexed values of removed vars
  std::vector<GroupActiveSet> active_sets;

  // Lift a solution of the reduced model back to the original variable space.
  Solution expand(const Solution& reduced) const;
};

PresolvedModel presolve_fix_robust_binaries(const ModelIR& model);

}  // namespace rvpp
