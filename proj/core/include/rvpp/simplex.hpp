#pragma once

#include "rvpp/model_ir.hpp"

namespace rvpp {

struct SimplexOptions {
  long max_iterations = 200000;
  double feas_tol = 1e-6;
  double pivot_tol = 1e-9;
  int refactor_every = 64;
  int stall_limit = 60;  // degenerate steps before switching to Bland's rule
};

// Bounded-variable primal simplex over the LP relaxation of `model` (binaries
// are treated by their bounds; fix them beforehand for MILP enumeration).
// Maximizes. Deterministic: identical input yields an identical Solution.
// On infeasible models `values` holds the least-infeasible phase-1 point so
// callers can diagnose which rows cannot be met.
Solution solve_lp(const ModelIR& model, const SimplexOptions& opts = {});

}  // namespace rvpp
