#pragma once

#include "rvpp/model_ir.hpp"
#include "rvpp/presolve.hpp"
#include "rvpp/simplex.hpp"

namespace rvpp {

struct ReferenceSolveOptions {
  SimplexOptions simplex;
  int combination_cap = 64;  // max enumerated selector combinations
};

// Built-in solve path: enumerates exclusive binary selectors (profile rows
// "sum u = 1"), fixes each combination, presolves the robust groups, and
// solves the remaining LP. Returns the best combination's solution expanded
// to the original variable space (selector values, chi/y/v/eta fixings and
// per-group active sets included). Throws std::runtime_error when free
// binaries cannot be enumerated this way or the combination count exceeds
// the cap. Deterministic: ties keep the earliest combination.
Solution solve_reference(const ModelIR& model, const ReferenceSolveOptions& opts = {});

}  // namespace rvpp
