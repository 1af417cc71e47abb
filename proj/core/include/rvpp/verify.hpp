#pragma once

#include <string>
#include <vector>

#include "rvpp/model_ir.hpp"

namespace rvpp {

struct VerifyOptions {
  double row_tol = 1e-6;        // absolute, on rows normalized by coefficient scale
  double integrality_tol = 1e-9;
  double objective_rel_tol = 1e-6;
};

struct VerifyViolation {
  enum class Kind { row, bound, integrality, objective };
  Kind kind;
  std::string name;
  double amount = 0.0;  // normalized violation magnitude
};

struct VerifyReport {
  std::vector<VerifyViolation> violations;
  double max_violation = 0.0;
  double recomputed_objective = 0.0;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Independent feasibility/objective check of a claimed solution.
VerifyReport verify_solution(const ModelIR& model, const Solution& sol,
                             const VerifyOptions& opts = {});

}  // namespace rvpp
