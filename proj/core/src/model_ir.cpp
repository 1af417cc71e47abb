#include "rvpp/model_ir.hpp"

namespace rvpp {

double eval_expr(const LinExpr& expr, const std::vector<double>& values) {
  double s = 0.0;
  for (const auto& t : expr.terms) s += t.coef * values[t.var];
  return s;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

}  // namespace rvpp
