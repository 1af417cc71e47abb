#include "rvpp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace rvpp {

VerifyReport verify_solution(const ModelIR& model, const Solution& sol,
                             const VerifyOptions& opts) {
  VerifyReport rep;
  auto flag = [&](VerifyViolation::Kind kind, const std::string& name, double amount) {
    rep.violations.push_back({kind, name, amount});
    rep.max_violation = std::max(rep.max_violation, amount);
  };

  for (size_t j = 0; j < model.vars.size(); ++j) {
    const auto& v = model.vars[j];
    const double x = sol.values[j];
    const double scale = std::max(1.0, std::max(std::abs(v.lb) == kInf ? 0.0 : std::abs(v.lb),
                                                std::abs(v.ub) == kInf ? 0.0 : std::abs(v.ub)));
    if (x < v.lb - opts.row_tol * scale)
      flag(VerifyViolation::Kind::bound, v.name, (v.lb - x) / scale);
    if (x > v.ub + opts.row_tol * scale)
      flag(VerifyViolation::Kind::bound, v.name, (x - v.ub) / scale);
    if (v.kind == VarKind::binary && std::abs(x - std::round(x)) > opts.integrality_tol)
      flag(VerifyViolation::Kind::integrality, v.name, std::abs(x - std::round(x)));
  }

  for (const auto& con : model.cons) {
    double lhs = 0.0, scale = 1.0;
    for (const auto& t : con.expr.terms) {
      lhs += t.coef * sol.values[t.var];
      scale = std::max(scale, std::abs(t.coef));
    }
    scale = std::max(scale, std::abs(con.rhs));
    double viol = 0.0;
    switch (con.sense) {
      case Sense::le: viol = lhs - con.rhs; break;
      case Sense::ge: viol = con.rhs - lhs; break;
      case Sense::eq: viol = std::abs(lhs - con.rhs); break;
    }
    if (viol / scale > opts.row_tol)
      flag(VerifyViolation::Kind::row, con.name, viol / scale);
  }

  double obj = model.objective_constant;
  for (const auto& t : model.objective.terms) obj += t.coef * sol.values[t.var];
  rep.recomputed_objective = obj;
  const double drift = std::abs(obj - sol.objective);
  if (drift > opts.objective_rel_tol * std::max(1.0, std::abs(obj)))
    flag(VerifyViolation::Kind::objective, "objective", drift);

  return rep;
}

std::string VerifyReport::to_string() const {
  if (violations.empty()) return "ok";
  std::string s;
  for (const auto& v : violations) {
    const char* kind = v.kind == VerifyViolation::Kind::row           ? "row"
                       : v.kind == VerifyViolation::Kind::bound       ? "bound"
                       : v.kind == VerifyViolation::Kind::integrality ? "integrality"
                                                                      : "objective";
    char buf[64];
    std::snprintf(buf, sizeof(buf), " violated by %.6g", v.amount);
    s += std::string(kind) + " " + v.name + buf + "\n";
  }
  return s;
}

}  // namespace rvpp
