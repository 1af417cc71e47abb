#pragma once

#include <limits>
#include <string>
#include <vector>

namespace rvpp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary };

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lb = 0.0;
  double ub = kInf;
};

struct LinTerm {
  int var = -1;
  double coef = 0.0;
};

// Sparse linear expression. Duplicate var entries are allowed when building;
// they are summed where it matters (solver, MPS writer, verifier).
struct LinExpr {
  std::vector<LinTerm> terms;

  LinExpr& add(int var, double coef) {
    if (coef != 0.0) terms.push_back({var, coef});
    return *this;
  }
};

enum class Sense { le, eq, ge };

struct Constraint {
  std::string name;
  LinExpr expr;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

// Direction of a budget-controlled uncertainty group.
//   production_cut: the group's y tightens a production cap (cap rows carry +y).
//   demand_add:     the group's y adds to a scheduled consumption (equality rows carry -y... +y).
enum class RobustDirection { production_cut, demand_add };

// One unit's constraint-robustness machinery: per-period worst-case binaries
// chi, deviation absorbers y, and the v/eta dual pair. `deviations` holds the
// per-period deviation magnitudes for fixed-band groups; groups whose band
// depends on a profile selection instead carry `profile_vars` plus one
// deviation row per profile, resolved once the selector is fixed.
struct RobustGroup {
  std::string id;
  RobustDirection direction = RobustDirection::production_cut;
  double budget = 0.0;  // integer-valued, in [0, T]
  std::vector<int> chi;
  std::vector<int> y;
  int v = -1;
  std::vector<int> eta;
  std::vector<double> deviations;
  std::vector<int> profile_vars;
  std::vector<std::vector<double>> profile_deviations;
};

struct ModelIR {
  std::string name;
  std::vector<Variable> vars;
  std::vector<Constraint> cons;
  LinExpr objective;  // maximized
  double objective_constant = 0.0;
  std::vector<RobustGroup> robust_groups;

  int add_var(const std::string& name, double lb, double ub,
              VarKind kind = VarKind::continuous) {
    vars.push_back({name, kind, lb, ub});
    return static_cast<int>(vars.size()) - 1;
  }

  int add_con(const std::string& name, LinExpr expr, Sense sense, double rhs) {
    cons.push_back({name, std::move(expr), sense, rhs});
    return static_cast<int>(cons.size()) - 1;
  }

  void fix_var(int var, double value) {
    vars[var].lb = value;
    vars[var].ub = value;
  }
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(SolveStatus status);

struct GroupActiveSet {
  std::string group_id;
  std::vector<int> periods;  // 0-based, sorted ascending
};

struct Solution {
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0.0;
  std::vector<double> values;
  std::vector<GroupActiveSet> active_sets;
  long iterations = 0;
};

double eval_expr(const LinExpr& expr, const std::vector<double>& values);

}  // namespace rvpp
