#include "rvpp/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <map>
#include <vector>

namespace rvpp {
namespace {

enum class ColState : unsigned char { basic, at_lb, at_ub, free_zero };

struct Tableau {
  int m = 0;        // rows
  int n_struct = 0; // structural columns
  int n_real = 0;   // structural + slack
  int n_total = 0;  // + artificials

  // column-major sparse matrix, including slack and artificial columns
  std::vector<int> col_start;
  std::vector<int> row_idx;
  std::vector<double> val;

  std::vector<double> lb, ub, cost, rhs;
  std::vector<ColState> state;
  std::vector<int> basis;       // basis[k] = column occupying row position k
  std::vector<double> xb;       // values of basic columns
  std::vector<double> binv;     // dense m*m, row-major
  std::vector<double> nb_value; // cached value of nonbasic columns

  double col_value(int j) const {
    return state[j] == ColState::basic ? 0.0 : nb_value[j];
  }
};

double bound_rest_value(const Tableau& t, int j) {
  // nonbasic resting point: finite bound nearest zero, else zero for free cols
  double l = t.lb[j], u = t.ub[j];
  if (std::isfinite(l) && std::isfinite(u)) return std::abs(l) <= std::abs(u) ? l : u;
  if (std::isfinite(l)) return l;
  if (std::isfinite(u)) return u;
  return 0.0;
}

ColState bound_rest_state(const Tableau& t, int j) {
  double l = t.lb[j], u = t.ub[j];
  if (std::isfinite(l) && std::isfinite(u)) return std::abs(l) <= std::abs(u) ? ColState::at_lb : ColState::at_ub;
  if (std::isfinite(l)) return ColState::at_lb;
  if (std::isfinite(u)) return ColState::at_ub;
  return ColState::free_zero;
}

// w = Binv * A_col
void ftran(const Tableau& t, int col, std::vector<double>& w) {
  std::fill(w.begin(), w.end(), 0.0);
  for (int p = t.col_start[col]; p < t.col_start[col + 1]; ++p) {
    const int i = t.row_idx[p];
    const double a = t.val[p];
    const double* binv_col = t.binv.data() + i;
    for (int k = 0; k < t.m; ++k) w[k] += a * binv_col[static_cast<size_t>(k) * t.m];
  }
}

// y = Binv^T * c_B
void compute_duals(const Tableau& t, std::vector<double>& y) {
  std::fill(y.begin(), y.end(), 0.0);
  for (int k = 0; k < t.m; ++k) {
    const double ck = t.cost[t.basis[k]];
    if (ck == 0.0) continue;
    const double* row = t.binv.data() + static_cast<size_t>(k) * t.m;
    for (int i = 0; i < t.m; ++i) y[i] += ck * row[i];
  }
}

double reduced_cost(const Tableau& t, int j, const std::vector<double>& y) {
  double d = t.cost[j];
  for (int p = t.col_start[j]; p < t.col_start[j + 1]; ++p)
    d -= y[t.row_idx[p]] * t.val[p];
  return d;
}

// Rebuild Binv from scratch (Gauss-Jordan, partial pivoting) and recompute xb.
bool refactorize(Tableau& t) {
  const int m = t.m;
  if (m == 0) return true;
  std::vector<double> a(static_cast<size_t>(m) * 2 * m, 0.0);  // [B | I]
  for (int k = 0; k < m; ++k) {
    const int j = t.basis[k];
    for (int p = t.col_start[j]; p < t.col_start[j + 1]; ++p)
      a[static_cast<size_t>(t.row_idx[p]) * 2 * m + k] = t.val[p];
    a[static_cast<size_t>(k) * 2 * m + m + k] = 1.0;
  }
  for (int c = 0; c < m; ++c) {
    int piv = -1;
    double best = 0.0;
    for (int r = c; r < m; ++r) {
      const double v = std::abs(a[static_cast<size_t>(r) * 2 * m + c]);
      if (v > best) { best = v; piv = r; }
    }
    if (piv < 0 || best < 1e-12) return false;
    if (piv != c)
      for (int q = 0; q < 2 * m; ++q)
        std::swap(a[static_cast<size_t>(piv) * 2 * m + q], a[static_cast<size_t>(c) * 2 * m + q]);
    const double d = a[static_cast<size_t>(c) * 2 * m + c];
    for (int q = 0; q < 2 * m; ++q) a[static_cast<size_t>(c) * 2 * m + q] /= d;
    for (int r = 0; r < m; ++r) {
      if (r == c) continue;
      const double f = a[static_cast<size_t>(r) * 2 * m + c];
      if (f == 0.0) continue;
      for (int q = 0; q < 2 * m; ++q)
        a[static_cast<size_t>(r) * 2 * m + q] -= f * a[static_cast<size_t>(c) * 2 * m + q];
    }
  }
  // rows of [I | Binv] now hold Binv in permuted row order matching basis order
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      t.binv[static_cast<size_t>(k) * m + i] = a[static_cast<size_t>(k) * 2 * m + m + i];

  // xb = Binv * (rhs - N * x_N)
  std::vector<double> resid = t.rhs;
  for (int j = 0; j < t.n_total; ++j) {
    if (t.state[j] == ColState::basic) continue;
    const double v = t.nb_value[j];
    if (v == 0.0) continue;
    for (int p = t.col_start[j]; p < t.col_start[j + 1]; ++p)
      resid[t.row_idx[p]] -= t.val[p] * v;
  }
  for (int k = 0; k < m; ++k) {
    double s = 0.0;
    const double* row = t.binv.data() + static_cast<size_t>(k) * m;
    for (int i = 0; i < m; ++i) s += row[i] * resid[i];
    t.xb[k] = s;
  }
  return true;
}

struct PhaseResult {
  bool hit_iteration_limit = false;
  bool unbounded = false;
  long iterations = 0;
};

// Minimizes t.cost over the current tableau. Core bounded-variable iteration.
PhaseResult run_phase(Tableau& t, const SimplexOptions& opts, long iter_budget) {
  PhaseResult res;
  const int m = t.m;
  std::vector<double> y(m), w(m);
  bool bland = false;
  int stall = 0;
  int since_refactor = 0;

  for (;;) {
    if (res.iterations >= iter_budget) {
      res.hit_iteration_limit = true;
      return res;
    }
    compute_duals(t, y);

    // entering column
    int q = -1, sigma = 0;
    double best_viol = opts.pivot_tol;
    for (int j = 0; j < t.n_total; ++j) {
      const ColState st = t.state[j];
      if (st == ColState::basic) continue;
      if (t.ub[j] - t.lb[j] <= 0.0 && st != ColState::free_zero) continue;  // fixed
      const double d = reduced_cost(t, j, y);
      double viol = 0.0;
      int dir = 0;
      if (st == ColState::at_lb) {
        if (d < -opts.pivot_tol) { viol = -d; dir = +1; }
      } else if (st == ColState::at_ub) {
        if (d > opts.pivot_tol) { viol = d; dir = -1; }
      } else {  // free at zero
        if (d < -opts.pivot_tol) { viol = -d; dir = +1; }
        else if (d > opts.pivot_tol) { viol = d; dir = -1; }
      }
      if (dir == 0) continue;
      if (bland) { q = j; sigma = dir; break; }
      if (viol > best_viol) { best_viol = viol; q = j; sigma = dir; }
    }
    if (q < 0) return res;  // optimal for this phase

    ftran(t, q, w);

    // ratio test: entering moves by step >= 0 in direction sigma
    double step = kInf;
    int leave = -1;       // basis position
    int leave_to = 0;     // -1 lower, +1 upper
    const double vq = t.nb_value[q];
    if (std::isfinite(t.ub[q]) && std::isfinite(t.lb[q]))
      step = t.ub[q] - t.lb[q];  // bound flip
    double best_piv = 0.0;
    for (int k = 0; k < m; ++k) {
      const double rate = -sigma * w[k];  // d x_B[k] / d step
      if (std::abs(rate) <= opts.pivot_tol) continue;
      double limit, to;
      if (rate < 0.0) {
        if (!std::isfinite(t.lb[t.basis[k]])) continue;
        limit = (t.xb[k] - t.lb[t.basis[k]]) / (-rate);
        to = -1;
      } else {
        if (!std::isfinite(t.ub[t.basis[k]])) continue;
        limit = (t.ub[t.basis[k]] - t.xb[k]) / rate;
        to = +1;
      }
      if (limit < -1e-9) limit = 0.0;  // drifted bound treated as touching
      if (limit < 0.0) limit = 0.0;
      const bool better =
          limit < step - 1e-12 ||
          (limit < step + 1e-12 && leave >= 0 &&
           (bland ? t.basis[k] < t.basis[leave] : std::abs(w[k]) > best_piv));
      if (leave < 0 && limit < step - 1e-12) {
        step = limit; leave = k; leave_to = static_cast<int>(to); best_piv = std::abs(w[k]);
      } else if (better) {
        step = std::min(step, limit); leave = k; leave_to = static_cast<int>(to); best_piv = std::abs(w[k]);
      }
    }

    if (!std::isfinite(step)) {
      res.unbounded = true;
      return res;
    }

    ++res.iterations;
    if (step <= opts.feas_tol * 1e-3) {
      if (++stall >= opts.stall_limit) bland = true;
    } else {
      stall = 0;
      bland = false;
    }

    if (leave < 0) {
      // bound flip, no basis change
      for (int k = 0; k < m; ++k) t.xb[k] -= sigma * step * w[k];
      t.state[q] = (t.state[q] == ColState::at_lb) ? ColState::at_ub : ColState::at_lb;
      t.nb_value[q] = (t.state[q] == ColState::at_lb) ? t.lb[q] : t.ub[q];
      continue;
    }

    // pivot: q enters at basis position `leave`
    for (int k = 0; k < m; ++k) t.xb[k] -= sigma * step * w[k];
    const int out = t.basis[leave];
    t.state[out] = leave_to < 0 ? ColState::at_lb : ColState::at_ub;
    t.nb_value[out] = leave_to < 0 ? t.lb[out] : t.ub[out];
    t.basis[leave] = q;
    t.xb[leave] = vq + sigma * step;
    t.state[q] = ColState::basic;
    t.nb_value[q] = 0.0;

    const double piv = w[leave];
    double* prow = t.binv.data() + static_cast<size_t>(leave) * m;
    for (int i = 0; i < m; ++i) prow[i] /= piv;
    for (int k = 0; k < m; ++k) {
      if (k == leave) continue;
      const double f = w[k];
      if (f == 0.0) continue;
      double* row = t.binv.data() + static_cast<size_t>(k) * m;
      for (int i = 0; i < m; ++i) row[i] -= f * prow[i];
    }

    if (++since_refactor >= opts.refactor_every) {
      since_refactor = 0;
      refactorize(t);
    }
  }
}

}  // namespace

Solution solve_lp(const ModelIR& model, const SimplexOptions& opts) {
  Solution sol;
  const int n = static_cast<int>(model.vars.size());
  const int m = static_cast<int>(model.cons.size());

  Tableau t;
  t.m = m;
  t.n_struct = n;
  t.n_real = n + m;
  t.n_total = n + 2 * m;

  // consolidate duplicate terms per (row, var)
  std::vector<std::map<int, double>> by_col(n);
  for (int i = 0; i < m; ++i)
    for (const auto& term : model.cons[i].expr.terms)
      if (term.coef != 0.0) by_col[term.var][i] += term.coef;

  t.col_start.assign(t.n_total + 1, 0);
  for (int j = 0; j < n; ++j) t.col_start[j + 1] = t.col_start[j] + static_cast<int>(by_col[j].size());
  for (int i = 0; i < m; ++i) t.col_start[n + i + 1] = t.col_start[n + i] + 1;          // slack
  for (int i = 0; i < m; ++i) t.col_start[n + m + i + 1] = t.col_start[n + m + i] + 1;  // artificial
  t.row_idx.resize(t.col_start[t.n_total]);
  t.val.resize(t.col_start[t.n_total]);
  for (int j = 0; j < n; ++j) {
    int p = t.col_start[j];
    for (const auto& [row, coef] : by_col[j]) {
      t.row_idx[p] = row;
      t.val[p] = coef;
      ++p;
    }
  }

  t.lb.assign(t.n_total, 0.0);
  t.ub.assign(t.n_total, 0.0);
  t.cost.assign(t.n_total, 0.0);
  t.rhs.resize(m);
  for (int j = 0; j < n; ++j) {
    t.lb[j] = model.vars[j].lb;
    t.ub[j] = model.vars[j].ub;
  }
  for (int i = 0; i < m; ++i) {
    t.rhs[i] = model.cons[i].rhs;
    const int sj = n + i;
    t.row_idx[t.col_start[sj]] = i;
    t.val[t.col_start[sj]] = 1.0;
    switch (model.cons[i].sense) {
      case Sense::le: t.lb[sj] = 0.0;   t.ub[sj] = kInf; break;
      case Sense::eq: t.lb[sj] = 0.0;   t.ub[sj] = 0.0;  break;
      case Sense::ge: t.lb[sj] = -kInf; t.ub[sj] = 0.0;  break;
    }
  }

  // nonbasic rest points for real columns, residual for artificial signs
  t.state.assign(t.n_total, ColState::at_lb);
  t.nb_value.assign(t.n_total, 0.0);
  for (int j = 0; j < t.n_real; ++j) {
    t.state[j] = bound_rest_state(t, j);
    t.nb_value[j] = bound_rest_value(t, j);
  }
  std::vector<double> resid = t.rhs;
  for (int j = 0; j < t.n_real; ++j) {
    const double v = t.nb_value[j];
    if (v == 0.0) continue;
    for (int p = t.col_start[j]; p < t.col_start[j + 1]; ++p)
      resid[t.row_idx[p]] -= t.val[p] * v;
  }
  // crash basis: the slack absorbs the residual where its bounds allow (its
  // artificial is then fixed at zero); otherwise the artificial starts basic
  t.basis.resize(m);
  t.xb.resize(m);
  t.binv.assign(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    const int sj = n + i;
    const int aj = n + m + i;
    const double sign = resid[i] >= 0.0 ? 1.0 : -1.0;
    t.row_idx[t.col_start[aj]] = i;
    t.val[t.col_start[aj]] = sign;
    t.lb[aj] = 0.0;
    if (resid[i] >= t.lb[sj] && resid[i] <= t.ub[sj]) {
      t.ub[aj] = 0.0;
      t.nb_value[aj] = 0.0;
      t.basis[i] = sj;
      t.xb[i] = resid[i];
      t.state[sj] = ColState::basic;
      t.nb_value[sj] = 0.0;
      t.binv[static_cast<size_t>(i) * m + i] = 1.0;
    } else {
      t.ub[aj] = kInf;
      t.basis[i] = aj;
      t.xb[i] = std::abs(resid[i]);
      t.state[aj] = ColState::basic;
      t.binv[static_cast<size_t>(i) * m + i] = sign;
    }
  }

  // phase 1: minimize sum of artificials
  for (int i = 0; i < m; ++i) t.cost[n + m + i] = 1.0;
  PhaseResult p1 = run_phase(t, opts, opts.max_iterations);
  sol.iterations = p1.iterations;

  auto extract_values = [&]() {
    sol.values.assign(n, 0.0);
    for (int j = 0; j < n; ++j) sol.values[j] = t.col_value(j);
    for (int k = 0; k < m; ++k)
      if (t.basis[k] < n) sol.values[t.basis[k]] = t.xb[k];
  };

  if (p1.hit_iteration_limit) {
    extract_values();
    sol.status = SolveStatus::iteration_limit;
    return sol;
  }

  double max_art = 0.0;
  for (int k = 0; k < m; ++k)
    if (t.basis[k] >= t.n_real) max_art = std::max(max_art, t.xb[k]);
  double rhs_scale = 1.0;
  for (int i = 0; i < m; ++i) rhs_scale = std::max(rhs_scale, std::abs(t.rhs[i]));
  if (max_art > opts.feas_tol * rhs_scale) {
    extract_values();
    sol.status = SolveStatus::infeasible;
    return sol;
  }

  // pin artificials at zero; pivot basic ones onto a real column where possible
  for (int i = 0; i < m; ++i) {
    t.ub[n + m + i] = 0.0;
    if (t.state[n + m + i] != ColState::basic) {
      t.state[n + m + i] = ColState::at_lb;
      t.nb_value[n + m + i] = 0.0;
    }
  }
  std::vector<double> w(m);
  for (int k = 0; k < m; ++k) {
    if (t.basis[k] < t.n_real) continue;
    int enter = -1;
    for (int j = 0; j < t.n_real && enter < 0; ++j) {
      if (t.state[j] == ColState::basic) continue;
      double elem = 0.0;
      const double* row = t.binv.data() + static_cast<size_t>(k) * m;
      for (int p = t.col_start[j]; p < t.col_start[j + 1]; ++p)
        elem += row[t.row_idx[p]] * t.val[p];
      if (std::abs(elem) > 1e-7) enter = j;
    }
    if (enter < 0) continue;  // redundant row; artificial stays basic at zero
    ftran(t, enter, w);
    const int out = t.basis[k];
    t.state[out] = ColState::at_lb;
    t.nb_value[out] = 0.0;
    t.basis[k] = enter;
    t.xb[k] = t.nb_value[enter];
    t.state[enter] = ColState::basic;
    t.nb_value[enter] = 0.0;
    const double piv = w[k];
    double* prow = t.binv.data() + static_cast<size_t>(k) * m;
    for (int i = 0; i < m; ++i) prow[i] /= piv;
    for (int r = 0; r < m; ++r) {
      if (r == k) continue;
      const double f = w[r];
      if (f == 0.0) continue;
      double* rrow = t.binv.data() + static_cast<size_t>(r) * m;
      for (int i = 0; i < m; ++i) rrow[i] -= f * prow[i];
    }
    refactorize(t);
  }

  // phase 2: minimize negated objective
  std::fill(t.cost.begin(), t.cost.end(), 0.0);
  for (const auto& term : model.objective.terms) t.cost[term.var] -= term.coef;
  refactorize(t);
  PhaseResult p2 = run_phase(t, opts, opts.max_iterations - sol.iterations);
  sol.iterations += p2.iterations;

  extract_values();
  if (p2.hit_iteration_limit) {
    sol.status = SolveStatus::iteration_limit;
    return sol;
  }
  if (p2.unbounded) {
    sol.status = SolveStatus::unbounded;
    return sol;
  }
  sol.status = SolveStatus::optimal;
  double obj = model.objective_constant;
  std::vector<double> acc(n, 0.0);
  for (const auto& term : model.objective.terms) acc[term.var] += term.coef;
  for (int j = 0; j < n; ++j) obj += acc[j] * sol.values[j];
  sol.objective = obj;
  return sol;
}

}  // namespace rvpp
