#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "faithful_milp.hpp"
#include "mps_reader.hpp"
#include "protection_oracle.hpp"
#include "rvpp/model_ir.hpp"
#include "rvpp/mps.hpp"
#include "rvpp/presolve.hpp"
#include "rvpp/robust_blocks.hpp"
#include "rvpp/simplex.hpp"
#include "rvpp/solve.hpp"
#include "rvpp/verify.hpp"
#include "tiny_lp_oracle.hpp"

using namespace rvpp;
using rvpp_test::faithful_milp_enumerate;
using rvpp_test::parse_mps;
using rvpp_test::protection_bruteforce;
using rvpp_test::vertex_enumerate_max;

namespace {

// Deterministic cross-platform draws: fixed engine, explicit 53-bit mapping.
struct Rng {
  std::mt19937_64 g;
  explicit Rng(uint64_t seed) : g(seed) {}
  double uniform() { return static_cast<double>(g() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }
};

// Seller protected against production shortfalls: per-period sale x_t capped
// by x_t + y_t <= cap_t, shortfall machinery from the production group.
struct SellerModel {
  ModelIR model;
  std::vector<int> x;
};

SellerModel make_robust_seller(const std::vector<double>& caps,
                               const std::vector<double>& prices,
                               const std::vector<double>& deviations, double budget,
                               double epsilon = 0.0) {
  SellerModel s;
  const int T = static_cast<int>(caps.size());
  for (int t = 0; t < T; ++t)
    s.x.push_back(s.model.add_var("x[" + std::to_string(t) + "]", 0.0, kInf));
  RobustGroupRefs g =
      add_production_robust_group(s.model, "gen", deviations, budget, 0.0, epsilon);
  for (int t = 0; t < T; ++t) {
    s.model.add_con("cap[" + std::to_string(t) + "]",
                    LinExpr{}.add(s.x[t], 1.0).add(g.y[t], 1.0), Sense::le, caps[t]);
    s.model.objective.add(s.x[t], prices[t]);
  }
  return s;
}

}  // namespace

TEST_CASE("simplex: two-variable product mix reaches the known vertex") {
  ModelIR m;
  const int x = m.add_var("x", 0.0, kInf);
  const int y = m.add_var("y", 0.0, kInf);
  m.add_con("r1", LinExpr{}.add(x, 1.0), Sense::le, 4.0);
  m.add_con("r2", LinExpr{}.add(y, 2.0), Sense::le, 12.0);
  m.add_con("r3", LinExpr{}.add(x, 3.0).add(y, 2.0), Sense::le, 18.0);
  m.objective.add(x, 3.0).add(y, 5.0);

  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(s.values[x] == doctest::Approx(2.0));
  CHECK(s.values[y] == doctest::Approx(6.0));
  CHECK(verify_solution(m, s).ok());
}

TEST_CASE("simplex: classic cycling-prone degenerate model terminates at its optimum") {
  ModelIR m;
  const int x1 = m.add_var("x1", 0.0, kInf);
  const int x2 = m.add_var("x2", 0.0, kInf);
  const int x3 = m.add_var("x3", 0.0, kInf);
  const int x4 = m.add_var("x4", 0.0, kInf);
  m.add_con("r1", LinExpr{}.add(x1, 0.25).add(x2, -60.0).add(x3, -0.04).add(x4, 9.0),
            Sense::le, 0.0);
  m.add_con("r2", LinExpr{}.add(x1, 0.5).add(x2, -90.0).add(x3, -0.02).add(x4, 3.0),
            Sense::le, 0.0);
  m.add_con("r3", LinExpr{}.add(x3, 1.0), Sense::le, 1.0);
  m.objective.add(x1, 0.75).add(x2, -150.0).add(x3, 0.02).add(x4, -6.0);

  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(verify_solution(m, s).ok());
}

TEST_CASE("simplex: equality row with a free variable") {
  ModelIR m;
  const int x = m.add_var("x", 0.0, kInf);
  const int y = m.add_var("y", -kInf, kInf);
  m.add_con("sum", LinExpr{}.add(x, 1.0).add(y, 1.0), Sense::eq, 10.0);
  m.add_con("cap", LinExpr{}.add(x, 1.0), Sense::le, 6.0);
  m.objective.add(x, 2.0).add(y, 1.0);

  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(s.values[x] == doctest::Approx(6.0));
  CHECK(s.values[y] == doctest::Approx(4.0));
}

TEST_CASE("simplex: negative variable boxes") {
  ModelIR m;
  const int x = m.add_var("x", -5.0, -2.0);
  const int y = m.add_var("y", 0.0, 3.0);
  m.add_con("link", LinExpr{}.add(x, 1.0).add(y, 1.0), Sense::le, 0.0);
  m.objective.add(y, 1.0).add(x, -1.0);

  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(s.values[x] == doctest::Approx(-5.0));
  CHECK(s.values[y] == doctest::Approx(3.0));
}

TEST_CASE("simplex: unbounded ray is reported") {
  ModelIR m;
  const int x = m.add_var("x", 0.0, kInf);
  const int y = m.add_var("y", 0.0, kInf);
  m.add_con("r", LinExpr{}.add(x, 1.0).add(y, -1.0), Sense::le, 1.0);
  m.objective.add(x, 1.0);
  CHECK(solve_lp(m).status == SolveStatus::unbounded);
}

TEST_CASE("simplex: infeasible rows are reported") {
  ModelIR m;
  const int x = m.add_var("x", 0.0, kInf);
  m.add_con("r", LinExpr{}.add(x, 1.0), Sense::le, -1.0);
  CHECK(solve_lp(m).status == SolveStatus::infeasible);

  ModelIR m2;
  const int a = m2.add_var("a", 0.0, kInf);
  const int b = m2.add_var("b", 0.0, kInf);
  m2.add_con("s1", LinExpr{}.add(a, 1.0).add(b, 1.0), Sense::eq, 2.0);
  m2.add_con("s2", LinExpr{}.add(a, 1.0).add(b, 1.0), Sense::eq, 5.0);
  CHECK(solve_lp(m2).status == SolveStatus::infeasible);
}

TEST_CASE("simplex: duplicated equality keeps a redundant row harmless") {
  ModelIR m;
  const int x = m.add_var("x", 0.0, 2.0);
  const int y = m.add_var("y", 0.0, 2.0);
  m.add_con("s1", LinExpr{}.add(x, 1.0).add(y, 1.0), Sense::eq, 2.0);
  m.add_con("s2", LinExpr{}.add(x, 1.0).add(y, 1.0), Sense::eq, 2.0);
  m.objective.add(x, 1.0);

  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("simplex: objective constant and fixed variables") {
  ModelIR m;
  const int x = m.add_var("x", 0.0, kInf);
  m.fix_var(x, 3.0);
  m.add_con("cap", LinExpr{}.add(x, 1.0), Sense::le, 5.0);
  m.objective.add(x, 1.0);
  m.objective_constant = 4.0;

  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(s.values[x] == 3.0);
}

TEST_CASE("simplex: rowless and empty models") {
  ModelIR boxed;
  const int a = boxed.add_var("a", -1.0, 4.0);
  const int b = boxed.add_var("b", -2.0, 5.0);
  boxed.objective.add(a, 2.0).add(b, -1.0);
  Solution s = solve_lp(boxed);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(10.0).epsilon(1e-12));

  ModelIR empty;
  empty.objective_constant = 1.25;
  Solution e = solve_lp(empty);
  REQUIRE(e.status == SolveStatus::optimal);
  CHECK(e.objective == 1.25);
}

TEST_CASE("simplex: iteration budget exhaustion is reported, not mislabeled") {
  ModelIR m;
  const int x1 = m.add_var("x1", 0.0, kInf);
  const int x2 = m.add_var("x2", 0.0, kInf);
  const int x3 = m.add_var("x3", 0.0, kInf);
  const int x4 = m.add_var("x4", 0.0, kInf);
  m.add_con("r1", LinExpr{}.add(x1, 0.25).add(x2, -60.0).add(x3, -0.04).add(x4, 9.0),
            Sense::le, 0.0);
  m.add_con("r2", LinExpr{}.add(x1, 0.5).add(x2, -90.0).add(x3, -0.02).add(x4, 3.0),
            Sense::le, 0.0);
  m.add_con("r3", LinExpr{}.add(x3, 1.0), Sense::le, 1.0);
  m.objective.add(x1, 0.75).add(x2, -150.0).add(x3, 0.02).add(x4, -6.0);

  SimplexOptions opts;
  opts.max_iterations = 1;
  CHECK(solve_lp(m, opts).status == SolveStatus::iteration_limit);
}

TEST_CASE("simplex agrees with exhaustive vertex enumeration on random boxed models") {
  Rng rng(20260819);
  int feasible_seen = 0, infeasible_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    CAPTURE(trial);
    const int n = rng.uniform_int(2, 4);
    const int m_rows = rng.uniform_int(1, 3);
    ModelIR m;
    for (int j = 0; j < n; ++j) {
      const double lb = rng.uniform() < 0.5 ? 0.0 : -rng.uniform_int(1, 3);
      const double ub = lb + rng.uniform_int(1, 6);
      m.add_var("v" + std::to_string(j), lb, ub);
    }
    for (int i = 0; i < m_rows; ++i) {
      LinExpr e;
      for (int j = 0; j < n; ++j) {
        const int c = rng.uniform_int(-3, 3);
        if (c != 0) e.add(j, c);
      }
      const int sense_pick = rng.uniform_int(0, 2);
      const Sense sense = sense_pick == 0 ? Sense::le : sense_pick == 1 ? Sense::ge : Sense::eq;
      m.add_con("r" + std::to_string(i), std::move(e), sense, rng.uniform_int(-4, 6));
    }
    for (int j = 0; j < n; ++j) m.objective.add(j, rng.uniform_int(-5, 5));

    const auto oracle = vertex_enumerate_max(m);
    const Solution s = solve_lp(m);
    if (oracle.feasible) {
      ++feasible_seen;
      REQUIRE(s.status == SolveStatus::optimal);
      CHECK(std::abs(s.objective - oracle.objective) <=
            1e-6 * std::max(1.0, std::abs(oracle.objective)));
      CHECK(verify_solution(m, s).ok());
    } else {
      ++infeasible_seen;
      CHECK(s.status == SolveStatus::infeasible);
    }
  }
  // the generator must exercise both outcomes for the comparison to mean much
  CHECK(feasible_seen >= 40);
  CHECK(infeasible_seen >= 20);
}

TEST_CASE("price protection machinery prices fixed bids exactly like the brute-force worst case") {
  Rng rng(77001);
  int cases = 0;
  for (int T = 2; T <= 6; ++T) {
    for (double budget = 0.0; budget <= T + 1e-9; budget += 0.5) {
      for (int rep = 0; rep < 5; ++rep) {
        CAPTURE(T);
        CAPTURE(budget);
        CAPTURE(rep);
        std::vector<double> price(T), dev(T), bid(T);
        for (int t = 0; t < T; ++t) {
          price[t] = rng.uniform(5.0, 50.0);
          dev[t] = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 10.0);
          bid[t] = rng.uniform() < 0.15 ? 0.0 : rng.uniform(0.0, 5.0);
        }

        ModelIR m;
        std::vector<int> x(T), y(T), eta(T);
        const int v = m.add_var("v", 0.0, kInf);
        for (int t = 0; t < T; ++t) {
          x[t] = m.add_var("x" + std::to_string(t), bid[t], bid[t]);
          y[t] = m.add_var("y" + std::to_string(t), 0.0, kInf);
          eta[t] = m.add_var("eta" + std::to_string(t), 0.0, kInf);
        }
        for (int t = 0; t < T; ++t) {
          m.add_con("guard" + std::to_string(t),
                    LinExpr{}.add(v, 1.0).add(eta[t], 1.0).add(y[t], -dev[t]),
                    Sense::ge, 0.0);
          m.add_con("link" + std::to_string(t),
                    LinExpr{}.add(y[t], 1.0).add(x[t], -1.0), Sense::ge, 0.0);
          m.objective.add(x[t], price[t]);
          m.objective.add(eta[t], -1.0);
        }
        m.objective.add(v, -budget);

        std::vector<double> exposure(T);
        double median_income = 0.0;
        for (int t = 0; t < T; ++t) {
          exposure[t] = dev[t] * bid[t];
          median_income += price[t] * bid[t];
        }
        const double expected = median_income - protection_bruteforce(exposure, budget);

        Solution s = solve_lp(m);
        REQUIRE(s.status == SolveStatus::optimal);
        CHECK(std::abs(s.objective - expected) <= 1e-7 * std::max(1.0, std::abs(expected)));
        ++cases;
      }
    }
  }
  CHECK(cases >= 200);
}

TEST_CASE("two-period protected seller lands on the frozen optimum") {
  // caps 10 and 8, prices 20 and 30, per-unit worst losses 5 and 10, budget 1
  ModelIR m;
  const int x1 = m.add_var("x1", 0.0, 10.0);
  const int x2 = m.add_var("x2", 0.0, 8.0);
  const int v = m.add_var("v", 0.0, kInf);
  const int e1 = m.add_var("eta1", 0.0, kInf);
  const int e2 = m.add_var("eta2", 0.0, kInf);
  const int y1 = m.add_var("y1", 0.0, kInf);
  const int y2 = m.add_var("y2", 0.0, kInf);
  m.add_con("guard1", LinExpr{}.add(v, 1.0).add(e1, 1.0).add(y1, -5.0), Sense::ge, 0.0);
  m.add_con("guard2", LinExpr{}.add(v, 1.0).add(e2, 1.0).add(y2, -10.0), Sense::ge, 0.0);
  m.add_con("link1", LinExpr{}.add(y1, 1.0).add(x1, -1.0), Sense::ge, 0.0);
  m.add_con("link2", LinExpr{}.add(y2, 1.0).add(x2, -1.0), Sense::ge, 0.0);
  m.objective.add(x1, 20.0).add(x2, 30.0).add(v, -1.0).add(e1, -1.0).add(e2, -1.0);

  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(360.0).epsilon(1e-9));
  CHECK(s.values[x1] == doctest::Approx(10.0));
  CHECK(s.values[x2] == doctest::Approx(8.0));

  // same optimum through the full reference path and through an export/import cycle
  Solution r = solve_reference(m);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(360.0).epsilon(1e-9));

  ModelIR round = parse_mps(export_mps(m));
  Solution rt = solve_lp(round);
  REQUIRE(rt.status == SolveStatus::optimal);
  CHECK(rt.objective == doctest::Approx(360.0).epsilon(1e-9));
}

TEST_CASE("presolve pins the documented worst-case selection for deviations 5,0,3,7 at budget 2") {
  SellerModel s = make_robust_seller({10.0, 10.0, 10.0, 10.0}, {1.0, 1.0, 1.0, 1.0},
                                     {5.0, 0.0, 3.0, 7.0}, 2.0);
  const RobustGroup& g = s.model.robust_groups.front();

  PresolvedModel pre = presolve_fix_robust_binaries(s.model);
  REQUIRE(pre.active_sets.size() == 1);
  CHECK(pre.active_sets[0].group_id == "gen");
  CHECK(pre.active_sets[0].periods == std::vector<int>{0, 3});

  CHECK(pre.fixed_values[g.chi[0]] == 1.0);
  CHECK(pre.fixed_values[g.chi[1]] == 0.0);
  CHECK(pre.fixed_values[g.chi[2]] == 0.0);
  CHECK(pre.fixed_values[g.chi[3]] == 1.0);
  CHECK(pre.fixed_values[g.y[0]] == 5.0);
  CHECK(pre.fixed_values[g.y[1]] == 0.0);
  CHECK(pre.fixed_values[g.y[2]] == 0.0);
  CHECK(pre.fixed_values[g.y[3]] == 7.0);
  CHECK(pre.fixed_values[g.v] == 3.0);
  CHECK(pre.fixed_values[g.eta[0]] == 2.0);
  CHECK(pre.fixed_values[g.eta[3]] == 4.0);

  // only the traded quantities and their caps survive the reduction
  CHECK(pre.model.vars.size() == 4);
  CHECK(pre.model.cons.size() == 4);

  Solution sol = solve_reference(s.model);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.objective == doctest::Approx(28.0).epsilon(1e-9));

  const auto faithful = faithful_milp_enumerate(s.model);
  REQUIRE(faithful.feasible);
  CHECK(faithful.objective == doctest::Approx(28.0).epsilon(1e-9));
  CHECK(faithful.active_sets[0] == std::vector<int>{0, 3});
}

TEST_CASE("presolved production groups match the exhaustive reference on random instances") {
  Rng rng(40444);
  for (int trial = 0; trial < 40; ++trial) {
    CAPTURE(trial);
    const int T = rng.uniform_int(2, 5);
    std::vector<double> caps(T), prices(T), dev(T);
    for (int t = 0; t < T; ++t) {
      caps[t] = rng.uniform(5.0, 15.0);
      prices[t] = rng.uniform(1.0, 10.0);
      dev[t] = rng.uniform(0.5, 4.5) + t * 1e-3;  // pairwise distinct
    }
    const double budget = rng.uniform_int(0, T);
    CAPTURE(budget);

    SellerModel s = make_robust_seller(caps, prices, dev, budget);
    Solution fast = solve_reference(s.model);
    const auto slow = faithful_milp_enumerate(s.model);

    REQUIRE(fast.status == SolveStatus::optimal);
    REQUIRE(slow.feasible);
    CHECK(std::abs(fast.objective - slow.objective) <=
          1e-6 * std::max(1.0, std::abs(slow.objective)));
    REQUIRE(fast.active_sets.size() == 1);
    CHECK(fast.active_sets[0].periods == slow.active_sets[0]);

    // the lifted point satisfies the full machinery model
    const auto report = verify_solution(s.model, fast);
    CAPTURE(report.to_string());
    CHECK(report.ok());
  }
}

TEST_CASE("budgets beyond the positive deviations are infeasible in both solve paths") {
  // separation margin far above solver tolerance: both paths must refuse
  SellerModel wide = make_robust_seller({10.0, 10.0}, {1.0, 1.0}, {3.0, 0.0}, 2.0, 0.5);
  CHECK(solve_reference(wide.model).status == SolveStatus::infeasible);
  CHECK_FALSE(faithful_milp_enumerate(wide.model).feasible);

  // default margin is thinner than LP tolerances, but the reduction evaluates
  // the pinned machinery rows exactly and still refuses
  SellerModel thin = make_robust_seller({10.0, 10.0}, {1.0, 1.0}, {3.0, 0.0}, 2.0);
  CHECK(solve_reference(thin.model).status == SolveStatus::infeasible);
}

TEST_CASE("exactly tied deviations below the budget cut are infeasible in both solve paths") {
  SellerModel wide = make_robust_seller({10.0, 10.0}, {1.0, 1.0}, {4.0, 4.0}, 1.0, 0.5);
  CHECK(solve_reference(wide.model).status == SolveStatus::infeasible);
  CHECK_FALSE(faithful_milp_enumerate(wide.model).feasible);

  SellerModel thin = make_robust_seller({10.0, 10.0}, {1.0, 1.0}, {4.0, 4.0}, 1.0);
  CHECK(solve_reference(thin.model).status == SolveStatus::infeasible);
}

TEST_CASE("zero budget reduces the machinery model to the nominal one") {
  Rng rng(515151);
  const int T = 4;
  std::vector<double> caps(T), prices(T), dev(T);
  for (int t = 0; t < T; ++t) {
    caps[t] = rng.uniform(5.0, 15.0);
    prices[t] = rng.uniform(1.0, 10.0);
    dev[t] = rng.uniform(0.5, 4.5);
  }
  SellerModel s = make_robust_seller(caps, prices, dev, 0.0);
  Solution robust = solve_reference(s.model);

  ModelIR nominal;
  for (int t = 0; t < T; ++t) {
    const int x = nominal.add_var("x" + std::to_string(t), 0.0, kInf);
    nominal.add_con("cap" + std::to_string(t), LinExpr{}.add(x, 1.0), Sense::le, caps[t]);
    nominal.objective.add(x, prices[t]);
  }
  Solution plain = solve_lp(nominal);

  REQUIRE(robust.status == SolveStatus::optimal);
  REQUIRE(plain.status == SolveStatus::optimal);
  CHECK(std::abs(robust.objective - plain.objective) <= 1e-9 * std::max(1.0, std::abs(plain.objective)));
}

TEST_CASE("presolved consumption groups match the exhaustive reference across profile choices") {
  Rng rng(60606);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    const int T = rng.uniform_int(2, 4);
    const int P = 2;
    std::vector<std::vector<double>> median(P, std::vector<double>(T));
    std::vector<std::vector<double>> dev(P, std::vector<double>(T));
    std::vector<double> cost(T), reward(P);
    for (int p = 0; p < P; ++p) {
      reward[p] = rng.uniform(80.0, 120.0);
      for (int t = 0; t < T; ++t) {
        median[p][t] = rng.uniform(5.0, 15.0);
        dev[p][t] = rng.uniform(0.5, 4.5) + (t + 1) * (p + 1) * 1e-3;
      }
    }
    for (int t = 0; t < T; ++t) cost[t] = rng.uniform(1.0, 5.0);
    const double budget = rng.uniform_int(0, T);
    CAPTURE(budget);

    ModelIR m;
    std::vector<int> u(P), load(T);
    for (int p = 0; p < P; ++p)
      u[p] = m.add_var("u" + std::to_string(p), 0.0, 1.0, VarKind::binary);
    LinExpr pick;
    for (int p = 0; p < P; ++p) pick.add(u[p], 1.0);
    m.add_con("pick", std::move(pick), Sense::eq, 1.0);

    RobustGroupRefs g = add_demand_robust_group(m, "load", u, dev, budget);
    for (int t = 0; t < T; ++t) {
      load[t] = m.add_var("p" + std::to_string(t), 0.0, 100.0);
      LinExpr sched = LinExpr{}.add(load[t], 1.0).add(g.y[t], -1.0);
      for (int p = 0; p < P; ++p) sched.add(u[p], -median[p][t]);
      m.add_con("sched" + std::to_string(t), std::move(sched), Sense::eq, 0.0);
      m.objective.add(load[t], -cost[t]);
    }
    for (int p = 0; p < P; ++p) m.objective.add(u[p], reward[p]);

    Solution fast = solve_reference(m);
    const auto slow = faithful_milp_enumerate(m);
    REQUIRE(fast.status == SolveStatus::optimal);
    REQUIRE(slow.feasible);
    CHECK(std::abs(fast.objective - slow.objective) <=
          1e-6 * std::max(1.0, std::abs(slow.objective)));
    REQUIRE(fast.active_sets.size() == 1);
    CHECK(fast.active_sets[0].periods == slow.active_sets[0]);
    CHECK(verify_solution(m, fast).ok());
  }
}

TEST_CASE("profile-dependent groups demand a fixed selector before presolve") {
  ModelIR m;
  std::vector<int> u = {m.add_var("u0", 0.0, 1.0, VarKind::binary),
                        m.add_var("u1", 0.0, 1.0, VarKind::binary)};
  add_demand_robust_group(m, "load", u, {{1.0, 2.0}, {2.0, 1.0}}, 1.0);
  CHECK_THROWS_WITH_AS(presolve_fix_robust_binaries(m),
                       doctest::Contains("must be fixed before presolve"),
                       std::runtime_error);

  m.fix_var(u[0], 0.0);
  m.fix_var(u[1], 0.0);
  CHECK_THROWS_WITH_AS(presolve_fix_robust_binaries(m),
                       doctest::Contains("no profile selected"), std::runtime_error);
}

TEST_CASE("reference solver enumerates exclusive selectors and keeps the best branch") {
  ModelIR m;
  const int u1 = m.add_var("u1", 0.0, 1.0, VarKind::binary);
  const int u2 = m.add_var("u2", 0.0, 1.0, VarKind::binary);
  const int x = m.add_var("x", 0.0, 10.0);
  m.add_con("pick", LinExpr{}.add(u1, 1.0).add(u2, 1.0), Sense::eq, 1.0);
  m.add_con("cap", LinExpr{}.add(x, 1.0).add(u1, -7.0).add(u2, -4.0), Sense::le, 0.0);
  m.objective.add(x, 1.0).add(u2, 2.0);

  Solution s = solve_reference(m);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(s.values[u1] == 1.0);
  CHECK(s.values[u2] == 0.0);
}

TEST_CASE("reference solver rejects stray binaries and oversized enumerations") {
  ModelIR stray;
  const int z = stray.add_var("z", 0.0, 1.0, VarKind::binary);
  const int x = stray.add_var("x", 0.0, 5.0);
  stray.add_con("r", LinExpr{}.add(z, 1.0).add(x, 1.0), Sense::le, 1.0);
  stray.objective.add(x, 1.0);
  CHECK_THROWS_WITH_AS(solve_reference(stray),
                       doctest::Contains("exclusive selector"), std::runtime_error);

  ModelIR wide;
  for (int gidx = 0; gidx < 7; ++gidx) {
    const int a = wide.add_var("a" + std::to_string(gidx), 0.0, 1.0, VarKind::binary);
    const int b = wide.add_var("b" + std::to_string(gidx), 0.0, 1.0, VarKind::binary);
    wide.add_con("pick" + std::to_string(gidx), LinExpr{}.add(a, 1.0).add(b, 1.0),
                 Sense::eq, 1.0);
    wide.objective.add(a, 1.0);
  }
  CHECK_THROWS_WITH_AS(solve_reference(wide), doctest::Contains("cap"), std::runtime_error);

  ReferenceSolveOptions roomy;
  roomy.combination_cap = 200;
  Solution s = solve_reference(wide, roomy);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("machinery builders size their variables, rows, and defaults as documented") {
  CHECK(default_big_m({3.0, 7.0}) == 15.0);
  CHECK(default_epsilon({3.0, 7.0}) == doctest::Approx(7e-6).epsilon(1e-12));
  CHECK(default_epsilon({0.5}) == doctest::Approx(1e-6).epsilon(1e-12));

  ModelIR m;
  RobustGroupRefs g = add_production_robust_group(m, "gen", {1.0, 2.0, 3.0}, 2.0);
  CHECK(m.vars.size() == 10);   // v plus chi/y/eta per period
  CHECK(m.cons.size() == 13);   // three rows per period, budget, cover per period
  CHECK(g.chi.size() == 3);
  REQUIRE(m.robust_groups.size() == 1);
  CHECK(m.robust_groups[0].budget == 2.0);
  CHECK(m.robust_groups[0].deviations == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("fixed-format export is stable byte for byte") {
  ModelIR m;
  m.name = "GOLDEN";
  const int a = m.add_var("a", 0.0, 4.0);
  const int b = m.add_var("b", 0.0, 1.0, VarKind::binary);
  const int c = m.add_var("c", -kInf, kInf);
  m.add_con("r1", LinExpr{}.add(a, 1.0).add(b, 2.0), Sense::le, 5.0);
  m.add_con("r2", LinExpr{}.add(a, 1.0).add(c, 1.0), Sense::eq, 3.0);
  m.add_con("r3", LinExpr{}.add(a, -1.5).add(c, 1.0), Sense::ge, -2.0);
  m.objective.add(a, 3.0).add(b, -1.0).add(c, 0.5);
  m.objective_constant = 2.5;

  const std::string expected =
      "* Minimization form: objective coefficients are the negated\n"
      "* maximize-form coefficients; an external minimum equals the\n"
      "* negated maximum of the source model. The OBJ row RHS entry\n"
      "* carries the maximize-form objective constant.\n"
      "* Columns X1..Xn follow source declaration order; rows are R1..Rm.\n"
      "NAME          GOLDEN\n"
      "ROWS\n"
      " N  OBJ\n"
      " L  R1\n"
      " E  R2\n"
      " G  R3\n"
      "COLUMNS\n"
      "    X1        OBJ       -3             R1        1\n"
      "    X1        R2        1              R3        -1.5\n"
      "    M1        'MARKER'                 'INTORG'\n"
      "    X2        OBJ       1              R1        2\n"
      "    M2        'MARKER'                 'INTEND'\n"
      "    X3        OBJ       -0.5           R2        1\n"
      "    X3        R3        1\n"
      "RHS\n"
      "    RHS       OBJ       2.5\n"
      "    RHS       R1        5\n"
      "    RHS       R2        3\n"
      "    RHS       R3        -2\n"
      "BOUNDS\n"
      " UP BND       X1        4\n"
      " BV BND       X2\n"
      " FR BND       X3\n"
      "ENDATA\n";
  CHECK(export_mps(m) == expected);
}

TEST_CASE("export/import round trip preserves structure on a machinery model") {
  SellerModel s = make_robust_seller({10.0, 12.0}, {2.0, 3.0}, {1.0, 4.0}, 1.0);
  s.model.objective_constant = -7.25;
  s.model.vars[s.x[0]].lb = -2.0;  // exercise LO emission
  ModelIR back = parse_mps(export_mps(s.model));

  REQUIRE(back.vars.size() == s.model.vars.size());
  for (size_t j = 0; j < back.vars.size(); ++j) {
    CAPTURE(j);
    CHECK(back.vars[j].kind == s.model.vars[j].kind);
    CHECK(back.vars[j].lb == s.model.vars[j].lb);
    CHECK(back.vars[j].ub == s.model.vars[j].ub);
  }
  REQUIRE(back.cons.size() == s.model.cons.size());
  for (size_t i = 0; i < back.cons.size(); ++i) {
    CAPTURE(i);
    CHECK(back.cons[i].sense == s.model.cons[i].sense);
    CHECK(back.cons[i].rhs == s.model.cons[i].rhs);
    std::vector<double> ours(back.vars.size(), 0.0), theirs(back.vars.size(), 0.0);
    for (const auto& t : s.model.cons[i].expr.terms) ours[t.var] += t.coef;
    for (const auto& t : back.cons[i].expr.terms) theirs[t.var] += t.coef;
    CHECK(ours == theirs);
  }
  std::vector<double> obj_a(back.vars.size(), 0.0), obj_b(back.vars.size(), 0.0);
  for (const auto& t : s.model.objective.terms) obj_a[t.var] += t.coef;
  for (const auto& t : back.objective.terms) obj_b[t.var] += t.coef;
  CHECK(obj_a == obj_b);
  CHECK(back.objective_constant == s.model.objective_constant);
}

TEST_CASE("verifier flags row, bound, integrality, and objective drift") {
  ModelIR m;
  const int x = m.add_var("x", 0.0, 4.0);
  const int y = m.add_var("y", 0.0, kInf);
  m.add_con("r3", LinExpr{}.add(x, 3.0).add(y, 2.0), Sense::le, 18.0);
  m.objective.add(x, 3.0).add(y, 5.0);

  Solution good;
  good.status = SolveStatus::optimal;
  good.values = {2.0, 6.0};
  good.objective = 36.0;
  CHECK(verify_solution(m, good).ok());

  Solution drift = good;
  drift.values[0] = 2.1;
  const auto r1 = verify_solution(m, drift);
  CHECK_FALSE(r1.ok());
  bool saw_row = false, saw_obj = false;
  for (const auto& vio : r1.violations) {
    if (vio.kind == VerifyViolation::Kind::row) saw_row = true;
    if (vio.kind == VerifyViolation::Kind::objective) saw_obj = true;
  }
  CHECK(saw_row);
  CHECK(saw_obj);

  Solution oob = good;
  oob.values[0] = -0.5;
  bool saw_bound = false;
  for (const auto& vio : verify_solution(m, oob).violations)
    if (vio.kind == VerifyViolation::Kind::bound) saw_bound = true;
  CHECK(saw_bound);

  ModelIR mb;
  mb.add_var("z", 0.0, 1.0, VarKind::binary);
  Solution half;
  half.status = SolveStatus::optimal;
  half.values = {0.5};
  half.objective = 0.0;
  bool saw_int = false;
  for (const auto& vio : verify_solution(mb, half).violations)
    if (vio.kind == VerifyViolation::Kind::integrality) saw_int = true;
  CHECK(saw_int);
}

TEST_CASE("identical inputs reproduce bit-identical solutions") {
  auto build = [] {
    Rng rng(909090);
    const int T = 6;
    std::vector<double> caps(T), prices(T), dev(T);
    for (int t = 0; t < T; ++t) {
      caps[t] = rng.uniform(5.0, 15.0);
      prices[t] = rng.uniform(1.0, 10.0);
      dev[t] = rng.uniform(0.5, 4.5) + t * 1e-3;
    }
    return make_robust_seller(caps, prices, dev, 3.0);
  };
  SellerModel a = build();
  SellerModel b = build();
  Solution sa = solve_reference(a.model);
  Solution sb = solve_reference(b.model);
  REQUIRE(sa.status == SolveStatus::optimal);
  REQUIRE(sb.status == SolveStatus::optimal);
  CHECK(sa.objective == sb.objective);
  CHECK(sa.iterations == sb.iterations);
  REQUIRE(sa.values.size() == sb.values.size());
  for (size_t j = 0; j < sa.values.size(); ++j) CHECK(sa.values[j] == sb.values[j]);
}
