#include <doctest.h>

#include "support/fixtures.hpp"
#include "trirobust/oracle.hpp"

using namespace trirobust;
using namespace testsupport;

namespace {

Polytope box2d() {
  // unit box in 2D: xi <= 1 per coordinate (nonnegativity is implicit)
  std::vector<Triplet> ts = {{0, 0, 1.0}, {1, 1, 1.0}};
  return Polytope{SparseMatrix::from_triplets(2, 2, std::move(ts)), {1.0, 1.0}};
}

}  // namespace

TEST_CASE("unit box has four vertices") {
  auto v = oracle::enumerate_polytope_vertices(box2d());
  std::vector<std::vector<double>> expected = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  REQUIRE(v.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) CHECK(v[i][j] == doctest::Approx(expected[i][j]).epsilon(1e-12));
}

TEST_CASE("demo polygon vertices match the derived sets exactly") {
  CompactInstance inst = two_zone_demo_instance();
  SUBCASE("decision-dependent polygon") {
    Polytope p = realize_ddu_polytope(inst, 0, two_zone_demo_counts());
    auto v = oracle::enumerate_polytope_vertices(p);
    auto expected = two_zone_ddu_vertices();
    REQUIRE(v.size() == expected.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (int j = 0; j < 2; ++j) CHECK(std::fabs(v[i][j] - expected[i][j]) <= 1e-9);
  }
  SUBCASE("decision-independent polygon") {
    CompactInstance diu = strip_decision_dependence(inst);
    Polytope p = realize_ddu_polytope(diu, 0, two_zone_demo_counts());
    auto v = oracle::enumerate_polytope_vertices(p);
    auto expected = two_zone_diu_vertices();
    REQUIRE(v.size() == expected.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (int j = 0; j < 2; ++j) CHECK(std::fabs(v[i][j] - expected[i][j]) <= 1e-9);
  }
}

TEST_CASE("empty polytope yields an empty vertex list") {
  std::vector<Triplet> ts = {{0, 0, 1.0}, {1, 0, -1.0}};
  Polytope p{SparseMatrix::from_triplets(2, 1, std::move(ts)), {1.0, -2.0}};  // xi<=1, xi>=2
  CHECK(oracle::enumerate_polytope_vertices(p).empty());
}

TEST_CASE("dimension guard rejects large sets") {
  Polytope p{SparseMatrix::zeros(1, 9), {1.0}};
  CHECK_THROWS_AS(oracle::enumerate_polytope_vertices(p), oracle::GuardError);
}

TEST_CASE("check_vertex distinguishes corners from interior points") {
  Polytope p = box2d();
  CHECK(oracle::check_vertex(p, std::vector<double>{0.0, 0.0}));
  CHECK(oracle::check_vertex(p, std::vector<double>{1.0, 1.0}));
  CHECK_FALSE(oracle::check_vertex(p, std::vector<double>{0.5, 0.5}));
  CHECK_FALSE(oracle::check_vertex(p, std::vector<double>{1.0, 0.5}));  // edge midpoint
  CHECK_THROWS_AS(oracle::check_vertex(p, std::vector<double>{2.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("worst case is monotone under polytope growth") {
  CompactInstance inst = two_zone_demo_instance();
  auto backend = make_backend();
  CompactInstance diu = strip_decision_dependence(inst);
  // keep only the upward slopes so the realized set strictly contains the
  // static one (pure superset case)
  CompactInstance upper_only = inst;
  {
    const ScenarioBlock& src = inst.scenarios[0];
    std::vector<Triplet> ts;
    for (int r : {0, 1, 4}) {  // upper rows keep their slopes, lower rows lose them
      auto cols = src.F.row_cols(r);
      auto vals = src.F.row_vals(r);
      for (std::size_t k = 0; k < cols.size(); ++k) ts.push_back({r, cols[k], vals[k]});
    }
    upper_only.scenarios[0].F =
        SparseMatrix::from_triplets(src.F.rows(), src.F.cols(), std::move(ts));
  }
  auto big = oracle::worst_case_enumeration(upper_only, 0, two_zone_demo_counts(), *backend);
  auto small = oracle::worst_case_enumeration(diu, 0, two_zone_demo_counts(), *backend);
  CHECK(big.value >= small.value - 1e-9);
  CHECK(big.value == doctest::Approx(50.0));
  CHECK(small.value == doctest::Approx(40.0));

  SUBCASE("removing a binding row can only raise the worst case") {
    CompactInstance wider = inst;
    ScenarioBlock& blk = wider.scenarios[0];
    // drop the sum-upper row (index 4) by pushing its rhs far out
    blk.h[4] = 1e6;
    auto v = oracle::worst_case_enumeration(wider, 0, two_zone_demo_counts(), *backend);
    CHECK(v.value >= big.value - 1e-9);
  }
}

TEST_CASE("worst case on a singleton set equals the recourse value") {
  CompactInstance inst = singleton_uncertainty_instance();
  auto backend = make_backend();
  InvestmentVector x{{1}};
  auto w = oracle::worst_case_enumeration(inst, 0, x, *backend);
  auto rec = evaluate_recourse_lp(inst, 0, x, {3.0}, *backend);
  CHECK(w.value == doctest::Approx(rec.value));
  CHECK(w.xi[0] == doctest::Approx(3.0));
}

TEST_CASE("empty realized set raises the dedicated error") {
  CompactInstance inst = singleton_uncertainty_instance();
  inst.scenarios[0].h = {3.0, -4.0};  // xi <= 3 and xi >= 4
  auto backend = make_backend();
  CHECK_THROWS_AS(oracle::worst_case_enumeration(inst, 0, InvestmentVector{{0}}, *backend),
                  oracle::EmptyPolytopeError);
}

TEST_CASE("exhaustive solve handles the single-plan case") {
  CompactInstance inst = singleton_uncertainty_instance();
  // force x = 1 via the upper level
  inst.upper_a = SparseMatrix::from_triplets(1, 1, {{0, 0, -1.0}});
  inst.upper_b = {-1.0};
  auto backend = make_backend();
  auto res = oracle::exhaustive_trilevel_solve(inst, std::vector<oracle::IntRange>{{0, 1}},
                                               *backend);
  CHECK(res.x.x[0] == 1);
  CHECK(res.objective == doctest::Approx(1.5 + 1.0));  // c.x + recourse at xi=3
}

TEST_CASE("exhaustive solve guards the enumeration size") {
  GoldenInstance g = random_golden(42);  // always has >= 1 general integer
  std::vector<oracle::IntRange> huge(g.inst.n_x(), {0, 200000});
  auto backend = make_backend();
  CHECK_THROWS_AS(oracle::exhaustive_trilevel_solve(g.inst, huge, *backend),
                  oracle::GuardError);
}

TEST_CASE("basic solutions transfer across investments when feasible") {
  // For a fixed lambda the reduced costs of the slack-form parametric LP do
  // not depend on x: a basis optimal at x' stays optimal at x'' whenever its
  // basic solution is feasible there. Checked via the vertex objective.
  CompactInstance inst = two_zone_demo_instance();
  auto backend = make_backend();
  // objective max xi1 (lambda = 1)
  auto value_at = [&](const InvestmentVector& x) {
    Polytope p = realize_ddu_polytope(inst, 0, x);
    auto vs = oracle::enumerate_polytope_vertices(p);
    double best = -1e300;
    std::vector<double> arg;
    for (auto& v : vs)
      if (v[0] > best) {
        best = v[0];
        arg = v;
      }
    return std::pair{best, arg};
  };
  auto [v1, arg1] = value_at(InvestmentVector{{2, 1}});
  auto [v2, arg2] = value_at(InvestmentVector{{3, 2}});
  // the first xi1-max vertex is cut by rows {xi1 upper, xi2 lower} at both x;
  // re-solving at x'' equals evaluating that basis at the shifted rhs
  const ScenarioBlock& blk = inst.scenarios[0];
  auto basis_solution = [&](const InvestmentVector& x) {
    std::vector<double> rhs = blk.h;
    blk.F.multiply_add(std::span<const int>(x.x), rhs, -1.0);
    return std::vector<double>{rhs[0], -rhs[3]};  // rows 0 and 3 active
  };
  auto b1 = basis_solution(InvestmentVector{{2, 1}});
  CHECK(b1[0] == doctest::Approx(arg1[0]).epsilon(1e-7));
  CHECK(b1[1] == doctest::Approx(arg1[1]).epsilon(1e-7));
  auto b2 = basis_solution(InvestmentVector{{3, 2}});
  CHECK(b2[0] == doctest::Approx(arg2[0]).epsilon(1e-7));
  CHECK(b2[1] == doctest::Approx(arg2[1]).epsilon(1e-7));
  CHECK(v2 == doctest::Approx(b2[0]).epsilon(1e-7));
  CHECK(v1 == doctest::Approx(50.0));  // xi1 bound at x=(2,1)
}
