#include <doctest.h>

#include <random>

#include "support/dense_simplex.hpp"
#include "support/fixtures.hpp"
#include "trirobust/instance.hpp"

using namespace trirobust;
using testsupport::two_zone_demo_counts;
using testsupport::two_zone_demo_instance;

namespace {

SparseMatrix mat(int rows, int cols, std::vector<Triplet> ts) {
  return SparseMatrix::from_triplets(rows, cols, std::move(ts));
}

CompactInstance one_scenario_instance() {
  CompactInstance inst;
  inst.n_binary = 1;
  inst.n_integer = 0;
  inst.c = {1.0};
  inst.upper_a = mat(0, 1, {});
  ScenarioBlock blk;
  blk.pi = 1.0;
  blk.H = mat(1, 1, {{0, 0, 1.0}});
  blk.h = {1.0};
  blk.F = mat(1, 1, {});
  blk.d = {1.0};
  blk.B = mat(1, 1, {{0, 0, 1.0}});
  blk.f = {1.0};
  blk.G = mat(1, 1, {});
  blk.E = mat(1, 1, {});
  inst.scenarios.push_back(blk);
  return inst;
}

}  // namespace

TEST_CASE("well-formed instance validates OK") {
  CHECK(validate_instance(one_scenario_instance()).ok());
}

TEST_CASE("dimension violation names the offending block") {
  CompactInstance inst = one_scenario_instance();
  inst.scenarios[0].f = {1.0, 2.0};  // m_y is 1
  ValidationReport rep = validate_instance(inst);
  REQUIRE_FALSE(rep.ok());
  bool names_f = false;
  for (const auto& issue : rep.issues)
    if (issue.where == "scenarios[0].f") names_f = true;
  CHECK(names_f);
}

TEST_CASE("probability sum violation is reported") {
  CompactInstance inst = one_scenario_instance();
  inst.scenarios.push_back(inst.scenarios[0]);
  inst.scenarios[0].pi = 0.6;
  inst.scenarios[1].pi = 0.6;
  ValidationReport rep = validate_instance(inst);
  REQUIRE_FALSE(rep.ok());
  bool names_pi = false;
  for (const auto& issue : rep.issues)
    if (issue.where == "scenarios[*].pi") names_pi = true;
  CHECK(names_pi);
}

TEST_CASE("validation is non-throwing and exhaustive") {
  CompactInstance inst = one_scenario_instance();
  inst.scenarios[0].pi = 0.0;
  inst.scenarios[0].d = {1.0, 2.0};
  inst.scenarios[0].h = {std::numeric_limits<double>::quiet_NaN()};
  ValidationReport rep = validate_instance(inst);
  CHECK(rep.issues.size() >= 3);
}

TEST_CASE("recourse LP solves the trivial cases") {
  CompactInstance inst = one_scenario_instance();
  auto backend = make_backend();
  InvestmentVector x{{0}};
  auto sol = evaluate_recourse_lp(inst, 0, x, {0.0}, *backend);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.value == doctest::Approx(1.0));
  CHECK(sol.y[0] == doctest::Approx(1.0));

  // rhs -2: nonnegativity binds
  auto sol2 = recourse_lp_at_rhs(inst, 0, std::vector<double>{-2.0}, *backend);
  REQUIRE(sol2.status == SolveStatus::Optimal);
  CHECK(sol2.value == doctest::Approx(0.0));
  CHECK(sol2.y[0] == doctest::Approx(0.0));
}

TEST_CASE("recourse LP matches the independent dense simplex on random blocks") {
  std::mt19937_64 rng(7);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto backend = make_backend();
  for (int rep = 0; rep < 25; ++rep) {
    const int m_y = 5, n_y = 8, n_struct = n_y - m_y;
    CompactInstance inst = one_scenario_instance();
    ScenarioBlock& blk = inst.scenarios[0];
    std::vector<Triplet> bt;
    std::vector<std::vector<double>> dense(m_y, std::vector<double>(n_y, 0.0));
    for (int r = 0; r < m_y; ++r)
      for (int j = 0; j < n_struct; ++j)
        if (uni(0, 1) < 0.6) {
          dense[r][j] = uni(-2, 2);
          bt.push_back({r, j, dense[r][j]});
        }
    // slack spine keeps the LP feasible and d >= 0 keeps it bounded
    for (int r = 0; r < m_y; ++r) {
      dense[r][n_struct + r] = 1.0;
      bt.push_back({r, n_struct + r, 1.0});
    }
    blk.B = mat(m_y, n_y, std::move(bt));
    blk.d.assign(n_y, 0.0);
    std::vector<double> rhs(m_y);
    for (double& v : blk.d) v = uni(0, 4);
    for (double& v : rhs) v = uni(-3, 4);
    blk.f = rhs;
    blk.G = mat(m_y, 1, {});
    blk.E = mat(m_y, 1, {});
    blk.H = mat(1, 1, {{0, 0, 1.0}});
    blk.h = {1.0};

    auto fast = recourse_lp_at_rhs(inst, 0, rhs, *backend);
    auto slow = testsupport::simplex_min_ge(dense, rhs, blk.d);
    REQUIRE(fast.status == SolveStatus::Optimal);
    REQUIRE(slow.status == testsupport::LpStatus::Optimal);
    CHECK(fast.value == doctest::Approx(slow.value).epsilon(1e-8));
  }
}

TEST_CASE("recourse value is convex in the rhs vector") {
  std::mt19937_64 rng(11);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  CompactInstance inst = two_zone_demo_instance();
  // enrich the recourse so convexity is non-trivial
  ScenarioBlock& blk = inst.scenarios[0];
  blk.B = mat(2, 3, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, -0.5}, {1, 2, 1.0}});
  blk.d = {1.0, 2.0, 3.0};
  blk.f = {0.0, 0.0};
  blk.G = mat(2, 2, {});
  blk.E = mat(2, 2, {{0, 0, -1.0}, {1, 1, -1.0}});
  auto backend = make_backend();
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> r1 = {uni(-2, 4), uni(-2, 4)};
    std::vector<double> r2 = {uni(-2, 4), uni(-2, 4)};
    double theta = uni(0, 1);
    std::vector<double> rm = {theta * r1[0] + (1 - theta) * r2[0],
                              theta * r1[1] + (1 - theta) * r2[1]};
    double v1 = recourse_lp_at_rhs(inst, 0, r1, *backend).value;
    double v2 = recourse_lp_at_rhs(inst, 0, r2, *backend).value;
    double vm = recourse_lp_at_rhs(inst, 0, rm, *backend).value;
    CHECK(vm <= theta * v1 + (1 - theta) * v2 + 1e-7);
  }
}

TEST_CASE("realized polytope carries h - F x") {
  CompactInstance inst = two_zone_demo_instance();
  Polytope p = realize_ddu_polytope(inst, 0, two_zone_demo_counts());
  REQUIRE(p.rhs.size() == 6);
  CHECK(p.rhs[0] == doctest::Approx(50.0));   // xi1 upper
  CHECK(p.rhs[1] == doctest::Approx(38.0));   // xi2 upper
  CHECK(p.rhs[2] == doctest::Approx(-14.0));  // xi1 lower
  CHECK(p.rhs[3] == doctest::Approx(-14.0));  // xi2 lower
  CHECK(p.rhs[4] == doctest::Approx(79.0));   // sum upper
  CHECK(p.rhs[5] == doctest::Approx(-41.0));  // sum lower

  SUBCASE("zero investment reproduces h exactly") {
    Polytope p0 = realize_ddu_polytope(inst, 0, InvestmentVector{{0, 0}});
    for (std::size_t i = 0; i < p0.rhs.size(); ++i)
      CHECK(p0.rhs[i] == inst.scenarios[0].h[i]);
  }
}

TEST_CASE("stripping decision dependence") {
  CompactInstance inst = two_zone_demo_instance();
  CompactInstance diu = strip_decision_dependence(inst);

  SUBCASE("realized sets become investment-independent") {
    Polytope a = realize_ddu_polytope(diu, 0, InvestmentVector{{0, 0}});
    Polytope b = realize_ddu_polytope(diu, 0, InvestmentVector{{3, 1}});
    CHECK(a.rhs == b.rhs);
    CHECK(a.rows == b.rows);
  }
  SUBCASE("base bounds survive") {
    Polytope p = realize_ddu_polytope(diu, 0, two_zone_demo_counts());
    CHECK(p.rhs[0] == doctest::Approx(40.0));
    CHECK(p.rhs[2] == doctest::Approx(-10.0));
    CHECK(p.rhs[4] == doctest::Approx(55.0));
  }
  SUBCASE("stripping is idempotent") {
    CompactInstance twice = strip_decision_dependence(diu);
    CHECK(twice.scenarios[0].F == diu.scenarios[0].F);
  }
  SUBCASE("stripped set equals the original at x = 0") {
    Polytope a = realize_ddu_polytope(inst, 0, InvestmentVector{{0, 0}});
    Polytope b = realize_ddu_polytope(diu, 0, InvestmentVector{{2, 1}});
    CHECK(a.rhs == b.rhs);
  }
}
