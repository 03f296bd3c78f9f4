#include <doctest.h>

#include "trirobust/milp.hpp"

using namespace trirobust;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("continuous minimum hits the bound") {
  MilpModel m;
  m.add_var(VarKind::Continuous, 3.0, kInf, 1.0);
  auto backend = make_backend();
  SolveOutcome out = backend->solve(m, {});
  CHECK(out.status == SolveStatus::Optimal);
  CHECK(out.objective == doctest::Approx(3.0));
}

TEST_CASE("integer variable rounds up") {
  MilpModel m;
  int x = m.add_var(VarKind::Integer, 0.0, kInf, 1.0);
  m.add_row({{x, 1.0}}, RowSense::GreaterEqual, 2.5);
  auto backend = make_backend();
  SolveOutcome out = backend->solve(m, {});
  CHECK(out.status == SolveStatus::Optimal);
  CHECK(out.objective == doctest::Approx(3.0));
}

TEST_CASE("contradictory rows are infeasible") {
  MilpModel m;
  int x = m.add_var(VarKind::Continuous, 0.0, kInf, 1.0);
  m.add_row({{x, 1.0}}, RowSense::GreaterEqual, 1.0);
  m.add_row({{x, 1.0}}, RowSense::LessEqual, 0.0);
  auto backend = make_backend();
  CHECK(backend->solve(m, {}).status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded model is reported as such") {
  MilpModel m;
  m.add_var(VarKind::Continuous, 0.0, kInf, -1.0);
  auto backend = make_backend();
  CHECK(backend->solve(m, {}).status == SolveStatus::Unbounded);
}

TEST_CASE("objective round-trip and feasibility of returned primal") {
  MilpModel m;
  int x = m.add_var(VarKind::Integer, 0.0, 10.0, 2.0);
  int y = m.add_var(VarKind::Continuous, 0.0, kInf, 1.0);
  int b = m.add_var(VarKind::Binary, 0.0, 1.0, -3.0);
  m.add_row({{x, 1.0}, {y, 1.0}}, RowSense::GreaterEqual, 4.2);
  m.add_row({{x, 1.0}, {b, 5.0}}, RowSense::LessEqual, 7.0);
  m.set_objective_offset(1.25);
  auto backend = make_backend();
  SolveOutcome out = backend->solve(m, {});
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(m.eval_objective(out.primal) ==
        doctest::Approx(out.objective).epsilon(1e-6));
  CHECK(m.max_violation(out.primal) <= 1e-6);
}

TEST_CASE("repeated solves of the same model agree") {
  MilpModel m;
  int x = m.add_var(VarKind::Integer, 0.0, 9.0, 1.0);
  int y = m.add_var(VarKind::Integer, 0.0, 9.0, 1.3);
  m.add_row({{x, 2.0}, {y, 3.0}}, RowSense::GreaterEqual, 11.0);
  auto backend = make_backend();
  SolveOutcome a = backend->solve(m, {});
  SolveOutcome b = backend->solve(m, {});
  REQUIRE(a.status == SolveStatus::Optimal);
  CHECK(a.objective == b.objective);
}

TEST_CASE("unknown backend is rejected") {
  CHECK_THROWS_AS(make_backend("cplex"), std::invalid_argument);
}
