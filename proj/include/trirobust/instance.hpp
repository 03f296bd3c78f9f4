#pragma once

#include <string>
#include <vector>

#include "trirobust/milp.hpp"
#include "trirobust/sparse.hpp"

namespace trirobust {

using UncertaintyVector = std::vector<double>;  // xi  >= 0, length n_xi
using RecourseVector = std::vector<double>;     // y   >= 0, length n_y
using DualVector = std::vector<double>;         // lambda >= 0, length m_y

/// One stochastic scenario of the compact trilevel problem:
///   uncertainty set  Xi_s(x) = { xi >= 0 | H xi <= h - F x }
///   recourse set     Y_s(x,xi) = { y >= 0 | B y >= f - G x - E xi }
///   recourse cost    d . y, scenario weight pi.
struct ScenarioBlock {
  double pi = 0.0;
  std::vector<double> d, f, h;
  SparseMatrix H, F, B, G, E;

  int n_xi() const { return H.cols(); }
  int m_xi() const { return H.rows(); }
  int n_y() const { return B.cols(); }
  int m_y() const { return B.rows(); }
};

/// Full compact problem: min c.x + sum_s pi_s max_xi min_y d_s.y
/// over X = { binary^n_binary x N^n_integer | A x <= b }.
struct CompactInstance {
  std::vector<double> c;
  SparseMatrix upper_a;
  std::vector<double> upper_b;
  int n_binary = 0;
  int n_integer = 0;
  std::vector<ScenarioBlock> scenarios;

  int n_x() const { return n_binary + n_integer; }
  int num_scenarios() const { return static_cast<int>(scenarios.size()); }
};

/// Upper-level decision: binary prefix of length n_binary, nonnegative
/// general-integer suffix.
struct InvestmentVector {
  std::vector<int> x;
};

/// Realized uncertainty set for a fixed investment: { xi >= 0 | rows xi <= rhs }.
/// Nonnegativity is implicit here; the oracle layer adds it explicitly.
struct Polytope {
  SparseMatrix rows;
  std::vector<double> rhs;
  int dim() const { return rows.cols(); }
};

struct ValidationIssue {
  std::string where;  // block coordinate, e.g. "scenarios[2].f"
  std::string what;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

/// Non-throwing, exhaustive: collects every dimension/probability/finiteness
/// violation with its block coordinate.
ValidationReport validate_instance(const CompactInstance& inst);

/// A x <= b plus integrality-domain checks on the binary prefix.
bool upper_level_feasible(const CompactInstance& inst, const InvestmentVector& x,
                          double tol = 1e-9);

struct RecourseSolution {
  SolveStatus status = SolveStatus::Error;
  double value = 0.0;
  RecourseVector y;
};

/// min d_s.y  s.t.  B_s y >= rhs, y >= 0. Signals infeasible/unbounded for
/// hand-built blocks without relatively complete recourse.
RecourseSolution recourse_lp_at_rhs(const CompactInstance& inst, int s,
                                    std::span<const double> rhs, MilpBackend& backend,
                                    const MilpOptions& opts = {});

/// Same with rhs = f_s - G_s x - E_s xi; xi need not lie in Xi_s(x).
RecourseSolution evaluate_recourse_lp(const CompactInstance& inst, int s,
                                      const InvestmentVector& x, const UncertaintyVector& xi,
                                      MilpBackend& backend, const MilpOptions& opts = {});

/// Halfspace list of Xi_s(x) with right-hand side h_s - F_s x. Emptiness is
/// not checked here.
Polytope realize_ddu_polytope(const CompactInstance& inst, int s, const InvestmentVector& x);

/// Copy with every F_s zeroed: realized polytopes become decision-independent.
CompactInstance strip_decision_dependence(const CompactInstance& inst);

}  // namespace trirobust
