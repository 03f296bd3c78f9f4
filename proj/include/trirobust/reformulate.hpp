#pragma once

#include <utility>

#include "trirobust/instance.hpp"

namespace trirobust {

/// Dual feasible set Pi_s = { lambda >= 0 | B_s^T lambda <= d_s }.
/// Carries no reference to x or xi by construction.
struct DualPolyhedron {
  SparseMatrix rows;        // B^T, n_y x m_y
  std::vector<double> rhs;  // d
  int dim() const { return rows.cols(); }
};

DualPolyhedron dual_feasible_set(const CompactInstance& inst, int s);

bool dual_contains(const DualPolyhedron& pi, const DualVector& lambda, double tol = 1e-7);

/// Extreme-point test: >= dim linearly independent active rows among
/// { lambda_j >= 0 } and { (B^T lambda)_r <= d_r }, rank tolerance 1e-7.
bool dual_is_extreme_point(const DualPolyhedron& pi, const DualVector& lambda, double tol = 1e-7);

/// One linearized complementarity pair a*b = 0 with a,b >= 0:
///   a <= M*w,  b <= M*(1-w),  w binary.
struct ComplementarityRecord {
  LinExpr a, b;
  int w_var = -1;
};

/// Appends the rows and indicator binaries for each pair; M must be positive.
std::vector<ComplementarityRecord> linearize_complementarity(
    MilpModel& model, std::span<const std::pair<LinExpr, LinExpr>> pairs, double M);

/// Largest value any M-bounded side attains at a solution (hygiene probe).
double max_bigm_utilization(std::span<const ComplementarityRecord> records,
                            std::span<const double> primal);
/// Largest product a*b at a solution (should be ~0 on solved models).
double max_complementarity_product(std::span<const ComplementarityRecord> records,
                                   std::span<const double> primal);

/// KKT system of Psi_s(x, lambda_hat) = max { (-E_s xi).lambda_hat : xi in Xi_s(x) },
/// emitted into an existing model against shared upper-level variables x_vars.
/// Any (xi, vartheta) satisfying the block is an optimizer of Psi_s.
struct OuBlockVars {
  std::vector<int> xi;        // n_xi continuous >= 0
  std::vector<int> vartheta;  // m_xi continuous >= 0
  std::vector<int> w_primal;  // m_xi indicators: vartheta_r * primal slack_r
  std::vector<int> v_dual;    // n_xi indicators: xi_i * dual slack_i
  std::vector<ComplementarityRecord> comps;
};

OuBlockVars build_ou_block(MilpModel& model, const CompactInstance& inst, int s,
                           const DualVector& lambda_hat, double M,
                           std::span<const int> x_vars);

/// Single-level KKT MILP of SP_s at x_hat:
///   max d.y  s.t.  H xi <= h - F x_hat;  B y + E xi >= f - G x_hat;
///   B^T lambda <= d;  lambda o (B y + E xi - f + G x_hat) = 0;
///   y o (d - B^T lambda) = 0;  xi, y, lambda >= 0.
/// Stored as a minimization of -d.y: the SP value is -outcome.objective.
struct SpMilp {
  MilpModel model;
  std::vector<int> xi_vars, y_vars, lambda_vars;
  std::vector<ComplementarityRecord> comps;
};

SpMilp build_sp_milp(const CompactInstance& inst, int s, const InvestmentVector& x_hat, double M);

}  // namespace trirobust
