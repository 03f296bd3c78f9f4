#include "trirobust/reformulate.hpp"

#include <cmath>
#include <stdexcept>

#include "trirobust/linalg.hpp"

namespace trirobust {
namespace {

constexpr double kInfBound = std::numeric_limits<double>::infinity();

std::vector<double> dual_slacks(const DualPolyhedron& pi, const DualVector& lambda) {
  // d - B^T lambda
  std::vector<double> slack = pi.rhs;
  pi.rows.multiply_add(std::span<const double>(lambda), slack, -1.0);
  return slack;
}

}  // namespace

DualPolyhedron dual_feasible_set(const CompactInstance& inst, int s) {
  const ScenarioBlock& blk = inst.scenarios[s];
  return DualPolyhedron{blk.B.transposed(), blk.d};
}

bool dual_contains(const DualPolyhedron& pi, const DualVector& lambda, double tol) {
  if (static_cast<int>(lambda.size()) != pi.dim()) return false;
  for (double v : lambda)
    if (v < -tol || !std::isfinite(v)) return false;
  for (int r = 0; r < pi.rows.rows(); ++r) {
    double lhs = pi.rows.row_dot(r, std::span<const double>(lambda));
    if (lhs > pi.rhs[r] + tol * std::max(1.0, std::fabs(pi.rhs[r]))) return false;
  }
  return true;
}

bool dual_is_extreme_point(const DualPolyhedron& pi, const DualVector& lambda, double tol) {
  if (!dual_contains(pi, lambda, tol)) return false;
  const int m = pi.dim();
  std::vector<std::vector<double>> active;
  for (int j = 0; j < m; ++j)
    if (std::fabs(lambda[j]) <= tol) {
      std::vector<double> row(m, 0.0);
      row[j] = 1.0;
      active.push_back(std::move(row));
    }
  std::vector<double> slack = dual_slacks(pi, lambda);
  for (int r = 0; r < pi.rows.rows(); ++r) {
    if (std::fabs(slack[r]) <= tol * std::max(1.0, std::fabs(pi.rhs[r]))) {
      std::vector<double> row(m, 0.0);
      auto cols = pi.rows.row_cols(r);
      auto vals = pi.rows.row_vals(r);
      for (std::size_t k = 0; k < cols.size(); ++k) row[cols[k]] = vals[k];
      active.push_back(std::move(row));
    }
  }
  return linalg::rank(std::move(active), tol) >= m;
}

std::vector<ComplementarityRecord> linearize_complementarity(
    MilpModel& model, std::span<const std::pair<LinExpr, LinExpr>> pairs, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("big-M must be positive");
  std::vector<ComplementarityRecord> records;
  records.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    int w = model.add_var(VarKind::Binary, 0.0, 1.0, 0.0);
    LinExpr a_row = a;
    a_row.add(w, -M);
    model.add_row(a_row, RowSense::LessEqual, 0.0);
    LinExpr b_row = b;
    b_row.add(w, M);
    model.add_row(b_row, RowSense::LessEqual, M);
    records.push_back({a, b, w});
  }
  return records;
}

double max_bigm_utilization(std::span<const ComplementarityRecord> records,
                            std::span<const double> primal) {
  double worst = 0.0;
  for (const auto& r : records) {
    worst = std::max(worst, r.a.eval(primal));
    worst = std::max(worst, r.b.eval(primal));
  }
  return worst;
}

double max_complementarity_product(std::span<const ComplementarityRecord> records,
                                   std::span<const double> primal) {
  double worst = 0.0;
  for (const auto& r : records)
    worst = std::max(worst, std::fabs(r.a.eval(primal) * r.b.eval(primal)));
  return worst;
}

OuBlockVars build_ou_block(MilpModel& model, const CompactInstance& inst, int s,
                           const DualVector& lambda_hat, double M,
                           std::span<const int> x_vars) {
  const ScenarioBlock& blk = inst.scenarios[s];
  if (static_cast<int>(x_vars.size()) != inst.n_x())
    throw std::invalid_argument("x_vars has wrong length");
  DualPolyhedron pi = dual_feasible_set(inst, s);
  if (!dual_contains(pi, lambda_hat, 1e-7))
    throw std::invalid_argument("lambda_hat violates the dual feasible set Pi_s");

  const int n_xi = blk.n_xi(), m_xi = blk.m_xi();
  OuBlockVars out;
  for (int i = 0; i < n_xi; ++i)
    out.xi.push_back(model.add_var(VarKind::Continuous, 0.0, kInfBound, 0.0));
  for (int r = 0; r < m_xi; ++r)
    out.vartheta.push_back(model.add_var(VarKind::Continuous, 0.0, kInfBound, 0.0));

  // E^T lambda_hat, the constant part of the dual stationarity rows.
  std::vector<double> et_lambda(n_xi, 0.0);
  blk.E.transpose_multiply_add(std::span<const double>(lambda_hat), et_lambda);

  // Primal rows: H xi + F x <= h.
  std::vector<LinExpr> primal_slack(m_xi);  // h - F x - H xi, reused for pairs
  for (int r = 0; r < m_xi; ++r) {
    LinExpr lhs;
    auto hcols = blk.H.row_cols(r);
    auto hvals = blk.H.row_vals(r);
    for (std::size_t k = 0; k < hcols.size(); ++k) lhs.add(out.xi[hcols[k]], hvals[k]);
    auto fcols = blk.F.row_cols(r);
    auto fvals = blk.F.row_vals(r);
    for (std::size_t k = 0; k < fcols.size(); ++k) lhs.add(x_vars[fcols[k]], fvals[k]);
    model.add_row(lhs, RowSense::LessEqual, blk.h[r]);
    LinExpr& slack = primal_slack[r];
    slack.constant = blk.h[r];
    for (const auto& t : lhs.terms) slack.add(t.var, -t.coef);
  }

  // Dual rows: H^T vartheta >= -E^T lambda_hat.
  SparseMatrix ht = blk.H.transposed();
  std::vector<LinExpr> dual_slack(n_xi);  // H^T vartheta + E^T lambda_hat
  for (int i = 0; i < n_xi; ++i) {
    LinExpr lhs;
    auto cols = ht.row_cols(i);
    auto vals = ht.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) lhs.add(out.vartheta[cols[k]], vals[k]);
    model.add_row(lhs, RowSense::GreaterEqual, -et_lambda[i]);
    dual_slack[i] = lhs;
    dual_slack[i].constant += et_lambda[i];
  }

  std::vector<std::pair<LinExpr, LinExpr>> pairs;
  pairs.reserve(m_xi + n_xi);
  for (int r = 0; r < m_xi; ++r)
    pairs.emplace_back(LinExpr{}.add(out.vartheta[r], 1.0), primal_slack[r]);
  for (int i = 0; i < n_xi; ++i)
    pairs.emplace_back(LinExpr{}.add(out.xi[i], 1.0), dual_slack[i]);
  out.comps = linearize_complementarity(model, pairs, M);
  for (int r = 0; r < m_xi; ++r) out.w_primal.push_back(out.comps[r].w_var);
  for (int i = 0; i < n_xi; ++i) out.v_dual.push_back(out.comps[m_xi + i].w_var);
  return out;
}

SpMilp build_sp_milp(const CompactInstance& inst, int s, const InvestmentVector& x_hat,
                     double M) {
  const ScenarioBlock& blk = inst.scenarios[s];
  if (!(M > 0.0)) throw std::invalid_argument("big-M must be positive");
  if (static_cast<int>(x_hat.x.size()) != inst.n_x())
    throw std::invalid_argument("x_hat has wrong length");

  SpMilp sp;
  MilpModel& m = sp.model;
  const int n_xi = blk.n_xi(), m_xi = blk.m_xi(), n_y = blk.n_y(), m_y = blk.m_y();
  for (int i = 0; i < n_xi; ++i)
    sp.xi_vars.push_back(m.add_var(VarKind::Continuous, 0.0, kInfBound, 0.0));
  for (int j = 0; j < n_y; ++j)
    sp.y_vars.push_back(m.add_var(VarKind::Continuous, 0.0, kInfBound, -blk.d[j]));
  for (int r = 0; r < m_y; ++r)
    sp.lambda_vars.push_back(m.add_var(VarKind::Continuous, 0.0, kInfBound, 0.0));

  // H xi <= h - F x_hat
  std::vector<double> rhs_xi = blk.h;
  blk.F.multiply_add(std::span<const int>(x_hat.x), rhs_xi, -1.0);
  for (int r = 0; r < m_xi; ++r) {
    LinExpr lhs;
    auto cols = blk.H.row_cols(r);
    auto vals = blk.H.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k) lhs.add(sp.xi_vars[cols[k]], vals[k]);
    m.add_row(lhs, RowSense::LessEqual, rhs_xi[r]);
  }

  // B y + E xi >= f - G x_hat, slack paired with lambda.
  std::vector<double> rhs_y = blk.f;
  blk.G.multiply_add(std::span<const int>(x_hat.x), rhs_y, -1.0);
  std::vector<LinExpr> primal_slack(m_y);
  for (int r = 0; r < m_y; ++r) {
    LinExpr lhs;
    auto bcols = blk.B.row_cols(r);
    auto bvals = blk.B.row_vals(r);
    for (std::size_t k = 0; k < bcols.size(); ++k) lhs.add(sp.y_vars[bcols[k]], bvals[k]);
    auto ecols = blk.E.row_cols(r);
    auto evals = blk.E.row_vals(r);
    for (std::size_t k = 0; k < ecols.size(); ++k) lhs.add(sp.xi_vars[ecols[k]], evals[k]);
    m.add_row(lhs, RowSense::GreaterEqual, rhs_y[r]);
    primal_slack[r] = lhs;
    primal_slack[r].constant = -rhs_y[r];
  }

  // B^T lambda <= d, slack paired with y.
  SparseMatrix bt = blk.B.transposed();
  std::vector<LinExpr> dual_slack(n_y);
  for (int j = 0; j < n_y; ++j) {
    LinExpr lhs;
    auto cols = bt.row_cols(j);
    auto vals = bt.row_vals(j);
    for (std::size_t k = 0; k < cols.size(); ++k) lhs.add(sp.lambda_vars[cols[k]], vals[k]);
    m.add_row(lhs, RowSense::LessEqual, blk.d[j]);
    LinExpr& slack = dual_slack[j];
    slack.constant = blk.d[j];
    for (const auto& t : lhs.terms) slack.add(t.var, -t.coef);
  }

  std::vector<std::pair<LinExpr, LinExpr>> pairs;
  pairs.reserve(m_y + n_y);
  for (int r = 0; r < m_y; ++r)
    pairs.emplace_back(LinExpr{}.add(sp.lambda_vars[r], 1.0), primal_slack[r]);
  for (int j = 0; j < n_y; ++j)
    pairs.emplace_back(LinExpr{}.add(sp.y_vars[j], 1.0), dual_slack[j]);
  sp.comps = linearize_complementarity(m, pairs, M);
  return sp;
}

}  // namespace trirobust
