#include "trirobust/instance.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace trirobust {
namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void check_vector(ValidationReport& rep, const std::string& where, std::span<const double> v,
                  int expected_len, const char* len_of) {
  if (static_cast<int>(v.size()) != expected_len) {
    std::ostringstream os;
    os << "length " << v.size() << ", expected " << expected_len << " (" << len_of << ")";
    rep.issues.push_back({where, os.str()});
  }
  if (!all_finite(v)) rep.issues.push_back({where, "contains NaN or infinite entries"});
}

void check_matrix(ValidationReport& rep, const std::string& where, const SparseMatrix& m,
                  int rows, int cols, const char* shape_of) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "shape " << m.rows() << "x" << m.cols() << ", expected " << rows << "x" << cols << " ("
       << shape_of << ")";
    rep.issues.push_back({where, os.str()});
  }
  if (!m.all_finite()) rep.issues.push_back({where, "contains NaN or infinite entries"});
}

}  // namespace

std::string ValidationReport::to_string() const {
  if (ok()) return "OK";
  std::ostringstream os;
  for (const auto& i : issues) os << i.where << ": " << i.what << "\n";
  return os.str();
}

ValidationReport validate_instance(const CompactInstance& inst) {
  ValidationReport rep;
  const int n_x = inst.n_x();
  if (inst.n_binary < 0 || inst.n_integer < 0)
    rep.issues.push_back({"n_binary/n_integer", "negative count"});
  check_vector(rep, "c", inst.c, n_x, "n_x");
  check_matrix(rep, "upper_A", inst.upper_a, static_cast<int>(inst.upper_b.size()), n_x,
               "m_x x n_x");
  if (!all_finite(inst.upper_b)) rep.issues.push_back({"upper_b", "contains NaN or infinite"});
  if (inst.scenarios.empty()) rep.issues.push_back({"scenarios", "empty"});

  double pi_sum = 0.0;
  for (int s = 0; s < inst.num_scenarios(); ++s) {
    const ScenarioBlock& blk = inst.scenarios[s];
    const std::string base = "scenarios[" + std::to_string(s) + "]";
    if (!(blk.pi > 0.0) || blk.pi > 1.0 || !std::isfinite(blk.pi))
      rep.issues.push_back({base + ".pi", "must lie in (0,1]"});
    else
      pi_sum += blk.pi;
    const int m_xi = blk.H.rows(), n_xi = blk.H.cols();
    const int m_y = blk.B.rows(), n_y = blk.B.cols();
    check_matrix(rep, base + ".H", blk.H, m_xi, n_xi, "m_xi x n_xi");
    check_matrix(rep, base + ".F", blk.F, m_xi, n_x, "m_xi x n_x");
    check_matrix(rep, base + ".B", blk.B, m_y, n_y, "m_y x n_y");
    check_matrix(rep, base + ".G", blk.G, m_y, n_x, "m_y x n_x");
    check_matrix(rep, base + ".E", blk.E, m_y, n_xi, "m_y x n_xi");
    check_vector(rep, base + ".d", blk.d, n_y, "n_y");
    check_vector(rep, base + ".f", blk.f, m_y, "m_y");
    check_vector(rep, base + ".h", blk.h, m_xi, "m_xi");
  }
  if (!inst.scenarios.empty() && std::fabs(pi_sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "probabilities sum to " << pi_sum << ", expected 1 within 1e-9";
    rep.issues.push_back({"scenarios[*].pi", os.str()});
  }
  return rep;
}

bool upper_level_feasible(const CompactInstance& inst, const InvestmentVector& x, double tol) {
  if (static_cast<int>(x.x.size()) != inst.n_x()) return false;
  for (int i = 0; i < inst.n_binary; ++i)
    if (x.x[i] != 0 && x.x[i] != 1) return false;
  for (int i = 0; i < inst.n_x(); ++i)
    if (x.x[i] < 0) return false;
  for (int r = 0; r < inst.upper_a.rows(); ++r)
    if (inst.upper_a.row_dot(r, std::span<const int>(x.x)) > inst.upper_b[r] + tol) return false;
  return true;
}

RecourseSolution recourse_lp_at_rhs(const CompactInstance& inst, int s,
                                    std::span<const double> rhs, MilpBackend& backend,
                                    const MilpOptions& opts) {
  const ScenarioBlock& blk = inst.scenarios[s];
  if (static_cast<int>(rhs.size()) != blk.m_y())
    throw std::invalid_argument("recourse rhs has wrong length");
  MilpModel m;
  for (int j = 0; j < blk.n_y(); ++j)
    m.add_var(VarKind::Continuous, 0.0, std::numeric_limits<double>::infinity(), blk.d[j]);
  for (int r = 0; r < blk.m_y(); ++r) {
    std::vector<LinTerm> terms;
    auto cols = blk.B.row_cols(r);
    auto vals = blk.B.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k) terms.push_back({cols[k], vals[k]});
    m.add_row(std::move(terms), RowSense::GreaterEqual, rhs[r]);
  }
  MilpOptions lp_opts = opts;
  lp_opts.require_basic = true;
  SolveOutcome out = backend.solve(m, lp_opts);
  RecourseSolution sol;
  sol.status = out.status;
  if (out.status == SolveStatus::Optimal) {
    sol.value = out.objective;
    sol.y = std::move(out.primal);
  }
  return sol;
}

RecourseSolution evaluate_recourse_lp(const CompactInstance& inst, int s,
                                      const InvestmentVector& x, const UncertaintyVector& xi,
                                      MilpBackend& backend, const MilpOptions& opts) {
  const ScenarioBlock& blk = inst.scenarios[s];
  if (static_cast<int>(x.x.size()) != inst.n_x())
    throw std::invalid_argument("investment vector has wrong length");
  if (static_cast<int>(xi.size()) != blk.n_xi())
    throw std::invalid_argument("uncertainty vector has wrong length");
  std::vector<double> rhs = blk.f;
  blk.G.multiply_add(std::span<const int>(x.x), rhs, -1.0);
  blk.E.multiply_add(std::span<const double>(xi), rhs, -1.0);
  return recourse_lp_at_rhs(inst, s, rhs, backend, opts);
}

Polytope realize_ddu_polytope(const CompactInstance& inst, int s, const InvestmentVector& x) {
  const ScenarioBlock& blk = inst.scenarios[s];
  if (static_cast<int>(x.x.size()) != inst.n_x())
    throw std::invalid_argument("investment vector has wrong length");
  Polytope p;
  p.rows = blk.H;
  p.rhs = blk.h;
  blk.F.multiply_add(std::span<const int>(x.x), p.rhs, -1.0);
  return p;
}

CompactInstance strip_decision_dependence(const CompactInstance& inst) {
  CompactInstance out = inst;
  for (auto& blk : out.scenarios) blk.F = SparseMatrix::zeros(blk.F.rows(), blk.F.cols());
  return out;
}

}  // namespace trirobust
