#include "trirobust/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "trirobust/linalg.hpp"

namespace trirobust::oracle {
namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kDedupTol = 1e-9;

struct DenseRows {
  std::vector<std::vector<double>> a;
  std::vector<double> rhs;
};

// Polytope rows plus the explicit nonnegativity rows -xi_i <= 0.
DenseRows with_nonnegativity(const Polytope& p) {
  const int n = p.dim();
  DenseRows d;
  for (int r = 0; r < p.rows.rows(); ++r) {
    std::vector<double> row(n, 0.0);
    auto cols = p.rows.row_cols(r);
    auto vals = p.rows.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k) row[cols[k]] = vals[k];
    d.a.push_back(std::move(row));
    d.rhs.push_back(p.rhs[r]);
  }
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(n, 0.0);
    row[i] = -1.0;
    d.a.push_back(std::move(row));
    d.rhs.push_back(0.0);
  }
  return d;
}

bool feasible(const DenseRows& d, std::span<const double> x, double tol) {
  for (std::size_t r = 0; r < d.a.size(); ++r) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) lhs += d.a[r][i] * x[i];
    if (lhs > d.rhs[r] + tol * std::max(1.0, std::fabs(d.rhs[r]))) return false;
  }
  return true;
}

}  // namespace

std::vector<std::vector<double>> enumerate_polytope_vertices(const Polytope& p) {
  const int n = p.dim();
  if (n > 8) throw GuardError("vertex enumeration supports dim <= 8");
  if (n == 0) return {};
  DenseRows d = with_nonnegativity(p);
  const int m = static_cast<int>(d.a.size());

  std::vector<std::vector<double>> vertices;
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i;
  auto advance = [&]() {
    int i = n - 1;
    while (i >= 0 && pick[i] == m - n + i) --i;
    if (i < 0) return false;
    ++pick[i];
    for (int j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
    return true;
  };
  do {
    std::vector<std::vector<double>> sys(n);
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) {
      sys[i] = d.a[pick[i]];
      rhs[i] = d.rhs[pick[i]];
    }
    auto sol = linalg::solve_square(std::move(sys), std::move(rhs));
    if (!sol) continue;
    if (!feasible(d, *sol, kFeasTol)) continue;
    bool dup = false;
    for (const auto& v : vertices) {
      double dist = 0.0;
      for (int i = 0; i < n; ++i) dist = std::max(dist, std::fabs(v[i] - (*sol)[i]));
      if (dist <= kDedupTol) {
        dup = true;
        break;
      }
    }
    if (!dup) vertices.push_back(std::move(*sol));
  } while (advance());

  std::sort(vertices.begin(), vertices.end());
  return vertices;
}

bool check_vertex(const Polytope& p, std::span<const double> point) {
  const int n = p.dim();
  if (static_cast<int>(point.size()) != n)
    throw std::invalid_argument("point dimension mismatch");
  DenseRows d = with_nonnegativity(p);
  if (!feasible(d, point, kFeasTol))
    throw std::invalid_argument("check_vertex: point is not feasible");
  std::vector<std::vector<double>> active;
  for (std::size_t r = 0; r < d.a.size(); ++r) {
    double lhs = 0.0;
    for (int i = 0; i < n; ++i) lhs += d.a[r][i] * point[i];
    if (std::fabs(lhs - d.rhs[r]) <= kFeasTol * std::max(1.0, std::fabs(d.rhs[r])))
      active.push_back(d.a[r]);
  }
  return linalg::rank(std::move(active), 1e-7) >= n;
}

WorstCase worst_case_enumeration(const CompactInstance& inst, int s, const InvestmentVector& x,
                                 MilpBackend& backend) {
  Polytope p = realize_ddu_polytope(inst, s, x);
  auto vertices = enumerate_polytope_vertices(p);
  if (vertices.empty()) throw EmptyPolytopeError("realized uncertainty set is empty");
  WorstCase best;
  bool first = true;
  for (const auto& v : vertices) {
    RecourseSolution rec = evaluate_recourse_lp(inst, s, x, v, backend);
    if (rec.status == SolveStatus::Unbounded)
      throw std::runtime_error("recourse LP unbounded during enumeration");
    if (rec.status != SolveStatus::Optimal)
      throw std::runtime_error("recourse LP infeasible during enumeration");
    if (first || rec.value > best.value) {
      best.value = rec.value;
      best.xi = v;
      first = false;
    }
  }
  return best;
}

ExhaustiveResult exhaustive_trilevel_solve(const CompactInstance& inst,
                                           std::span<const IntRange> x_bounds,
                                           MilpBackend& backend) {
  const int n = inst.n_x();
  if (static_cast<int>(x_bounds.size()) != n)
    throw std::invalid_argument("x_bounds has wrong length");
  double count = 1.0;
  for (int i = 0; i < n; ++i) {
    int lo = x_bounds[i].lo, hi = x_bounds[i].hi;
    if (i < inst.n_binary) {
      lo = std::max(lo, 0);
      hi = std::min(hi, 1);
    }
    if (lo < 0) lo = 0;
    if (hi < lo) return {};  // empty box: no feasible x below
    count *= hi - lo + 1.0;
  }
  if (count > 1e5) throw GuardError("feasible-set enumeration exceeds 1e5 points");

  InvestmentVector x;
  x.x.assign(n, 0);
  for (int i = 0; i < n; ++i) x.x[i] = std::max(x_bounds[i].lo, 0);
  ExhaustiveResult best;
  bool found = false;
  auto next = [&]() {
    for (int i = n - 1; i >= 0; --i) {
      int hi = i < inst.n_binary ? std::min(x_bounds[i].hi, 1) : x_bounds[i].hi;
      if (x.x[i] < hi) {
        ++x.x[i];
        for (int j = i + 1; j < n; ++j) x.x[j] = std::max(x_bounds[j].lo, 0);
        return true;
      }
    }
    return false;
  };
  do {
    if (!upper_level_feasible(inst, x)) continue;
    double obj = 0.0;
    for (int i = 0; i < n; ++i) obj += inst.c[i] * x.x[i];
    bool empty_set = false;
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      try {
        obj += inst.scenarios[s].pi * worst_case_enumeration(inst, s, x, backend).value;
      } catch (const EmptyPolytopeError&) {
        empty_set = true;
        break;
      }
    }
    if (empty_set) continue;  // no worst case exists; x yields no robust value
    if (!found || obj < best.objective) {
      best.objective = obj;
      best.x = x;
      found = true;
    }
  } while (next());
  if (!found) throw std::runtime_error("exhaustive solve: no feasible investment");
  return best;
}

}  // namespace trirobust::oracle
