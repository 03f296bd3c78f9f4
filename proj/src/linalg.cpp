#include "trirobust/linalg.hpp"

#include <cmath>

namespace trirobust::linalg {

int rank(std::vector<std::vector<double>> rows, double tol) {
  if (rows.empty()) return 0;
  const int m = static_cast<int>(rows.size());
  const int n = static_cast<int>(rows[0].size());
  for (auto& r : rows) {
    double scale = 0.0;
    for (double v : r) scale = std::max(scale, std::fabs(v));
    if (scale > 0.0)
      for (double& v : r) v /= scale;
  }
  int rk = 0;
  for (int col = 0; col < n && rk < m; ++col) {
    int piv = -1;
    double best = tol;
    for (int r = rk; r < m; ++r)
      if (std::fabs(rows[r][col]) > best) {
        best = std::fabs(rows[r][col]);
        piv = r;
      }
    if (piv < 0) continue;
    std::swap(rows[rk], rows[piv]);
    for (int r = rk + 1; r < m; ++r) {
      double factor = rows[r][col] / rows[rk][col];
      if (factor == 0.0) continue;
      for (int c = col; c < n; ++c) rows[r][c] -= factor * rows[rk][c];
    }
    ++rk;
  }
  return rk;
}

std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a,
                                                std::vector<double> b, double tol) {
  const int n = static_cast<int>(a.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < tol) return std::nullopt;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (int r = col + 1; r < n; ++r) {
      double factor = a[r][col] / a[col][col];
      if (factor == 0.0) continue;
      for (int c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double v = b[r];
    for (int c = r + 1; c < n; ++c) v -= a[r][c] * x[c];
    x[r] = v / a[r][r];
  }
  return x;
}

}  // namespace trirobust::linalg
