#include "trirobust/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trirobust {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> ts) {
  for (const auto& t : ts) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::invalid_argument("sparse triplet out of range");
  }
  std::sort(ts.begin(), ts.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.col_.reserve(ts.size());
  m.val_.reserve(ts.size());
  std::size_t i = 0;
  for (int r = 0; r < rows; ++r) {
    while (i < ts.size() && ts[i].row == r) {
      double v = ts[i].value;
      int c = ts[i].col;
      ++i;
      while (i < ts.size() && ts[i].row == r && ts[i].col == c) {
        v += ts[i].value;
        ++i;
      }
      if (v != 0.0) {
        m.col_.push_back(c);
        m.val_.push_back(v);
      }
    }
    m.row_start_[r + 1] = static_cast<int>(m.col_.size());
  }
  return m;
}

void SparseMatrix::multiply_add(std::span<const double> x, std::span<double> out,
                                double scale) const {
  for (int r = 0; r < rows_; ++r)
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) out[r] += scale * val_[k] * x[col_[k]];
}

void SparseMatrix::multiply_add(std::span<const int> x, std::span<double> out, double scale) const {
  for (int r = 0; r < rows_; ++r)
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) out[r] += scale * val_[k] * x[col_[k]];
}

void SparseMatrix::transpose_multiply_add(std::span<const double> x, std::span<double> out,
                                          double scale) const {
  for (int r = 0; r < rows_; ++r)
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) out[col_[k]] += scale * val_[k] * x[r];
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> out(rows_, 0.0);
  multiply_add(x, out);
  return out;
}

std::vector<double> SparseMatrix::multiply(std::span<const int> x) const {
  std::vector<double> out(rows_, 0.0);
  multiply_add(x, out);
  return out;
}

double SparseMatrix::row_dot(int r, std::span<const double> x) const {
  double v = 0.0;
  for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) v += val_[k] * x[col_[k]];
  return v;
}

double SparseMatrix::row_dot(int r, std::span<const int> x) const {
  double v = 0.0;
  for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) v += val_[k] * x[col_[k]];
  return v;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> ts;
  ts.reserve(col_.size());
  for (int r = 0; r < rows_; ++r)
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) ts.push_back({col_[k], r, val_[k]});
  return from_triplets(cols_, rows_, std::move(ts));
}

bool SparseMatrix::all_finite() const {
  for (double v : val_)
    if (!std::isfinite(v)) return false;
  return true;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : val_) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace trirobust
