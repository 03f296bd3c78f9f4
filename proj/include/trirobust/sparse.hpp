#pragma once

#include <span>
#include <vector>

namespace trirobust {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Immutable sparse matrix, compressed-row storage built from triplets.
/// Duplicate triplets are summed; explicit zeros are dropped.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_start_(rows + 1, 0) {}
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> ts);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(col_.size()); }

  std::span<const int> row_cols(int r) const {
    return {col_.data() + row_start_[r], col_.data() + row_start_[r + 1]};
  }
  std::span<const double> row_vals(int r) const {
    return {val_.data() + row_start_[r], val_.data() + row_start_[r + 1]};
  }

  /// out += scale * A x
  void multiply_add(std::span<const double> x, std::span<double> out, double scale = 1.0) const;
  void multiply_add(std::span<const int> x, std::span<double> out, double scale = 1.0) const;
  /// out += scale * A^T x
  void transpose_multiply_add(std::span<const double> x, std::span<double> out,
                              double scale = 1.0) const;

  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> multiply(std::span<const int> x) const;

  double row_dot(int r, std::span<const double> x) const;
  double row_dot(int r, std::span<const int> x) const;

  SparseMatrix transposed() const;
  /// Copy with every entry zeroed (dimensions kept, used to strip F blocks).
  static SparseMatrix zeros(int rows, int cols) { return SparseMatrix(rows, cols); }

  bool all_finite() const;
  double max_abs() const;

  bool operator==(const SparseMatrix& o) const = default;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<int> row_start_{0};
  std::vector<int> col_;
  std::vector<double> val_;
};

}  // namespace trirobust
