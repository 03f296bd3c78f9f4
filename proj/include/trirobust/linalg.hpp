#pragma once

#include <optional>
#include <span>
#include <vector>

namespace trirobust::linalg {

/// Rank by Gaussian elimination with partial pivoting. Rows are scaled to
/// unit inf-norm first so tol acts relatively.
int rank(std::vector<std::vector<double>> rows, double tol = 1e-7);

/// Solve a square n x n system; nullopt when the pivot falls under tol.
std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a,
                                                std::vector<double> b, double tol = 1e-10);

}  // namespace trirobust::linalg
