#pragma once

#include <stdexcept>

#include "trirobust/instance.hpp"

namespace trirobust::oracle {

/// Combinatorial guards (n_xi <= 8, |X| <= 1e5).
struct GuardError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct EmptyPolytopeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// All vertices of { xi >= 0 | rows xi <= rhs } by active-set subsets with
/// rank filtering. Deduplicated at 1e-9, sorted lexicographically; empty
/// list iff the polytope is empty. Guard: dim <= 8.
std::vector<std::vector<double>> enumerate_polytope_vertices(const Polytope& p);

/// True iff >= dim linearly independent rows are active at the point
/// (rank tolerance 1e-7). The point must be feasible within 1e-7; an
/// infeasible point is an error, not false.
bool check_vertex(const Polytope& p, std::span<const double> point);

struct WorstCase {
  double value = 0.0;
  std::vector<double> xi;
};

/// max over vertices of Xi_s(x) of the recourse LP value; equals the SP value.
WorstCase worst_case_enumeration(const CompactInstance& inst, int s, const InvestmentVector& x,
                                 MilpBackend& backend);

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct ExhaustiveResult {
  InvestmentVector x;
  double objective = 0.0;
};

/// Ground truth for tiny instances: enumerate feasible x in the given box,
/// evaluate c.x + sum_s pi_s * worst-case, return the minimizer.
ExhaustiveResult exhaustive_trilevel_solve(const CompactInstance& inst,
                                           std::span<const IntRange> x_bounds,
                                           MilpBackend& backend);

}  // namespace trirobust::oracle
