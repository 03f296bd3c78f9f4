#pragma once

#include <random>

#include "trirobust/io.hpp"

namespace testsupport {

using namespace trirobust;

// Two-zone DDU fixture with one period: base bands [10,40] and [10,30],
// sum band [35,55], induced slopes (2,5), (4,8) and (2,8), HD counts (2,1).
// Realized bounds: xi1 in [14,50], xi2 in [14,38], sum in [41,79].
CompactInstance two_zone_demo_instance();
InvestmentVector two_zone_demo_counts();  // (2, 1)

// Expected vertex sets for the two-zone fixture (lexicographically sorted).
std::vector<std::vector<double>> two_zone_ddu_vertices();
std::vector<std::vector<double>> two_zone_diu_vertices();

// One scenario whose uncertainty set is the singleton {xi0}.
CompactInstance singleton_uncertainty_instance();

struct GoldenInstance {
  CompactInstance inst;
  std::vector<oracle::IntRange> bounds;
  long feasible_count = 0;
};

// Random compact instance with relatively complete recourse (per-row slack
// columns with positive cost), bounded recourse objective, and nonempty
// band-structured uncertainty sets for every feasible x.
// wide=true stretches the integer ranges (harder value functions).
GoldenInstance random_golden(unsigned seed, bool wide = false);

// Very small dimensions so the basis-combination bound stays under 1e4.
GoldenInstance random_micro(unsigned seed);

// Planning cases shipped under cases/.
std::string cases_dir();
NhempCase load_fixture_case(const std::string& name);  // name without .json

}  // namespace testsupport
