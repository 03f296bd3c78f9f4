#include "support/fixtures.hpp"

#include <numeric>

namespace testsupport {
namespace {

SparseMatrix dense_rows(int cols, std::vector<std::vector<double>> rows) {
  std::vector<Triplet> ts;
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    for (int c = 0; c < cols; ++c)
      if (rows[r][c] != 0.0) ts.push_back({r, c, rows[r][c]});
  return SparseMatrix::from_triplets(static_cast<int>(rows.size()), cols, std::move(ts));
}

}  // namespace

CompactInstance two_zone_demo_instance() {
  // x = (n_1, n_2): HD counts of the two zones, general integers.
  CompactInstance inst;
  inst.n_binary = 0;
  inst.n_integer = 2;
  inst.c = {1.0, 1.0};
  inst.upper_a = dense_rows(2, {{1, 0}, {0, 1}});  // n <= 3 boxes keep |X| finite
  inst.upper_b = {3.0, 3.0};

  ScenarioBlock blk;
  blk.pi = 1.0;
  // rows: xi1<=.., xi2<=.., -xi1<=.., -xi2<=.., sum<=.., -sum<=..
  blk.H = dense_rows(2, {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, -1}});
  blk.h = {40, 30, -10, -10, 55, -35};
  blk.F = dense_rows(2, {{-5, 0}, {0, -8}, {2, 0}, {0, 4}, {-8, -8}, {2, 2}});
  // recourse: min y with y >= xi1 (value = xi1); Pi = {lambda in [0,1]}
  blk.d = {1.0};
  blk.B = dense_rows(1, {{1.0}});
  blk.f = {0.0};
  blk.G = SparseMatrix::zeros(1, 2);
  blk.E = dense_rows(2, {{-1.0, 0.0}});
  inst.scenarios.push_back(std::move(blk));
  return inst;
}

InvestmentVector two_zone_demo_counts() { return InvestmentVector{{2, 1}}; }

std::vector<std::vector<double>> two_zone_ddu_vertices() {
  std::vector<std::vector<double>> v = {{14, 27}, {14, 38}, {41, 38}, {50, 29}, {50, 14}, {27, 14}};
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<std::vector<double>> two_zone_diu_vertices() {
  std::vector<std::vector<double>> v = {{10, 25}, {10, 30}, {25, 30}, {40, 15}, {40, 10}, {25, 10}};
  std::sort(v.begin(), v.end());
  return v;
}

CompactInstance singleton_uncertainty_instance() {
  CompactInstance inst;
  inst.n_binary = 1;
  inst.n_integer = 0;
  inst.c = {1.5};
  inst.upper_a = SparseMatrix::zeros(0, 1);
  inst.upper_b = {};
  ScenarioBlock blk;
  blk.pi = 1.0;
  blk.H = dense_rows(1, {{1}, {-1}});  // xi = 3 exactly
  blk.h = {3.0, -3.0};
  blk.F = SparseMatrix::zeros(2, 1);
  blk.d = {1.0, 4.0};
  // y1 >= xi - 2 x, slack y2 guards feasibility
  blk.B = dense_rows(2, {{1.0, 1.0}});
  blk.f = {0.0};
  blk.G = dense_rows(1, {{2.0}});
  blk.E = dense_rows(1, {{-1.0}});
  inst.scenarios.push_back(std::move(blk));
  return inst;
}

GoldenInstance random_golden(unsigned seed, bool wide) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  GoldenInstance g;
  CompactInstance& inst = g.inst;
  inst.n_binary = wide ? 0 : pick(0, 2);
  inst.n_integer = std::max(1, wide ? 1 : pick(0, 2));
  if (inst.n_binary + inst.n_integer == 0) inst.n_integer = 1;
  const int n_x = inst.n_x();

  std::vector<int> ub(n_x, 1);
  for (int i = inst.n_binary; i < n_x; ++i) ub[i] = wide ? pick(8, 14) : pick(1, 4);
  std::vector<std::vector<double>> a_rows;
  std::vector<double> b_vec;
  for (int i = inst.n_binary; i < n_x; ++i) {
    std::vector<double> row(n_x, 0.0);
    row[i] = 1.0;
    a_rows.push_back(row);
    b_vec.push_back(ub[i]);
  }
  if (!wide && pick(0, 1) == 1 && n_x >= 2) {
    std::vector<double> row(n_x, 1.0);
    a_rows.push_back(row);
    b_vec.push_back(pick(2, 6));
  }
  inst.upper_a = dense_rows(n_x, a_rows);
  inst.upper_b = b_vec;
  inst.c.resize(n_x);
  for (double& v : inst.c) v = uni(wide ? 0.5 : -4.0, 6.0);
  for (int i = 0; i < n_x; ++i) g.bounds.push_back({0, ub[i]});

  const int S = wide ? 1 : pick(1, 3);
  std::vector<double> pis(S);
  double pi_sum = 0;
  for (double& p : pis) {
    p = uni(0.2, 1.0);
    pi_sum += p;
  }
  for (int s = 0; s < S; ++s) {
    ScenarioBlock blk;
    blk.pi = pis[s] / pi_sum;
    const int n_xi = pick(1, 3);
    // per-coordinate bands lo0+lg.(rho.x) <= xi_i <= hi0+hg.(rho.x), rho >= 0,
    // so the set is nonempty for every x >= 0
    std::vector<double> rho(n_x);
    for (double& v : rho) v = uni(0.0, 1.5);
    std::vector<std::vector<double>> h_rows, f_rows;
    std::vector<double> h_vec;
    std::vector<double> lo0(n_xi), hi0(n_xi), lg(n_xi), hg(n_xi);
    for (int i = 0; i < n_xi; ++i) {
      lo0[i] = uni(0.0, 3.0);
      hi0[i] = lo0[i] + uni(0.5, 5.0);
      lg[i] = uni(0.0, 1.0);
      hg[i] = lg[i] + uni(0.0, 1.5);
      std::vector<double> hrow(n_xi, 0.0), frow(n_x, 0.0);
      hrow[i] = 1.0;
      for (int j = 0; j < n_x; ++j) frow[j] = -hg[i] * rho[j];
      h_rows.push_back(hrow);
      f_rows.push_back(frow);
      h_vec.push_back(hi0[i]);
      for (double& v : hrow) v = -v;
      for (int j = 0; j < n_x; ++j) frow[j] = lg[i] * rho[j];
      h_rows.push_back(hrow);
      f_rows.push_back(frow);
      h_vec.push_back(-lo0[i]);
    }
    if (n_xi >= 2 && pick(0, 1) == 1) {
      // sum band nested so the set stays nonempty over x >= 0
      double lo_sum = std::accumulate(lo0.begin(), lo0.end(), 0.0);
      double hi_sum = std::accumulate(hi0.begin(), hi0.end(), 0.0);
      double lg_sum = std::accumulate(lg.begin(), lg.end(), 0.0);
      double hg_sum = std::accumulate(hg.begin(), hg.end(), 0.0);
      double slo = uni(0.7, 1.0) * lo_sum;
      double shi = std::max(lo_sum, uni(0.7, 1.0) * hi_sum);
      std::vector<double> ones(n_xi, 1.0), frow(n_x, 0.0);
      for (int j = 0; j < n_x; ++j) frow[j] = -hg_sum * rho[j];
      h_rows.push_back(ones);
      f_rows.push_back(frow);
      h_vec.push_back(shi);
      std::vector<double> negs(n_xi, -1.0);
      for (int j = 0; j < n_x; ++j) frow[j] = 0.9 * lg_sum * rho[j];
      h_rows.push_back(negs);
      f_rows.push_back(frow);
      h_vec.push_back(-slo);
    }
    blk.H = dense_rows(n_xi, h_rows);
    blk.F = dense_rows(n_x, f_rows);
    blk.h = h_vec;

    const int m_y = wide ? pick(4, 6) : pick(2, 5);
    const int n_struct = pick(1, 4);
    const int n_y = n_struct + m_y;  // per-row slack columns guarantee recourse
    std::vector<std::vector<double>> b_rows(m_y, std::vector<double>(n_y, 0.0));
    std::vector<std::vector<double>> g_rows(m_y, std::vector<double>(n_x, 0.0));
    std::vector<std::vector<double>> e_rows(m_y, std::vector<double>(n_xi, 0.0));
    blk.f.resize(m_y);
    for (int r = 0; r < m_y; ++r) {
      for (int j = 0; j < n_struct; ++j)
        if (pick(0, 2) != 0) b_rows[r][j] = uni(-2.0, 2.0);
      b_rows[r][n_struct + r] = 1.0;
      for (int j = 0; j < n_x; ++j)
        if (pick(0, 2) == 0) g_rows[r][j] = uni(-2.0, 2.0);
      for (int j = 0; j < n_xi; ++j)
        if (pick(0, 1) == 0) e_rows[r][j] = uni(-2.0, 2.0);
      blk.f[r] = uni(-2.0, 4.0);
    }
    blk.B = dense_rows(n_y, b_rows);
    blk.G = dense_rows(n_x, g_rows);
    blk.E = dense_rows(n_xi, e_rows);
    blk.d.resize(n_y);
    for (int j = 0; j < n_struct; ++j) blk.d[j] = uni(0.0, 4.0);
    for (int j = n_struct; j < n_y; ++j) blk.d[j] = uni(2.0, 8.0);
    inst.scenarios.push_back(std::move(blk));
  }

  // count |X| for the guard
  g.feasible_count = 0;
  InvestmentVector x;
  x.x.assign(n_x, 0);
  for (;;) {
    if (upper_level_feasible(inst, x)) ++g.feasible_count;
    int i = n_x - 1;
    while (i >= 0 && x.x[i] == ub[i]) {
      x.x[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++x.x[i];
  }
  return g;
}

GoldenInstance random_micro(unsigned seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b9u);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  GoldenInstance g;
  CompactInstance& inst = g.inst;
  inst.n_binary = 0;
  inst.n_integer = 1;
  int ub = pick(1, 3);
  inst.upper_a = dense_rows(1, {{1.0}});
  inst.upper_b = {static_cast<double>(ub)};
  inst.c = {uni(-2.0, 2.0)};
  g.bounds.push_back({0, ub});

  const int S = pick(1, 2);
  for (int s = 0; s < S; ++s) {
    ScenarioBlock blk;
    blk.pi = 1.0 / S;
    const int n_xi = pick(1, 2);
    std::vector<std::vector<double>> h_rows, f_rows;
    std::vector<double> h_vec;
    for (int i = 0; i < n_xi; ++i) {
      double lo0 = uni(0.0, 1.0), hi0 = lo0 + uni(0.5, 2.0);
      double lg = uni(0.0, 0.5), hg = lg + uni(0.0, 1.0);
      std::vector<double> hrow(n_xi, 0.0), frow(1, -hg);
      hrow[i] = 1.0;
      h_rows.push_back(hrow);
      f_rows.push_back(frow);
      h_vec.push_back(hi0);
      hrow[i] = -1.0;
      frow[0] = lg;
      h_rows.push_back(hrow);
      f_rows.push_back(frow);
      h_vec.push_back(-lo0);
    }
    blk.H = dense_rows(n_xi, h_rows);
    blk.F = dense_rows(1, f_rows);
    blk.h = h_vec;
    const int m_y = 2;
    const int n_y = 1 + m_y;
    std::vector<std::vector<double>> b_rows(m_y, std::vector<double>(n_y, 0.0));
    std::vector<std::vector<double>> g_rows(m_y, std::vector<double>(1, 0.0));
    std::vector<std::vector<double>> e_rows(m_y, std::vector<double>(n_xi, 0.0));
    blk.f.resize(m_y);
    for (int r = 0; r < m_y; ++r) {
      b_rows[r][0] = uni(-1.5, 1.5);
      b_rows[r][1 + r] = 1.0;
      g_rows[r][0] = uni(-1.0, 1.0);
      e_rows[r][pick(0, n_xi - 1)] = uni(-2.0, 2.0);
      blk.f[r] = uni(-1.0, 2.0);
    }
    blk.B = dense_rows(n_y, b_rows);
    blk.G = dense_rows(1, g_rows);
    blk.E = dense_rows(n_xi, e_rows);
    blk.d = {uni(0.5, 3.0)};
    blk.d.resize(n_y);
    for (int j = 1; j < n_y; ++j) blk.d[j] = uni(2.0, 6.0);
    inst.scenarios.push_back(std::move(blk));
  }
  g.feasible_count = ub + 1;
  return g;
}

std::string cases_dir() {
#ifdef TRIROBUST_CASES_DIR
  return TRIROBUST_CASES_DIR;
#else
  return "cases";
#endif
}

NhempCase load_fixture_case(const std::string& name) {
  return load_case(cases_dir() + "/" + name + ".json");
}

}  // namespace testsupport
