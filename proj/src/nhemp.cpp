#include "trirobust/nhemp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace trirobust {
namespace {

struct TreeInfo {
  std::vector<int> parent;       // node -> parent node (-1 for root)
  std::vector<int> parent_line;  // node -> oriented line index (-1 for root)
  std::vector<std::vector<int>> child_lines;  // node -> oriented line indices
  std::vector<Line> oriented;    // from = parent side
};

TreeInfo orient_tree(const DistributionNetwork& net) {
  const int n = net.node_count;
  if (static_cast<int>(net.lines.size()) != n - 1)
    throw CaseError("network is not radial: need node_count-1 lines, got " +
                    std::to_string(net.lines.size()));
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // node -> (neighbor, line idx)
  for (int l = 0; l < static_cast<int>(net.lines.size()); ++l) {
    const Line& ln = net.lines[l];
    if (ln.from < 0 || ln.from >= n || ln.to < 0 || ln.to >= n || ln.from == ln.to)
      throw CaseError("line " + std::to_string(l) + " references invalid nodes");
    adj[ln.from].push_back({ln.to, l});
    adj[ln.to].push_back({ln.from, l});
  }
  TreeInfo t;
  t.parent.assign(n, -2);
  t.parent_line.assign(n, -1);
  t.child_lines.assign(n, {});
  t.oriented.resize(net.lines.size());
  std::queue<int> q;
  q.push(0);
  t.parent[0] = -1;
  int visited = 0;
  while (!q.empty()) {
    int i = q.front();
    q.pop();
    ++visited;
    for (auto [j, l] : adj[i]) {
      if (t.parent[j] != -2) continue;
      t.parent[j] = i;
      t.parent_line[j] = l;
      t.child_lines[i].push_back(l);
      Line o = net.lines[l];
      if (o.from != i) std::swap(o.from, o.to);
      t.oriented[l] = o;
      q.push(j);
    }
  }
  if (visited != n) throw CaseError("network is not radial: graph is disconnected or cyclic");
  return t;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw CaseError(msg);
}

void check_series(const std::vector<double>& v, int len, const std::string& what) {
  require(static_cast<int>(v.size()) == len,
          what + ": expected " + std::to_string(len) + " entries, got " +
              std::to_string(v.size()));
}

void check_table(const std::vector<std::vector<double>>& v, int rows, int cols,
                 const std::string& what) {
  require(static_cast<int>(v.size()) == rows,
          what + ": expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
  for (const auto& r : v)
    require(static_cast<int>(r.size()) == cols,
            what + ": expected " + std::to_string(cols) + " columns");
}

void validate_case(const NhempCase& c, std::vector<std::string>& warnings) {
  const auto& net = c.network;
  require(net.node_count >= 2, "network needs at least the root and one load node");
  require(net.u_min_kv < net.u0_kv && net.u0_kv < net.u_max_kv,
          "voltage bounds must satisfy u_min < u0 < u_max");
  require(!net.candidates.empty(), "no candidate nodes");
  for (int i : net.candidates) {
    require(i >= 1 && i < net.node_count, "candidate node " + std::to_string(i) + " out of range");
    require(net.s_lv_max_kva.count(i) > 0,
            "candidate " + std::to_string(i) + " missing s_lv_max_kva");
  }
  require(!c.zones.empty(), "no zones");
  std::map<int, int> zone_of;
  for (const auto& z : c.zones) {
    require(!z.candidates.empty(), "zone " + z.id + " has no candidates");
    for (int i : z.candidates) {
      require(std::find(net.candidates.begin(), net.candidates.end(), i) != net.candidates.end(),
              "zone " + z.id + " references non-candidate node " + std::to_string(i));
      require(zone_of.count(i) == 0, "node " + std::to_string(i) + " appears in two zones");
      zone_of[i] = 1;
    }
  }
  require(zone_of.size() == net.candidates.size(), "zones must cover every candidate node");

  const auto& cat = c.catalog;
  for (const auto& r : cat.res)
    require(r.unit_kw > 0 && r.count_max >= r.count_min && r.count_min >= 0,
            "res component " + r.name + ": bad unit or count bounds");
  for (const auto& e : cat.ess) {
    require(e.eta_ch > 0 && e.eta_ch <= 1 && e.eta_dis > 0 && e.eta_dis <= 1,
            "ess " + e.name + ": efficiencies must lie in (0,1]");
    require(e.dod > 0 && e.dod <= 1, "ess " + e.name + ": DoD must lie in (0,1]");
  }
  require(cat.elz.efficiency > 0 && cat.elz.efficiency <= 1, "elz efficiency must lie in (0,1]");
  require(cat.elz.lhv_kw_per_kg > 0, "elz LHV must be positive");
  require(cat.ht.dissipation >= 0 && cat.ht.dissipation < 1, "ht dissipation must lie in [0,1)");
  require(cat.hd.service_rate_kg_h > 0, "hd service rate must be positive");
  require(cat.tan_phi_min >= 0 && cat.tan_phi_min <= cat.tan_phi_max,
          "power-factor band must satisfy 0 <= tan_min <= tan_max");

  const auto& sc = c.scenarios;
  const int T = sc.period_count, N = net.node_count;
  require(T >= 1, "period_count must be >= 1");
  require(!sc.items.empty(), "no scenarios");
  double pi_sum = 0;
  for (std::size_t s = 0; s < sc.items.size(); ++s) {
    const Scenario& sn = sc.items[s];
    const std::string base = "scenarios[" + std::to_string(s) + "]";
    require(sn.pi > 0 && sn.pi <= 1, base + ".pi must lie in (0,1]");
    pi_sum += sn.pi;
    check_table(sn.pd_kw, N, T, base + ".pd_kw");
    check_table(sn.tan_phi_pl, N, T, base + ".tan_phi_pl");
    for (const auto& r : cat.res) {
      auto it = sn.delta.find(r.name);
      require(it != sn.delta.end(), base + ": missing delta series for res '" + r.name + "'");
      check_table(it->second, N, T, base + ".delta." + r.name);
      for (const auto& row : it->second)
        for (double v : row)
          require(v >= 0 && v <= 1, base + ".delta." + r.name + ": values must lie in [0,1]");
    }
    check_series(sn.price_import, T, base + ".price_import");
    check_series(sn.price_retail_e, T, base + ".price_retail_e");
    for (double v : sn.price_import) require(v >= 0, base + ".price_import must be >= 0");
    for (double v : sn.price_retail_e) require(v >= 0, base + ".price_retail_e must be >= 0");
    require(sn.price_h2_purchase >= 0 && sn.price_h2_retail >= 0 && sn.penalty_unmet >= 0,
            base + ": prices and penalty must be >= 0");
    for (const auto& z : c.zones) {
      auto it = sn.g_pur_max.find(z.id);
      require(it != sn.g_pur_max.end(), base + ": missing g_pur_max for zone " + z.id);
      check_series(it->second, T, base + ".g_pur_max." + z.id);
    }
  }
  require(std::fabs(pi_sum - 1.0) <= 1e-9, "scenario probabilities must sum to 1");

  const int S = static_cast<int>(sc.items.size());
  for (const auto& z : c.zones) {
    auto it = c.ddu.zones.find(z.id);
    require(it != c.ddu.zones.end(), "ddu: missing zone " + z.id);
    const DduZone& dz = it->second;
    check_table(dz.xi_max, S, T, "ddu." + z.id + ".xi_max");
    check_table(dz.xi_min, S, T, "ddu." + z.id + ".xi_min");
    check_series(dz.gamma_max, T, "ddu." + z.id + ".gamma_max");
    check_series(dz.gamma_min, T, "ddu." + z.id + ".gamma_min");
    for (int s = 0; s < S; ++s)
      for (int t = 0; t < T; ++t)
        require(dz.xi_min[s][t] <= dz.xi_max[s][t], "ddu." + z.id + ": xi_min > xi_max");
    for (int t = 0; t < T; ++t)
      require(dz.gamma_min[t] <= dz.gamma_max[t], "ddu." + z.id + ": gamma_min > gamma_max");
  }
  if (c.ddu.town_band) {
    check_table(c.ddu.zeta_max, S, T, "ddu.zeta_max");
    check_table(c.ddu.zeta_min, S, T, "ddu.zeta_min");
    if (!c.ddu.alpha_max.empty()) {
      check_series(c.ddu.alpha_max, T, "ddu.alpha_max");
      check_series(c.ddu.alpha_min, T, "ddu.alpha_min");
      for (int t = 0; t < T; ++t)
        require(c.ddu.alpha_min[t] <= c.ddu.alpha_max[t], "ddu: alpha_min > alpha_max");
    }
    for (int s = 0; s < S; ++s)
      for (int t = 0; t < T; ++t) {
        double lo_sum = 0, hi_sum = 0;
        for (const auto& z : c.zones) {
          const DduZone& dz = c.ddu.zones.at(z.id);
          lo_sum += dz.xi_min[s][t];
          hi_sum += dz.xi_max[s][t];
        }
        if (c.ddu.zeta_min[s][t] < lo_sum - 1e-9 || c.ddu.zeta_max[s][t] > hi_sum + 1e-9) {
          std::ostringstream os;
          os << "ddu town band at (s=" << s << ",t=" << t
             << ") is not nested inside the zonal sum band at zero HDs";
          warnings.push_back(os.str());
        }
      }
  }
  require(c.polygon_segments >= 4 && c.polygon_segments % 2 == 0,
          "polygon_segments must be even and >= 4");
}

}  // namespace

std::vector<std::array<double, 3>> polygonal_quadratic_cut_set(double cap, int segments) {
  if (segments < 4 || segments % 2 != 0)
    throw std::invalid_argument("polygon segments must be even and >= 4");
  if (!(cap >= 0)) throw std::invalid_argument("capacity must be nonnegative");
  const double pi = std::acos(-1.0);
  const double inradius = std::cos(pi / segments);
  std::vector<std::array<double, 3>> rows;
  rows.reserve(segments);
  for (int m = 0; m < segments; ++m) {
    double theta = (2 * m + 1) * pi / segments;
    rows.push_back({std::cos(theta) / inradius, std::sin(theta) / inradius, cap});
  }
  return rows;
}

CompiledCase build_compact_instance(const NhempCase& c) {
  CompiledCase cc;
  validate_case(c, cc.warnings);
  const TreeInfo tree = orient_tree(c.network);

  const auto& net = c.network;
  const auto& cat = c.catalog;
  const int N = net.node_count;
  const int T = c.scenarios.period_count;
  const int S = static_cast<int>(c.scenarios.items.size());
  const int C = static_cast<int>(net.candidates.size());
  const int Z = static_cast<int>(c.zones.size());
  const int R = static_cast<int>(cat.res.size());
  const int ES = static_cast<int>(cat.ess.size());
  const int L = static_cast<int>(net.lines.size());
  const double dt = c.scenarios.delta_t_h;
  const double sdt = c.scenarios.sigma * dt;

  NhempLayout& lay = cc.layout;
  lay.T = T;
  lay.S = S;
  lay.node_count = N;
  lay.candidates = net.candidates;
  lay.num_res = R;
  lay.num_ess = ES;
  for (const auto& z : c.zones) lay.zone_ids.push_back(z.id);

  // ----- upper level -----
  int x_idx = 0;
  for (int i : net.candidates) lay.u_of[i] = x_idx++;
  for (const auto& r : cat.res)
    for (int i : net.candidates) lay.count_of[r.name][i] = x_idx++;
  for (const auto& e : cat.ess)
    for (int i : net.candidates) lay.count_of[e.name][i] = x_idx++;
  for (int i : net.candidates) lay.count_of["elz"][i] = x_idx++;
  for (int i : net.candidates) lay.count_of["ht"][i] = x_idx++;
  for (int i : net.candidates) lay.n_of[i] = x_idx++;
  const int n_x = x_idx;

  std::vector<double> c_vec(n_x, 0.0);
  for (int i : net.candidates) c_vec[lay.u_of.at(i)] = cat.c_hem_yr;
  for (const auto& r : cat.res)
    for (int i : net.candidates)
      c_vec[lay.count_of.at(r.name).at(i)] = r.cost_per_unit_yr * r.unit_kw;
  for (const auto& e : cat.ess)
    for (int i : net.candidates)
      c_vec[lay.count_of.at(e.name).at(i)] = e.cost_per_unit_yr * e.unit_kw;
  for (int i : net.candidates)
    c_vec[lay.count_of.at("elz").at(i)] = cat.elz.cost_per_unit_yr * cat.elz.unit_kw;
  for (int i : net.candidates)
    c_vec[lay.count_of.at("ht").at(i)] = cat.ht.cost_per_unit_yr * cat.ht.unit_kg;
  for (int i : net.candidates) c_vec[lay.n_of.at(i)] = cat.hd.cost_per_yr;

  std::vector<Triplet> a_trip;
  std::vector<double> b_vec;
  auto upper_row = [&](const std::vector<std::pair<int, double>>& terms, double rhs) {
    int r = static_cast<int>(b_vec.size());
    for (auto [v, coef] : terms) a_trip.push_back({r, v, coef});
    b_vec.push_back(rhs);
  };
  // one microgrid per zone (equality as a <=,>= pair)
  for (const auto& z : c.zones) {
    std::vector<std::pair<int, double>> pos, neg;
    for (int i : z.candidates) {
      pos.push_back({lay.u_of.at(i), 1.0});
      neg.push_back({lay.u_of.at(i), -1.0});
    }
    upper_row(pos, 1.0);
    upper_row(neg, -1.0);
  }
  auto count_rows = [&](int var, int lo, int hi, int u_var) {
    upper_row({{var, 1.0}, {u_var, -static_cast<double>(hi)}}, 0.0);
    upper_row({{var, -1.0}, {u_var, static_cast<double>(lo)}}, 0.0);
  };
  for (int i : net.candidates) {
    int u = lay.u_of.at(i);
    for (const auto& r : cat.res)
      count_rows(lay.count_of.at(r.name).at(i), r.count_min, r.count_max, u);
    for (const auto& e : cat.ess)
      count_rows(lay.count_of.at(e.name).at(i), e.count_min, e.count_max, u);
    count_rows(lay.count_of.at("elz").at(i), cat.elz.count_min, cat.elz.count_max, u);
    count_rows(lay.count_of.at("ht").at(i), cat.ht.count_min, cat.ht.count_max, u);
    count_rows(lay.n_of.at(i), cat.hd.count_min, cat.hd.count_max, u);
  }

  CompactInstance& inst = cc.inst;
  inst.c = std::move(c_vec);
  inst.n_binary = C;
  inst.n_integer = n_x - C;
  inst.upper_b = std::move(b_vec);
  inst.upper_a = SparseMatrix::from_triplets(static_cast<int>(inst.upper_b.size()), n_x,
                                             std::move(a_trip));

  // ----- y layout (shared by all scenarios) -----
  int off = 0;
  lay.off_p_mv = off; off += T;
  lay.off_q_mv = off; off += T;
  lay.off_res_p = off; off += R * C * T;
  lay.off_res_q = off; off += R * C * T;
  lay.off_pc = off; off += ES * C * T;
  lay.off_pd = off; off += ES * C * T;
  lay.off_soc = off; off += ES * C * T;
  lay.off_p_elz = off; off += C * T;
  lay.off_g_elz = off; off += C * T;
  lay.off_loh = off; off += C * T;
  lay.off_g_pur = off; off += C * T;
  lay.off_p_lv = off; off += C * T;
  lay.off_q_lv = off; off += C * T;
  lay.off_gl = off; off += C * T;
  lay.off_pl = off; off += (N - 1) * T;
  lay.off_ls = off; off += (N - 1) * T;
  lay.off_ul = off; off += Z * T;
  lay.off_fp = off; off += L * T;
  lay.off_fq = off; off += L * T;
  lay.off_u = off; off += N * T;
  lay.y_dim = off;

  std::map<int, int> zone_index_of_node;
  std::map<int, int> cand_index;
  for (int ci = 0; ci < C; ++ci) cand_index[net.candidates[ci]] = ci;
  for (int z = 0; z < Z; ++z)
    for (int i : c.zones[z].candidates) zone_index_of_node[i] = z;

  const auto mv_polygon = polygonal_quadratic_cut_set(net.s_mv_max_kva, c.polygon_segments);

  // ----- per-scenario blocks -----
  for (int s = 0; s < S; ++s) {
    const Scenario& sn = c.scenarios.items[s];
    ScenarioBlock blk;
    blk.pi = sn.pi;

    blk.d.assign(lay.y_dim, 0.0);
    for (int t = 0; t < T; ++t) {
      blk.d[lay.p_mv(t)] = sdt * sn.price_import[t];
      for (int ci = 0; ci < C; ++ci) {
        blk.d[lay.g_pur(ci, t)] = sdt * sn.price_h2_purchase;
        blk.d[lay.gl(ci, t)] = -sdt * sn.price_h2_retail;
        for (int e = 0; e < ES; ++e) {
          blk.d[lay.ess_pc(e, ci, t)] = sdt * cat.ess[e].kappa / 2.0;
          blk.d[lay.ess_pd(e, ci, t)] = sdt * cat.ess[e].kappa / 2.0;
        }
      }
      for (int node = 1; node < N; ++node) {
        blk.d[lay.ls(node, t)] = sdt * sn.penalty_unmet;
        blk.d[lay.pl(node, t)] = -sdt * sn.price_retail_e[t];
      }
    }

    std::vector<Triplet> bt, gt, et;
    std::vector<double> f_vec;
    using Terms = std::vector<std::pair<int, double>>;
    auto row_ge = [&](const Terms& y_terms, const Terms& x_terms, const Terms& xi_terms,
                      double rhs) {
      int r = static_cast<int>(f_vec.size());
      for (auto [v, coef] : y_terms) bt.push_back({r, v, coef});
      for (auto [v, coef] : x_terms) gt.push_back({r, v, coef});
      for (auto [v, coef] : xi_terms) et.push_back({r, v, coef});
      f_vec.push_back(rhs);
    };
    auto row_le = [&](Terms y_terms, Terms x_terms, Terms xi_terms, double rhs) {
      for (auto& [v, coef] : y_terms) coef = -coef;
      for (auto& [v, coef] : x_terms) coef = -coef;
      for (auto& [v, coef] : xi_terms) coef = -coef;
      row_ge(y_terms, x_terms, xi_terms, -rhs);
    };
    auto row_eq = [&](const Terms& y_terms, const Terms& x_terms, const Terms& xi_terms,
                      double rhs) {
      row_ge(y_terms, x_terms, xi_terms, rhs);
      row_le(y_terms, x_terms, xi_terms, rhs);
    };

    for (int ci = 0; ci < C; ++ci) {
      const int node = net.candidates[ci];
      const int u_var = lay.u_of.at(node);
      const int zi = zone_index_of_node.at(node);
      const auto& zone_id = lay.zone_ids[zi];
      const auto lv_rows = polygonal_quadratic_cut_set(net.s_lv_max_kva.at(node),
                                                       c.polygon_segments);
      for (int t = 0; t < T; ++t) {
        // RES output caps and reactive band
        for (int k = 0; k < R; ++k) {
          const ResComponent& r = cat.res[k];
          const double avail = sn.delta.at(r.name)[node][t] * r.unit_kw;
          row_ge({{lay.res_p(k, ci, t), -1.0}}, {{lay.count_of.at(r.name).at(node), avail}}, {},
                 0.0);
          row_ge({{lay.res_q(k, ci, t), 1.0}, {lay.res_p(k, ci, t), -cat.tan_phi_min}}, {}, {},
                 0.0);
          row_ge({{lay.res_q(k, ci, t), -1.0}, {lay.res_p(k, ci, t), cat.tan_phi_max}}, {}, {},
                 0.0);
        }
        // ESS power and energy caps
        for (int e = 0; e < ES; ++e) {
          const EssComponent& es = cat.ess[e];
          const int cnt = lay.count_of.at(es.name).at(node);
          row_ge({{lay.ess_pc(e, ci, t), -1.0}}, {{cnt, es.unit_kw}}, {}, 0.0);
          row_ge({{lay.ess_pd(e, ci, t), -1.0}}, {{cnt, es.unit_kw}}, {}, 0.0);
          row_ge({{lay.ess_soc(e, ci, t), -1.0}}, {{cnt, es.unit_kwh}}, {}, 0.0);
          row_ge({{lay.ess_soc(e, ci, t), 1.0}}, {{cnt, -(1.0 - es.dod) * es.unit_kwh}}, {}, 0.0);
        }
        // electrolyzer conversion and cap
        row_eq({{lay.g_elz(ci, t), 1.0},
                {lay.p_elz(ci, t), -cat.elz.efficiency / cat.elz.lhv_kw_per_kg}},
               {}, {}, 0.0);
        row_ge({{lay.p_elz(ci, t), -1.0}}, {{lay.count_of.at("elz").at(node), cat.elz.unit_kw}},
               {}, 0.0);
        // hydrogen purchase gated by deployment
        row_ge({{lay.g_pur(ci, t), -1.0}}, {{u_var, sn.g_pur_max.at(zone_id)[t]}}, {}, 0.0);
        // tank level cap
        row_ge({{lay.loh(ci, t), -1.0}}, {{lay.count_of.at("ht").at(node), cat.ht.unit_kg}}, {},
               0.0);
        // dispenser service cap
        row_ge({{lay.gl(ci, t), -1.0}}, {{lay.n_of.at(node), cat.hd.service_rate_kg_h}}, {}, 0.0);
        // microgrid active/reactive balance
        Terms pbal{{lay.p_lv(ci, t), 1.0}, {lay.pl(node, t), -1.0}, {lay.p_elz(ci, t), -1.0}};
        for (int k = 0; k < R; ++k) pbal.push_back({lay.res_p(k, ci, t), 1.0});
        for (int e = 0; e < ES; ++e) {
          pbal.push_back({lay.ess_pd(e, ci, t), 1.0});
          pbal.push_back({lay.ess_pc(e, ci, t), -1.0});
        }
        row_eq(pbal, {}, {}, 0.0);
        Terms qbal{{lay.q_lv(ci, t), 1.0}, {lay.pl(node, t), -sn.tan_phi_pl[node][t]}};
        for (int k = 0; k < R; ++k) qbal.push_back({lay.res_q(k, ci, t), 1.0});
        row_eq(qbal, {}, {}, 0.0);
        // LV substation capacity polygon
        for (const auto& [a, b, cap] : lv_rows)
          row_le({{lay.p_lv(ci, t), a}, {lay.q_lv(ci, t), b}}, {}, {}, cap);
      }
      // ESS state recursion and daily closure
      for (int e = 0; e < ES; ++e) {
        const EssComponent& es = cat.ess[e];
        for (int t = 0; t + 1 < T; ++t)
          row_eq({{lay.ess_soc(e, ci, t + 1), 1.0},
                  {lay.ess_soc(e, ci, t), -1.0},
                  {lay.ess_pc(e, ci, t), -es.eta_ch * dt},
                  {lay.ess_pd(e, ci, t), dt / es.eta_dis}},
                 {}, {}, 0.0);
        Terms closure;
        for (int t = 0; t < T; ++t) {
          closure.push_back({lay.ess_pc(e, ci, t), es.eta_ch});
          closure.push_back({lay.ess_pd(e, ci, t), -1.0 / es.eta_dis});
        }
        row_eq(closure, {}, {}, 0.0);
      }
      // tank mass balance, cyclic over the typical day
      for (int t = 0; t < T; ++t)
        row_eq({{lay.loh(ci, (t + 1) % T), 1.0},
                {lay.loh(ci, t), -(1.0 - cat.ht.dissipation)},
                {lay.g_elz(ci, t), -dt},
                {lay.g_pur(ci, t), -dt},
                {lay.gl(ci, t), dt}},
               {}, {}, 0.0);
    }

    for (int t = 0; t < T; ++t) {
      // load split at every non-root node
      for (int node = 1; node < N; ++node)
        row_eq({{lay.pl(node, t), 1.0}, {lay.ls(node, t), 1.0}}, {}, {}, sn.pd_kw[node][t]);
      // zonal refueling balance against the uncertain demand
      for (int z = 0; z < Z; ++z) {
        Terms bal{{lay.ul(z, t), 1.0}};
        for (int i : c.zones[z].candidates) bal.push_back({lay.gl(cand_index.at(i), t), 1.0});
        row_eq(bal, {}, {{lay.xi_of(z, t), -1.0}}, 0.0);
      }
      // flow conservation
      for (int node = 1; node < N; ++node) {
        Terms fp_terms{{lay.fp(tree.parent_line[node], t), 1.0}};
        Terms fq_terms{{lay.fq(tree.parent_line[node], t), 1.0}};
        for (int l : tree.child_lines[node]) {
          fp_terms.push_back({lay.fp(l, t), -1.0});
          fq_terms.push_back({lay.fq(l, t), -1.0});
        }
        if (cand_index.count(node)) {
          fp_terms.push_back({lay.p_lv(cand_index.at(node), t), -1.0});
          fq_terms.push_back({lay.q_lv(cand_index.at(node), t), -1.0});
        } else {
          fp_terms.push_back({lay.pl(node, t), -1.0});
          fq_terms.push_back({lay.pl(node, t), -sn.tan_phi_pl[node][t]});
        }
        row_eq(fp_terms, {}, {}, 0.0);
        row_eq(fq_terms, {}, {}, 0.0);
      }
      // root exchange
      Terms root_p{{lay.p_mv(t), -1.0}}, root_q{{lay.q_mv(t), -1.0}};
      for (int l : tree.child_lines[0]) {
        root_p.push_back({lay.fp(l, t), 1.0});
        root_q.push_back({lay.fq(l, t), 1.0});
      }
      row_eq(root_p, {}, {}, 0.0);
      row_eq(root_q, {}, {}, 0.0);
      // line capacity polygons and voltage drops
      for (int l = 0; l < L; ++l) {
        const Line& ln = tree.oriented[l];
        for (const auto& [a, b, cap] :
             polygonal_quadratic_cut_set(ln.s_max_kva, c.polygon_segments))
          row_le({{lay.fp(l, t), a}, {lay.fq(l, t), b}}, {}, {}, cap);
        row_eq({{lay.u_volt(ln.from, t), 1.0},
                {lay.u_volt(ln.to, t), -1.0},
                {lay.fp(l, t), -ln.r_ohm / (net.u0_kv * 1000.0)},
                {lay.fq(l, t), -ln.x_ohm / (net.u0_kv * 1000.0)}},
               {}, {}, 0.0);
      }
      // voltage security range
      for (int node = 0; node < N; ++node) {
        row_ge({{lay.u_volt(node, t), 1.0}}, {}, {}, net.u_min_kv);
        row_le({{lay.u_volt(node, t), 1.0}}, {}, {}, net.u_max_kv);
      }
      // MV substation capacity polygon
      for (const auto& [a, b, cap] : mv_polygon)
        row_le({{lay.p_mv(t), a}, {lay.q_mv(t), b}}, {}, {}, cap);
    }

    const int m_y = static_cast<int>(f_vec.size());
    blk.f = std::move(f_vec);
    blk.B = SparseMatrix::from_triplets(m_y, lay.y_dim, std::move(bt));
    blk.G = SparseMatrix::from_triplets(m_y, n_x, std::move(gt));
    blk.E = SparseMatrix::from_triplets(m_y, lay.n_xi(), std::move(et));

    // ----- DDU set rows -----
    std::vector<Triplet> h_trip, f_trip;
    std::vector<double> h_vec;
    auto resolve_alpha = [&](bool upper, int t) {
      const auto& explicit_alpha = upper ? c.ddu.alpha_max : c.ddu.alpha_min;
      if (!explicit_alpha.empty()) return explicit_alpha[t];
      double sum = 0;
      for (const auto& z : c.zones) {
        const DduZone& dz = c.ddu.zones.at(z.id);
        sum += upper ? dz.gamma_max[t] : dz.gamma_min[t];
      }
      return sum / Z;
    };
    for (int z = 0; z < Z; ++z) {
      const DduZone& dz = c.ddu.zones.at(c.zones[z].id);
      for (int t = 0; t < T; ++t) {
        int r = static_cast<int>(h_vec.size());
        h_trip.push_back({r, lay.xi_of(z, t), 1.0});
        if (dz.gamma_max[t] != 0.0)
          for (int i : c.zones[z].candidates)
            f_trip.push_back({r, lay.n_of.at(i), -dz.gamma_max[t]});
        h_vec.push_back(dz.xi_max[s][t]);
      }
    }
    for (int z = 0; z < Z; ++z) {
      const DduZone& dz = c.ddu.zones.at(c.zones[z].id);
      for (int t = 0; t < T; ++t) {
        int r = static_cast<int>(h_vec.size());
        h_trip.push_back({r, lay.xi_of(z, t), -1.0});
        if (dz.gamma_min[t] != 0.0)
          for (int i : c.zones[z].candidates)
            f_trip.push_back({r, lay.n_of.at(i), dz.gamma_min[t]});
        h_vec.push_back(-dz.xi_min[s][t]);
      }
    }
    if (c.ddu.town_band) {
      for (int t = 0; t < T; ++t) {
        int r = static_cast<int>(h_vec.size());
        for (int z = 0; z < Z; ++z) h_trip.push_back({r, lay.xi_of(z, t), 1.0});
        double alpha = resolve_alpha(true, t);
        if (alpha != 0.0)
          for (int i : net.candidates) f_trip.push_back({r, lay.n_of.at(i), -alpha});
        h_vec.push_back(c.ddu.zeta_max[s][t]);
      }
      for (int t = 0; t < T; ++t) {
        int r = static_cast<int>(h_vec.size());
        for (int z = 0; z < Z; ++z) h_trip.push_back({r, lay.xi_of(z, t), -1.0});
        double alpha = resolve_alpha(false, t);
        if (alpha != 0.0)
          for (int i : net.candidates) f_trip.push_back({r, lay.n_of.at(i), alpha});
        h_vec.push_back(-c.ddu.zeta_min[s][t]);
      }
    }
    const int m_xi = static_cast<int>(h_vec.size());
    blk.h = std::move(h_vec);
    blk.H = SparseMatrix::from_triplets(m_xi, lay.n_xi(), std::move(h_trip));
    blk.F = SparseMatrix::from_triplets(m_xi, n_x, std::move(f_trip));

    inst.scenarios.push_back(std::move(blk));
  }
  return cc;
}

std::vector<oracle::IntRange> investment_bounds(const NhempCase& c) {
  CompiledCase cc = build_compact_instance(c);  // reuse the layout indices
  std::vector<oracle::IntRange> bounds(cc.inst.n_x(), {0, 0});
  const auto& cat = c.catalog;
  const auto& lay = cc.layout;
  for (int i : c.network.candidates) {
    bounds[lay.u_of.at(i)] = {0, 1};
    for (const auto& r : cat.res) bounds[lay.count_of.at(r.name).at(i)] = {0, r.count_max};
    for (const auto& e : cat.ess) bounds[lay.count_of.at(e.name).at(i)] = {0, e.count_max};
    bounds[lay.count_of.at("elz").at(i)] = {0, cat.elz.count_max};
    bounds[lay.count_of.at("ht").at(i)] = {0, cat.ht.count_max};
    bounds[lay.n_of.at(i)] = {0, cat.hd.count_max};
  }
  return bounds;
}

PlanningSolution to_planning_solution(const EngineResult& r) {
  return PlanningSolution{r.x, r.worst, r.objective};
}

PlanningMetrics compute_metrics(const CompiledCase& cc, const PlanningSolution& sol) {
  const NhempLayout& lay = cc.layout;
  const CompactInstance& inst = cc.inst;
  if (static_cast<int>(sol.worst.size()) != lay.S)
    throw CaseError("solution is missing per-scenario recourse values");
  PlanningMetrics m;
  for (int i = 0; i < inst.n_x(); ++i) m.phi_capex += inst.c[i] * sol.x.x[i];
  for (int s = 0; s < lay.S; ++s) m.phi_om += inst.scenarios[s].pi * sol.worst[s].value;
  m.phi = m.phi_capex + m.phi_om;

  for (int ci = 0; ci < lay.num_cand(); ++ci) {
    double sum = 0;
    for (int s = 0; s < lay.S; ++s)
      for (int t = 0; t < lay.T; ++t) sum += sol.worst[s].y[lay.gl(ci, t)];
    m.gl_bar_i[lay.candidates[ci]] = sum / (lay.S * lay.T);
  }
  m.gl_bar = 0;
  for (const auto& [node, v] : m.gl_bar_i) m.gl_bar += v;

  double sum_u = 0, count = 0;
  m.max_u = -std::numeric_limits<double>::infinity();
  m.min_u = std::numeric_limits<double>::infinity();
  for (int s = 0; s < lay.S; ++s)
    for (int t = 0; t < lay.T; ++t)
      for (int node = 1; node < lay.node_count; ++node) {
        double u = sol.worst[s].y[lay.u_volt(node, t)];
        m.max_u = std::max(m.max_u, u);
        m.min_u = std::min(m.min_u, u);
        sum_u += u;
        count += 1;
      }
  m.ave_u = sum_u / count;
  double ss = 0;
  for (int s = 0; s < lay.S; ++s)
    for (int t = 0; t < lay.T; ++t)
      for (int node = 1; node < lay.node_count; ++node) {
        double d = sol.worst[s].y[lay.u_volt(node, t)] - m.ave_u;
        ss += d * d;
      }
  m.var_u = count > 1 ? ss / (count - 1) : 0.0;
  return m;
}

std::pair<double, double> die_value(double phi_fixed, double phi_ddu) {
  double v = phi_fixed - phi_ddu;
  double rel = phi_fixed != 0.0 ? v / std::fabs(phi_fixed) : 0.0;
  return {v, rel};
}

DieResult compute_die_value(const CompiledCase& ddu_case, const InvestmentVector& plan_from_diu,
                            const EngineConfig& cfg) {
  const CompactInstance& inst = ddu_case.inst;
  if (!upper_level_feasible(inst, plan_from_diu))
    throw CaseError("fixed plan is infeasible for the upper level");
  DieResult res;
  auto backend = make_backend(cfg.backend);
  double phi_fixed = 0;
  for (int i = 0; i < inst.n_x(); ++i) phi_fixed += inst.c[i] * plan_from_diu.x[i];
  for (int s = 0; s < inst.num_scenarios(); ++s)
    phi_fixed += inst.scenarios[s].pi *
                 solve_scenario_subproblem(inst, s, plan_from_diu, cfg, *backend, nullptr).value;
  res.phi_fixed = phi_fixed;
  res.ddu_run = run(inst, cfg);
  res.phi_ddu = res.ddu_run.objective;
  std::tie(res.v_die, res.v_die_rel) = die_value(res.phi_fixed, res.phi_ddu);
  return res;
}

NhempCase scale_induced_coefficients(NhempCase c, double chi) {
  for (auto& [id, dz] : c.ddu.zones) {
    for (double& v : dz.gamma_max) v *= chi;
    for (double& v : dz.gamma_min) v *= chi;
  }
  for (double& v : c.ddu.alpha_max) v *= chi;
  for (double& v : c.ddu.alpha_min) v *= chi;
  return c;
}

std::vector<SweepRow> run_die_sensitivity(const NhempCase& c, std::span<const double> chi_grid) {
  for (double chi : chi_grid)
    if (chi < 0.0 || chi > 1.0) throw std::invalid_argument("chi values must lie in [0,1]");

  // Reference plan: the decision-independent solve (chi = 0).
  CompiledCase diu = build_compact_instance(scale_induced_coefficients(c, 0.0));
  EngineResult diu_run = run(diu.inst, c.engine);
  if (diu_run.status != EngineStatus::Converged)
    throw CaseError("sweep reference solve did not converge: " +
                    std::string(to_string(diu_run.status)));

  std::vector<SweepRow> rows;
  auto backend = make_backend(c.engine.backend);
  for (double chi : chi_grid) {
    CompiledCase cc = build_compact_instance(scale_induced_coefficients(c, chi));
    EngineResult r = run(cc.inst, c.engine);
    SweepRow row;
    row.chi = chi;
    row.status = r.status;
    row.iterations = r.iterations;
    row.phi = r.objective;
    row.gl_bar = compute_metrics(cc, to_planning_solution(r)).gl_bar;
    double phi_fixed = 0;
    for (int i = 0; i < cc.inst.n_x(); ++i) phi_fixed += cc.inst.c[i] * diu_run.x.x[i];
    for (int s = 0; s < cc.inst.num_scenarios(); ++s)
      phi_fixed +=
          cc.inst.scenarios[s].pi *
          solve_scenario_subproblem(cc.inst, s, diu_run.x, c.engine, *backend, nullptr).value;
    row.v_die_rel = die_value(phi_fixed, r.objective).second;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace trirobust
