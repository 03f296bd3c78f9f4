#pragma once

#include <array>
#include <map>
#include <optional>

#include "trirobust/engine.hpp"
#include "trirobust/oracle.hpp"

namespace trirobust {

struct CaseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Line {
  int from = 0, to = 0;
  double r_ohm = 0, x_ohm = 0, s_max_kva = 0;
};

/// Radial distribution network rooted at node 0 (the MV substation).
struct DistributionNetwork {
  int node_count = 0;
  std::vector<Line> lines;
  double u0_kv = 10.0;
  double u_min_kv = 9.3, u_max_kv = 10.7;
  double s_mv_max_kva = 0;
  std::vector<int> candidates;            // candidate microgrid nodes
  std::map<int, double> s_lv_max_kva;     // LV substation cap per candidate
};

struct Zone {
  std::string id;
  std::vector<int> candidates;  // subset of network.candidates, disjoint across zones
};

struct ResComponent {
  std::string name;
  double cost_per_unit_yr = 0;  // $/kW/yr scaled by unit_kw at compile time
  double unit_kw = 0;
  int count_min = 0, count_max = 0;
};

struct EssComponent {
  std::string name;
  double cost_per_unit_yr = 0;
  double unit_kw = 0, unit_kwh = 0;
  double eta_ch = 1, eta_dis = 1, dod = 1;
  double kappa = 0;  // degradation price, $/kW
  int count_min = 0, count_max = 0;
};

struct ElzComponent {
  double cost_per_unit_yr = 0;
  double unit_kw = 0;
  double efficiency = 0.76;
  double lhv_kw_per_kg = 33.33;
  int count_min = 0, count_max = 0;
};

struct HtComponent {
  double cost_per_unit_yr = 0;  // $/kg/yr scaled by unit_kg
  double unit_kg = 0;
  double dissipation = 0.02;
  int count_min = 0, count_max = 0;
};

struct HdComponent {
  double cost_per_yr = 0;
  double service_rate_kg_h = 108;
  int count_min = 0, count_max = 0;
};

struct ComponentCatalog {
  double c_hem_yr = 0;                   // fixed microgrid cost per deployment
  double tan_phi_min = 0, tan_phi_max = 0;  // RES reactive band (tangent of angle)
  std::vector<ResComponent> res;
  std::vector<EssComponent> ess;
  ElzComponent elz;
  HtComponent ht;
  HdComponent hd;
};

struct Scenario {
  double pi = 0;
  // dense [node][t] tables; row 0 (root) is all zeros
  std::vector<std::vector<double>> pd_kw;
  std::vector<std::vector<double>> tan_phi_pl;
  std::map<std::string, std::vector<std::vector<double>>> delta;  // per RES name
  std::vector<double> price_import;    // $/kWh per t
  std::vector<double> price_retail_e;  // $/kWh per t
  double price_h2_purchase = 0;        // $/kg
  double price_h2_retail = 0;          // $/kg
  double penalty_unmet = 0;            // $/kWh
  std::map<std::string, std::vector<double>> g_pur_max;  // zone id -> per t, kg/h
};

struct ScenarioSet {
  double sigma = 365;      // typical-day-to-year scale
  double delta_t_h = 1;
  int period_count = 0;
  std::vector<Scenario> items;
};

struct DduZone {
  std::vector<std::vector<double>> xi_max, xi_min;  // [s][t], kg/h
  std::vector<double> gamma_max, gamma_min;         // [t], kg/h per HD
};

struct DduCoefficients {
  std::map<std::string, DduZone> zones;
  bool town_band = true;
  std::vector<std::vector<double>> zeta_max, zeta_min;  // [s][t]
  std::vector<double> alpha_max, alpha_min;  // [t]; empty -> zonal mean of gamma
};

struct NhempCase {
  std::string name;
  DistributionNetwork network;
  std::vector<Zone> zones;
  ComponentCatalog catalog;
  ScenarioSet scenarios;
  DduCoefficients ddu;
  EngineConfig engine;
  int polygon_segments = 12;
};

/// Index maps from case entities into the compact vectors.
struct NhempLayout {
  int T = 0, S = 0, node_count = 0;
  std::vector<int> candidates;
  std::vector<std::string> zone_ids;
  int num_res = 0, num_ess = 0;

  // x indices
  std::map<int, int> u_of;                                 // node -> x index
  std::map<std::string, std::map<int, int>> count_of;      // component -> node -> x index
  std::map<int, int> n_of;                                 // node -> x index (HD count)

  // xi index, zone-major
  int xi_of(int z, int t) const { return z * T + t; }
  int n_xi() const { return static_cast<int>(zone_ids.size()) * T; }

  // y family offsets (identical across scenarios)
  int y_dim = 0;
  int off_p_mv = 0, off_q_mv = 0, off_res_p = 0, off_res_q = 0;
  int off_pc = 0, off_pd = 0, off_soc = 0;
  int off_p_elz = 0, off_g_elz = 0, off_loh = 0, off_g_pur = 0;
  int off_p_lv = 0, off_q_lv = 0, off_gl = 0;
  int off_pl = 0, off_ls = 0, off_ul = 0, off_fp = 0, off_fq = 0, off_u = 0;

  int num_cand() const { return static_cast<int>(candidates.size()); }
  int p_mv(int t) const { return off_p_mv + t; }
  int q_mv(int t) const { return off_q_mv + t; }
  int res_p(int k, int ci, int t) const { return off_res_p + (k * num_cand() + ci) * T + t; }
  int res_q(int k, int ci, int t) const { return off_res_q + (k * num_cand() + ci) * T + t; }
  int ess_pc(int e, int ci, int t) const { return off_pc + (e * num_cand() + ci) * T + t; }
  int ess_pd(int e, int ci, int t) const { return off_pd + (e * num_cand() + ci) * T + t; }
  int ess_soc(int e, int ci, int t) const { return off_soc + (e * num_cand() + ci) * T + t; }
  int p_elz(int ci, int t) const { return off_p_elz + ci * T + t; }
  int g_elz(int ci, int t) const { return off_g_elz + ci * T + t; }
  int loh(int ci, int t) const { return off_loh + ci * T + t; }
  int g_pur(int ci, int t) const { return off_g_pur + ci * T + t; }
  int p_lv(int ci, int t) const { return off_p_lv + ci * T + t; }
  int q_lv(int ci, int t) const { return off_q_lv + ci * T + t; }
  int gl(int ci, int t) const { return off_gl + ci * T + t; }
  int pl(int node, int t) const { return off_pl + (node - 1) * T + t; }  // node >= 1
  int ls(int node, int t) const { return off_ls + (node - 1) * T + t; }
  int ul(int z, int t) const { return off_ul + z * T + t; }
  int fp(int line, int t) const { return off_fp + line * T + t; }
  int fq(int line, int t) const { return off_fq + line * T + t; }
  int u_volt(int node, int t) const { return off_u + node * T + t; }
};

struct CompiledCase {
  CompactInstance inst;
  NhempLayout layout;
  std::vector<std::string> warnings;
};

/// Compiles the planning case into the compact trilevel form. Throws
/// CaseError on structural defects (non-radial network, zone without
/// candidates, missing series); soft modelling checks land in warnings.
CompiledCase build_compact_instance(const NhempCase& c);

/// Inscribed regular-k-gon linearization of p^2 + q^2 <= cap^2, as rows
/// a*p + b*q <= cap. Requires k >= 4 and even; conservative (never admits a
/// point outside the disk). Max radial under-approximation cap*(1-cos(pi/k)).
std::vector<std::array<double, 3>> polygonal_quadratic_cut_set(double cap, int segments);

/// Integer box for exhaustive enumeration, from the catalog count bounds.
std::vector<oracle::IntRange> investment_bounds(const NhempCase& c);

struct PlanningSolution {
  InvestmentVector x;
  std::vector<ScenarioOutcome> worst;  // per scenario worst-case recourse
  double objective = 0;
};

PlanningSolution to_planning_solution(const EngineResult& r);

struct PlanningMetrics {
  double phi = 0, phi_capex = 0, phi_om = 0;  // $/yr; phi = capex + om
  std::map<int, double> gl_bar_i;             // candidate node -> kg/h
  double gl_bar = 0;
  double max_u = 0, min_u = 0, ave_u = 0, var_u = 0;  // kV, kV^2
  std::optional<double> v_die, v_die_rel;
};

PlanningMetrics compute_metrics(const CompiledCase& cc, const PlanningSolution& sol);

/// (V_DIE, relative V_DIE as a fraction of |phi_fixed|).
std::pair<double, double> die_value(double phi_fixed, double phi_ddu);

struct DieResult {
  double phi_fixed = 0;  // DIU-optimal plan re-evaluated under the DDU sets
  double phi_ddu = 0;    // fresh DDU solve
  double v_die = 0;
  double v_die_rel = 0;
  EngineResult ddu_run;
};

DieResult compute_die_value(const CompiledCase& ddu_case, const InvestmentVector& plan_from_diu,
                            const EngineConfig& cfg);

/// Scales every induced coefficient (gamma and alpha families) by chi.
NhempCase scale_induced_coefficients(NhempCase c, double chi);

struct SweepRow {
  double chi = 0;
  double phi = 0;
  double gl_bar = 0;
  double v_die_rel = 0;
  int iterations = 0;
  EngineStatus status = EngineStatus::BackendError;
};

/// chi grid in [0,1]; re-solves the case per chi and reports trend metrics.
std::vector<SweepRow> run_die_sensitivity(const NhempCase& c, std::span<const double> chi_grid);

}  // namespace trirobust
