#include "trirobust/io.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

namespace trirobust {

using nlohmann::json;

namespace {

const json& get(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw IoError(path + "." + key + ": missing");
  return *it;
}

double num(const json& j, const char* key, const std::string& path) {
  const json& v = get(j, key, path);
  if (!v.is_number()) throw IoError(path + "." + key + ": expected a number");
  return v.get<double>();
}

double num_or(const json& j, const char* key, double def) {
  auto it = j.find(key);
  return it == j.end() ? def : it->get<double>();
}

int int_field(const json& j, const char* key, const std::string& path) {
  const json& v = get(j, key, path);
  if (!v.is_number_integer()) throw IoError(path + "." + key + ": expected an integer");
  return v.get<int>();
}

int int_or(const json& j, const char* key, int def) {
  auto it = j.find(key);
  return it == j.end() ? def : it->get<int>();
}

std::string str_field(const json& j, const char* key, const std::string& path) {
  const json& v = get(j, key, path);
  if (!v.is_string()) throw IoError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> vec_field(const json& j, const std::string& path) {
  if (!j.is_array()) throw IoError(path + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw IoError(path + ": expected numeric entries");
    out.push_back(v.get<double>());
  }
  return out;
}

/// scalar -> T copies; array of length T -> as-is.
std::vector<double> series(const json& j, int T, const std::string& path) {
  if (j.is_number()) return std::vector<double>(T, j.get<double>());
  std::vector<double> v = vec_field(j, path);
  if (static_cast<int>(v.size()) != T)
    throw IoError(path + ": expected " + std::to_string(T) + " entries");
  return v;
}

/// scalar | array[T] -> same series per scenario; array of arrays -> [S][T].
std::vector<std::vector<double>> scenario_table(const json& j, int S, int T,
                                                const std::string& path) {
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    if (static_cast<int>(j.size()) != S)
      throw IoError(path + ": expected " + std::to_string(S) + " scenario rows");
    std::vector<std::vector<double>> out;
    for (std::size_t s = 0; s < j.size(); ++s)
      out.push_back(series(j[s], T, path + "[" + std::to_string(s) + "]"));
    return out;
  }
  return std::vector<std::vector<double>>(S, series(j, T, path));
}

/// Per-node table. scalar | array[T]: broadcast to non-root nodes; object
/// keyed by node id: listed nodes only, others zero.
std::vector<std::vector<double>> node_table(const json& j, int N, int T,
                                            const std::string& path) {
  std::vector<std::vector<double>> out(N, std::vector<double>(T, 0.0));
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      int node = 0;
      auto [p, ec] = std::from_chars(it.key().data(), it.key().data() + it.key().size(), node);
      if (ec != std::errc() || node < 0 || node >= N)
        throw IoError(path + ": unknown node id '" + it.key() + "'");
      out[node] = series(it.value(), T, path + "." + it.key());
    }
    return out;
  }
  std::vector<double> v = series(j, T, path);
  for (int node = 1; node < N; ++node) out[node] = v;
  return out;
}

SparseMatrix matrix_from_json(const json& j, const std::string& path) {
  int rows = int_field(j, "rows", path);
  int cols = int_field(j, "cols", path);
  std::vector<Triplet> ts;
  const json& entries = get(j, "entries", path);
  if (!entries.is_array()) throw IoError(path + ".entries: expected an array");
  for (const auto& e : entries) {
    if (!e.is_array() || e.size() != 3) throw IoError(path + ".entries: expected [row,col,value]");
    ts.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  try {
    return SparseMatrix::from_triplets(rows, cols, std::move(ts));
  } catch (const std::exception& ex) {
    throw IoError(path + ": " + ex.what());
  }
}

json matrix_to_json(const SparseMatrix& m) {
  json entries = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    auto cols = m.row_cols(r);
    auto vals = m.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k)
      entries.push_back(json::array({r, cols[k], vals[k]}));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& ex) {
    throw IoError(path + ": " + ex.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << content;
  if (!out) throw IoError(path + ": write failed");
}

// ---- sparse-triplet binary container ----

constexpr char kMagic[8] = {'T', 'R', 'C', 'I', 'N', 'S', 'T', '1'};

struct BinWriter {
  std::ofstream out;
  explicit BinWriter(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw IoError(path + ": cannot open for writing");
  }
  void raw(const void* p, std::size_t n) { out.write(static_cast<const char*>(p), n); }
  void i64(long long v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void vec(const std::vector<double>& v) {
    i64(static_cast<long long>(v.size()));
    raw(v.data(), v.size() * 8);
  }
  void mat(const SparseMatrix& m) {
    i64(m.rows());
    i64(m.cols());
    i64(m.nnz());
    for (int r = 0; r < m.rows(); ++r) {
      auto cols = m.row_cols(r);
      auto vals = m.row_vals(r);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        i64(r);
        i64(cols[k]);
        f64(vals[k]);
      }
    }
  }
};

struct BinReader {
  std::ifstream in;
  std::string path;
  explicit BinReader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw IoError(p + ": cannot open");
  }
  void raw(void* p, std::size_t n) {
    in.read(static_cast<char*>(p), n);
    if (!in) throw IoError(path + ": truncated binary container");
  }
  long long i64() {
    long long v;
    raw(&v, 8);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
  std::vector<double> vec() {
    long long n = i64();
    if (n < 0 || n > (1LL << 32)) throw IoError(path + ": corrupt vector length");
    std::vector<double> v(n);
    raw(v.data(), n * 8);
    return v;
  }
  SparseMatrix mat() {
    long long rows = i64(), cols = i64(), nnz = i64();
    if (rows < 0 || cols < 0 || nnz < 0) throw IoError(path + ": corrupt matrix header");
    std::vector<Triplet> ts;
    ts.reserve(nnz);
    for (long long k = 0; k < nnz; ++k) {
      long long r = i64(), c = i64();
      double v = f64();
      ts.push_back({static_cast<int>(r), static_cast<int>(c), v});
    }
    return SparseMatrix::from_triplets(static_cast<int>(rows), static_cast<int>(cols),
                                       std::move(ts));
  }
};

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string resolve_backend(const std::string& configured) {
  const char* env = std::getenv("TRIROBUST_MILP_BACKEND");
  if (env && *env) return env;
  return configured;
}

EngineConfig parse_engine_config(const json& j) {
  EngineConfig cfg;
  if (auto it = j.find("engine"); it != j.end()) {
    const json& e = *it;
    cfg.epsilon = num_or(e, "epsilon", cfg.epsilon);
    cfg.max_iter = int_or(e, "max_iter", cfg.max_iter);
    cfg.eta_floor = num_or(e, "eta_floor", cfg.eta_floor);
    if (e.contains("parallel_sp")) cfg.parallel_sp = e["parallel_sp"].get<bool>();
    if (e.contains("perturb_degenerate"))
      cfg.perturb_degenerate = e["perturb_degenerate"].get<bool>();
    if (e.contains("mode")) {
      std::string mode = e["mode"].get<std::string>();
      if (mode == "pccg")
        cfg.mode = EngineMode::Pccg;
      else if (mode == "bccg")
        cfg.mode = EngineMode::Bccg;
      else
        throw IoError("config.engine.mode: expected 'pccg' or 'bccg'");
    }
    if (e.contains("seed_x")) {
      std::vector<int> sx;
      for (const auto& v : e["seed_x"]) sx.push_back(v.get<int>());
      cfg.seed_x = std::move(sx);
    }
  }
  if (auto it = j.find("bigm"); it != j.end()) {
    cfg.bigm_mp = num_or(*it, "mp", cfg.bigm_mp);
    cfg.bigm_sp = num_or(*it, "sp", cfg.bigm_sp);
  }
  if (auto it = j.find("milp"); it != j.end()) {
    cfg.milp_gap = num_or(*it, "gap", cfg.milp_gap);
    cfg.time_limit_s = num_or(*it, "time_limit_s", cfg.time_limit_s);
    if (it->contains("backend")) cfg.backend = (*it)["backend"].get<std::string>();
  }
  cfg.backend = resolve_backend(cfg.backend);
  return cfg;
}

json engine_config_to_json(const EngineConfig& cfg) {
  json e{{"epsilon", cfg.epsilon},
         {"max_iter", cfg.max_iter},
         {"eta_floor", cfg.eta_floor},
         {"parallel_sp", cfg.parallel_sp},
         {"perturb_degenerate", cfg.perturb_degenerate},
         {"mode", to_string(cfg.mode)}};
  if (cfg.seed_x) e["seed_x"] = *cfg.seed_x;
  json milp{{"gap", cfg.milp_gap}, {"backend", cfg.backend}};
  if (std::isfinite(cfg.time_limit_s)) milp["time_limit_s"] = cfg.time_limit_s;
  return json{{"engine", std::move(e)},
              {"bigm", {{"mp", cfg.bigm_mp}, {"sp", cfg.bigm_sp}}},
              {"milp", std::move(milp)}};
}

NhempCase case_from_json(const json& j) {
  NhempCase c;
  if (j.value("kind", "") != "nhemp-case")
    throw IoError("kind: expected 'nhemp-case'");
  c.name = j.value("name", "case");
  c.polygon_segments = int_or(j, "polygon_segments", 12);

  const json& jn = get(j, "network", "");
  c.network.node_count = int_field(jn, "node_count", "network");
  c.network.u0_kv = num_or(jn, "u0_kv", 10.0);
  c.network.u_min_kv = num_or(jn, "u_min_kv", 9.3);
  c.network.u_max_kv = num_or(jn, "u_max_kv", 10.7);
  c.network.s_mv_max_kva = num(jn, "s_mv_max_kva", "network");
  for (const auto& jl : get(jn, "lines", "network")) {
    Line l;
    l.from = int_field(jl, "from", "network.lines[]");
    l.to = int_field(jl, "to", "network.lines[]");
    l.r_ohm = num(jl, "r_ohm", "network.lines[]");
    l.x_ohm = num(jl, "x_ohm", "network.lines[]");
    l.s_max_kva = num(jl, "s_max_kva", "network.lines[]");
    c.network.lines.push_back(l);
  }
  for (const auto& jc : get(jn, "candidates", "network")) {
    int node = int_field(jc, "node", "network.candidates[]");
    c.network.candidates.push_back(node);
    c.network.s_lv_max_kva[node] = num(jc, "s_lv_max_kva", "network.candidates[]");
  }

  for (const auto& jz : get(j, "zones", "")) {
    Zone z;
    z.id = str_field(jz, "id", "zones[]");
    for (const auto& v : get(jz, "candidates", "zones[]")) {
      int node = v.get<int>();
      if (std::find(c.network.candidates.begin(), c.network.candidates.end(), node) ==
          c.network.candidates.end())
        throw IoError("zones[" + z.id + "]: candidate " + std::to_string(node) +
                      " is not a network candidate node");
      z.candidates.push_back(node);
    }
    c.zones.push_back(std::move(z));
  }

  const json& jc = get(j, "catalog", "");
  c.catalog.c_hem_yr = num(jc, "c_hem_yr", "catalog");
  c.catalog.tan_phi_min = num_or(jc, "tan_phi_min", 0.0);
  c.catalog.tan_phi_max = num_or(jc, "tan_phi_max", 0.0);
  for (const auto& jr : get(jc, "res", "catalog")) {
    ResComponent r;
    r.name = str_field(jr, "name", "catalog.res[]");
    r.cost_per_unit_yr = num(jr, "cost_per_unit_yr", "catalog.res[]");
    r.unit_kw = num(jr, "unit_kw", "catalog.res[]");
    r.count_min = int_or(jr, "count_min", 0);
    r.count_max = int_field(jr, "count_max", "catalog.res[]");
    c.catalog.res.push_back(std::move(r));
  }
  for (const auto& je : get(jc, "ess", "catalog")) {
    EssComponent e;
    e.name = str_field(je, "name", "catalog.ess[]");
    e.cost_per_unit_yr = num(je, "cost_per_unit_yr", "catalog.ess[]");
    e.unit_kw = num(je, "unit_kw", "catalog.ess[]");
    e.unit_kwh = num(je, "unit_kwh", "catalog.ess[]");
    e.eta_ch = num(je, "eta_ch", "catalog.ess[]");
    e.eta_dis = num(je, "eta_dis", "catalog.ess[]");
    e.dod = num(je, "dod", "catalog.ess[]");
    e.kappa = num_or(je, "kappa", 0.0);
    e.count_min = int_or(je, "count_min", 0);
    e.count_max = int_field(je, "count_max", "catalog.ess[]");
    c.catalog.ess.push_back(std::move(e));
  }
  {
    const json& je = get(jc, "elz", "catalog");
    c.catalog.elz.cost_per_unit_yr = num(je, "cost_per_unit_yr", "catalog.elz");
    c.catalog.elz.unit_kw = num(je, "unit_kw", "catalog.elz");
    c.catalog.elz.efficiency = num_or(je, "efficiency", 0.76);
    c.catalog.elz.lhv_kw_per_kg = num_or(je, "lhv_kw_per_kg", 33.33);
    c.catalog.elz.count_min = int_or(je, "count_min", 0);
    c.catalog.elz.count_max = int_field(je, "count_max", "catalog.elz");
  }
  {
    const json& je = get(jc, "ht", "catalog");
    c.catalog.ht.cost_per_unit_yr = num(je, "cost_per_unit_yr", "catalog.ht");
    c.catalog.ht.unit_kg = num(je, "unit_kg", "catalog.ht");
    c.catalog.ht.dissipation = num_or(je, "dissipation", 0.02);
    c.catalog.ht.count_min = int_or(je, "count_min", 0);
    c.catalog.ht.count_max = int_field(je, "count_max", "catalog.ht");
  }
  {
    const json& je = get(jc, "hd", "catalog");
    c.catalog.hd.cost_per_yr = num(je, "cost_per_yr", "catalog.hd");
    c.catalog.hd.service_rate_kg_h = num(je, "service_rate_kg_h", "catalog.hd");
    c.catalog.hd.count_min = int_or(je, "count_min", 0);
    c.catalog.hd.count_max = int_field(je, "count_max", "catalog.hd");
  }

  const json& js = get(j, "scenarios", "");
  c.scenarios.sigma = num_or(js, "sigma", 365.0);
  c.scenarios.delta_t_h = num_or(js, "delta_t_h", 1.0);
  c.scenarios.period_count = int_field(js, "period_count", "scenarios");
  const int T = c.scenarios.period_count;
  const int N = c.network.node_count;
  const json& items = get(js, "items", "scenarios");
  for (std::size_t s = 0; s < items.size(); ++s) {
    const std::string base = "scenarios[" + std::to_string(s) + "]";
    const json& ji = items[s];
    Scenario sn;
    sn.pi = num(ji, "pi", base);
    sn.pd_kw = node_table(get(ji, "pd_kw", base), N, T, base + ".pd_kw");
    sn.tan_phi_pl = node_table(get(ji, "tan_phi_pl", base), N, T, base + ".tan_phi_pl");
    const json& jd = get(ji, "delta", base);
    for (const auto& r : c.catalog.res) {
      auto it = jd.find(r.name);
      if (it == jd.end()) throw IoError(base + ".delta." + r.name + ": missing");
      // delta applies to every node; per-node maps are also accepted
      std::vector<std::vector<double>> table(N, std::vector<double>(T, 0.0));
      if (it->is_object()) {
        table = node_table(*it, N, T, base + ".delta." + r.name);
      } else {
        std::vector<double> v = series(*it, T, base + ".delta." + r.name);
        for (int node = 0; node < N; ++node) table[node] = v;
      }
      sn.delta[r.name] = std::move(table);
    }
    sn.price_import = series(get(ji, "price_import", base), T, base + ".price_import");
    sn.price_retail_e = series(get(ji, "price_retail_e", base), T, base + ".price_retail_e");
    sn.price_h2_purchase = num(ji, "price_h2_purchase", base);
    sn.price_h2_retail = num(ji, "price_h2_retail", base);
    sn.penalty_unmet = num(ji, "penalty_unmet", base);
    const json& jg = get(ji, "g_pur_max", base);
    for (const auto& z : c.zones) {
      auto it = jg.find(z.id);
      if (it == jg.end()) throw IoError(base + ".g_pur_max." + z.id + ": missing");
      sn.g_pur_max[z.id] = series(*it, T, base + ".g_pur_max." + z.id);
    }
    c.scenarios.items.push_back(std::move(sn));
  }
  const int S = static_cast<int>(c.scenarios.items.size());

  const json& jd = get(j, "ddu", "");
  if (jd.contains("town_band")) c.ddu.town_band = jd["town_band"].get<bool>();
  const json& jdz = get(jd, "zones", "ddu");
  for (const auto& z : c.zones) {
    auto it = jdz.find(z.id);
    if (it == jdz.end()) throw IoError("ddu.zones." + z.id + ": missing");
    DduZone dz;
    const std::string base = "ddu.zones." + z.id;
    dz.xi_max = scenario_table(get(*it, "xi_max", base), S, T, base + ".xi_max");
    dz.xi_min = scenario_table(get(*it, "xi_min", base), S, T, base + ".xi_min");
    dz.gamma_max = series(get(*it, "gamma_max", base), T, base + ".gamma_max");
    dz.gamma_min = series(get(*it, "gamma_min", base), T, base + ".gamma_min");
    c.ddu.zones[z.id] = std::move(dz);
  }
  if (c.ddu.town_band) {
    c.ddu.zeta_max = scenario_table(get(jd, "zeta_max", "ddu"), S, T, "ddu.zeta_max");
    c.ddu.zeta_min = scenario_table(get(jd, "zeta_min", "ddu"), S, T, "ddu.zeta_min");
  }
  if (jd.contains("alpha_max")) {
    c.ddu.alpha_max = series(jd["alpha_max"], T, "ddu.alpha_max");
    c.ddu.alpha_min = series(get(jd, "alpha_min", "ddu"), T, "ddu.alpha_min");
  }

  if (j.contains("config")) c.engine = parse_engine_config(j["config"]);
  return c;
}

json case_to_json(const NhempCase& c) {
  json j;
  j["kind"] = "nhemp-case";
  j["name"] = c.name;
  j["polygon_segments"] = c.polygon_segments;

  json lines = json::array();
  for (const auto& l : c.network.lines)
    lines.push_back({{"from", l.from},
                     {"to", l.to},
                     {"r_ohm", l.r_ohm},
                     {"x_ohm", l.x_ohm},
                     {"s_max_kva", l.s_max_kva}});
  json cands = json::array();
  for (int node : c.network.candidates)
    cands.push_back({{"node", node}, {"s_lv_max_kva", c.network.s_lv_max_kva.at(node)}});
  j["network"] = {{"node_count", c.network.node_count}, {"u0_kv", c.network.u0_kv},
                  {"u_min_kv", c.network.u_min_kv},     {"u_max_kv", c.network.u_max_kv},
                  {"s_mv_max_kva", c.network.s_mv_max_kva}, {"lines", std::move(lines)},
                  {"candidates", std::move(cands)}};

  json zones = json::array();
  for (const auto& z : c.zones) zones.push_back({{"id", z.id}, {"candidates", z.candidates}});
  j["zones"] = std::move(zones);

  json res = json::array();
  for (const auto& r : c.catalog.res)
    res.push_back({{"name", r.name},
                   {"cost_per_unit_yr", r.cost_per_unit_yr},
                   {"unit_kw", r.unit_kw},
                   {"count_min", r.count_min},
                   {"count_max", r.count_max}});
  json ess = json::array();
  for (const auto& e : c.catalog.ess)
    ess.push_back({{"name", e.name},
                   {"cost_per_unit_yr", e.cost_per_unit_yr},
                   {"unit_kw", e.unit_kw},
                   {"unit_kwh", e.unit_kwh},
                   {"eta_ch", e.eta_ch},
                   {"eta_dis", e.eta_dis},
                   {"dod", e.dod},
                   {"kappa", e.kappa},
                   {"count_min", e.count_min},
                   {"count_max", e.count_max}});
  j["catalog"] = {
      {"c_hem_yr", c.catalog.c_hem_yr},
      {"tan_phi_min", c.catalog.tan_phi_min},
      {"tan_phi_max", c.catalog.tan_phi_max},
      {"res", std::move(res)},
      {"ess", std::move(ess)},
      {"elz",
       {{"cost_per_unit_yr", c.catalog.elz.cost_per_unit_yr},
        {"unit_kw", c.catalog.elz.unit_kw},
        {"efficiency", c.catalog.elz.efficiency},
        {"lhv_kw_per_kg", c.catalog.elz.lhv_kw_per_kg},
        {"count_min", c.catalog.elz.count_min},
        {"count_max", c.catalog.elz.count_max}}},
      {"ht",
       {{"cost_per_unit_yr", c.catalog.ht.cost_per_unit_yr},
        {"unit_kg", c.catalog.ht.unit_kg},
        {"dissipation", c.catalog.ht.dissipation},
        {"count_min", c.catalog.ht.count_min},
        {"count_max", c.catalog.ht.count_max}}},
      {"hd",
       {{"cost_per_yr", c.catalog.hd.cost_per_yr},
        {"service_rate_kg_h", c.catalog.hd.service_rate_kg_h},
        {"count_min", c.catalog.hd.count_min},
        {"count_max", c.catalog.hd.count_max}}}};

  auto table_json = [](const std::vector<std::vector<double>>& t) {
    json out = json::object();
    for (std::size_t node = 0; node < t.size(); ++node) {
      bool all_zero = true;
      for (double v : t[node])
        if (v != 0.0) all_zero = false;
      if (!all_zero) out[std::to_string(node)] = t[node];
    }
    return out;
  };
  json items = json::array();
  for (const auto& sn : c.scenarios.items) {
    json ji;
    ji["pi"] = sn.pi;
    ji["pd_kw"] = table_json(sn.pd_kw);
    ji["tan_phi_pl"] = table_json(sn.tan_phi_pl);
    json jd = json::object();
    for (const auto& [name, table] : sn.delta) jd[name] = table_json(table);
    ji["delta"] = std::move(jd);
    ji["price_import"] = sn.price_import;
    ji["price_retail_e"] = sn.price_retail_e;
    ji["price_h2_purchase"] = sn.price_h2_purchase;
    ji["price_h2_retail"] = sn.price_h2_retail;
    ji["penalty_unmet"] = sn.penalty_unmet;
    json jg = json::object();
    for (const auto& [zid, v] : sn.g_pur_max) jg[zid] = v;
    ji["g_pur_max"] = std::move(jg);
    items.push_back(std::move(ji));
  }
  j["scenarios"] = {{"sigma", c.scenarios.sigma},
                    {"delta_t_h", c.scenarios.delta_t_h},
                    {"period_count", c.scenarios.period_count},
                    {"items", std::move(items)}};

  json jdz = json::object();
  for (const auto& [zid, dz] : c.ddu.zones)
    jdz[zid] = {{"xi_max", dz.xi_max},
                {"xi_min", dz.xi_min},
                {"gamma_max", dz.gamma_max},
                {"gamma_min", dz.gamma_min}};
  json jd{{"town_band", c.ddu.town_band}, {"zones", std::move(jdz)}};
  if (c.ddu.town_band) {
    jd["zeta_max"] = c.ddu.zeta_max;
    jd["zeta_min"] = c.ddu.zeta_min;
  }
  if (!c.ddu.alpha_max.empty()) {
    jd["alpha_max"] = c.ddu.alpha_max;
    jd["alpha_min"] = c.ddu.alpha_min;
  }
  j["ddu"] = std::move(jd);
  j["config"] = engine_config_to_json(c.engine);
  return j;
}

NhempCase load_case(const std::string& path) { return case_from_json(read_json_file(path)); }

void save_case(const NhempCase& c, const std::string& path) {
  write_text_file(path, case_to_json(c).dump(2) + "\n");
}

CompactInstance compact_from_json(const json& j) {
  if (j.value("kind", "") != "compact-instance")
    throw IoError("kind: expected 'compact-instance'");
  CompactInstance inst;
  inst.n_binary = int_field(j, "n_binary", "");
  inst.n_integer = int_field(j, "n_integer", "");
  inst.c = vec_field(get(j, "c", ""), "c");
  inst.upper_b = vec_field(get(j, "upper_b", ""), "upper_b");
  inst.upper_a = matrix_from_json(get(j, "upper_a", ""), "upper_a");
  const json& js = get(j, "scenarios", "");
  for (std::size_t s = 0; s < js.size(); ++s) {
    const std::string base = "scenarios[" + std::to_string(s) + "]";
    const json& jb = js[s];
    ScenarioBlock blk;
    blk.pi = num(jb, "pi", base);
    blk.d = vec_field(get(jb, "d", base), base + ".d");
    blk.f = vec_field(get(jb, "f", base), base + ".f");
    blk.h = vec_field(get(jb, "h", base), base + ".h");
    blk.H = matrix_from_json(get(jb, "H", base), base + ".H");
    blk.F = matrix_from_json(get(jb, "F", base), base + ".F");
    blk.B = matrix_from_json(get(jb, "B", base), base + ".B");
    blk.G = matrix_from_json(get(jb, "G", base), base + ".G");
    blk.E = matrix_from_json(get(jb, "E", base), base + ".E");
    inst.scenarios.push_back(std::move(blk));
  }
  return inst;
}

json compact_to_json(const CompactInstance& inst, std::span<const oracle::IntRange> x_bounds) {
  json j;
  j["kind"] = "compact-instance";
  j["n_binary"] = inst.n_binary;
  j["n_integer"] = inst.n_integer;
  j["c"] = inst.c;
  j["upper_a"] = matrix_to_json(inst.upper_a);
  j["upper_b"] = inst.upper_b;
  json scen = json::array();
  for (const auto& blk : inst.scenarios)
    scen.push_back({{"pi", blk.pi},
                    {"d", blk.d},
                    {"f", blk.f},
                    {"h", blk.h},
                    {"H", matrix_to_json(blk.H)},
                    {"F", matrix_to_json(blk.F)},
                    {"B", matrix_to_json(blk.B)},
                    {"G", matrix_to_json(blk.G)},
                    {"E", matrix_to_json(blk.E)}});
  j["scenarios"] = std::move(scen);
  if (!x_bounds.empty()) {
    json jb = json::array();
    for (const auto& r : x_bounds) jb.push_back(json::array({r.lo, r.hi}));
    j["x_bounds"] = std::move(jb);
  }
  return j;
}

CompactDocument load_compact_doc(const std::string& path) {
  // Sniff the sparse-triplet binary container by its magic bytes.
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");
    char magic[8] = {};
    in.read(magic, 8);
    if (in && std::memcmp(magic, kMagic, 8) == 0) {
      BinReader r(path);
      char m2[8];
      r.raw(m2, 8);
      CompactDocument doc;
      doc.inst.n_binary = static_cast<int>(r.i64());
      doc.inst.n_integer = static_cast<int>(r.i64());
      doc.inst.c = r.vec();
      doc.inst.upper_a = r.mat();
      doc.inst.upper_b = r.vec();
      long long S = r.i64();
      for (long long s = 0; s < S; ++s) {
        ScenarioBlock blk;
        blk.pi = r.f64();
        blk.d = r.vec();
        blk.f = r.vec();
        blk.h = r.vec();
        blk.H = r.mat();
        blk.F = r.mat();
        blk.B = r.mat();
        blk.G = r.mat();
        blk.E = r.mat();
        doc.inst.scenarios.push_back(std::move(blk));
      }
      long long has_bounds = r.i64();
      if (has_bounds) {
        long long n = r.i64();
        for (long long i = 0; i < n; ++i) {
          int lo = static_cast<int>(r.i64());
          int hi = static_cast<int>(r.i64());
          doc.x_bounds.push_back({lo, hi});
        }
      }
      return doc;
    }
  }
  json j = read_json_file(path);
  CompactDocument doc;
  doc.inst = compact_from_json(j);
  if (j.contains("x_bounds"))
    for (const auto& e : j["x_bounds"]) doc.x_bounds.push_back({e[0].get<int>(), e[1].get<int>()});
  if (j.contains("config")) {
    doc.config = parse_engine_config(j["config"]);
    doc.has_config = true;
  }
  return doc;
}

CompactInstance load_compact(const std::string& path) { return load_compact_doc(path).inst; }

void save_compact(const CompactInstance& inst, const std::string& path, bool binary,
                  std::span<const oracle::IntRange> x_bounds) {
  if (!binary) {
    write_text_file(path, compact_to_json(inst, x_bounds).dump(2) + "\n");
    return;
  }
  BinWriter w(path);
  w.raw(kMagic, 8);
  w.i64(inst.n_binary);
  w.i64(inst.n_integer);
  w.vec(inst.c);
  w.mat(inst.upper_a);
  w.vec(inst.upper_b);
  w.i64(inst.num_scenarios());
  for (const auto& blk : inst.scenarios) {
    w.f64(blk.pi);
    w.vec(blk.d);
    w.vec(blk.f);
    w.vec(blk.h);
    w.mat(blk.H);
    w.mat(blk.F);
    w.mat(blk.B);
    w.mat(blk.G);
    w.mat(blk.E);
  }
  w.i64(x_bounds.empty() ? 0 : 1);
  if (!x_bounds.empty()) {
    w.i64(static_cast<long long>(x_bounds.size()));
    for (const auto& r : x_bounds) {
      w.i64(r.lo);
      w.i64(r.hi);
    }
  }
  if (!w.out) throw IoError(path + ": write failed");
}

void emit_trace(const EngineResult& result, const std::string& path) {
  std::string csv = "iter,lb,ub,gap,master_s,sp_total_s\n";
  for (const auto& r : result.trace) {
    csv += std::to_string(r.iter);
    csv += ',';
    csv += format_double(r.lb);
    csv += ',';
    csv += format_double(r.ub);
    csv += ',';
    csv += format_double(r.gap);
    csv += ',';
    csv += format_double(r.master_s);
    csv += ',';
    csv += format_double(r.sp_total_s);
    csv += '\n';
  }
  write_text_file(path, csv);
}

void emit_solution(const EngineResult& result, const std::string& path,
                   const NhempLayout* layout) {
  json j;
  j["kind"] = "solution";
  j["status"] = to_string(result.status);
  j["objective"] = result.objective;
  j["lower_bound"] = result.lower_bound;
  j["iterations"] = result.iterations;
  j["total_s"] = result.total_s;
  j["x"] = result.x.x;
  json scen = json::array();
  for (const auto& o : result.worst)
    scen.push_back({{"q", o.value}, {"xi", o.xi}, {"y", o.y}, {"lambda", o.lambda}});
  j["scenarios"] = std::move(scen);
  if (!result.warnings.empty()) j["warnings"] = result.warnings;
  if (layout && !result.x.x.empty()) {
    json u = json::object(), counts = json::object(), hd = json::object();
    for (const auto& [node, idx] : layout->u_of) u[std::to_string(node)] = result.x.x[idx];
    for (const auto& [name, per_node] : layout->count_of) {
      json jn = json::object();
      for (const auto& [node, idx] : per_node) jn[std::to_string(node)] = result.x.x[idx];
      counts[name] = std::move(jn);
    }
    for (const auto& [node, idx] : layout->n_of) hd[std::to_string(node)] = result.x.x[idx];
    j["investment"] = {{"u", std::move(u)}, {"counts", std::move(counts)},
                       {"hd", std::move(hd)}};
  }
  write_text_file(path, j.dump(2) + "\n");
}

PlanningSolution load_solution(const std::string& path) {
  json j = read_json_file(path);
  if (j.value("kind", "") != "solution") throw IoError(path + ": not a solution file");
  PlanningSolution sol;
  for (const auto& v : get(j, "x", "")) sol.x.x.push_back(v.get<int>());
  sol.objective = num(j, "objective", "");
  for (const auto& js : get(j, "scenarios", "")) {
    ScenarioOutcome o;
    o.value = num(js, "q", "scenarios[]");
    o.xi = vec_field(get(js, "xi", "scenarios[]"), "scenarios[].xi");
    o.y = vec_field(get(js, "y", "scenarios[]"), "scenarios[].y");
    o.lambda = vec_field(get(js, "lambda", "scenarios[]"), "scenarios[].lambda");
    sol.worst.push_back(std::move(o));
  }
  return sol;
}

void emit_metrics_csv(const PlanningMetrics& m, const std::string& path) {
  std::string csv = "metric,value\n";
  auto row = [&](const std::string& k, double v) { csv += k + "," + format_double(v) + "\n"; };
  row("phi", m.phi);
  row("phi_capex", m.phi_capex);
  row("phi_om", m.phi_om);
  row("gl_bar", m.gl_bar);
  for (const auto& [node, v] : m.gl_bar_i) row("gl_bar_node_" + std::to_string(node), v);
  row("max_u", m.max_u);
  row("min_u", m.min_u);
  row("ave_u", m.ave_u);
  row("var_u", m.var_u);
  if (m.v_die) row("v_die", *m.v_die);
  if (m.v_die_rel) row("v_die_rel", *m.v_die_rel);
  write_text_file(path, csv);
}

void emit_sweep_csv(std::span<const SweepRow> rows, const std::string& path) {
  std::string csv = "chi,phi,gl_bar,v_die_rel,iterations,status\n";
  for (const auto& r : rows) {
    csv += format_double(r.chi) + "," + format_double(r.phi) + "," + format_double(r.gl_bar) +
           "," + format_double(r.v_die_rel) + "," + std::to_string(r.iterations) + "," +
           to_string(r.status) + "\n";
  }
  write_text_file(path, csv);
}

}  // namespace trirobust
