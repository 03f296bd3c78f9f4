#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"
#include "trirobust/io.hpp"

using namespace trirobust;
using namespace testsupport;
using nlohmann::json;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("case serialization round-trips to the identical canonical form") {
  NhempCase c = load_fixture_case("golden_pair");
  json j1 = case_to_json(c);
  NhempCase c2 = case_from_json(j1);
  json j2 = case_to_json(c2);
  CHECK(j1 == j2);
}

TEST_CASE("compact instance round-trips through json and the binary container") {
  GoldenInstance g = random_golden(909);
  json j1 = compact_to_json(g.inst, g.bounds);
  CompactInstance back = compact_from_json(j1);
  CHECK(compact_to_json(back, g.bounds) == j1);

  std::string bin = tmp_path("trirobust_roundtrip.bin");
  save_compact(g.inst, bin, /*binary=*/true, g.bounds);
  CompactDocument doc = load_compact_doc(bin);
  CHECK(compact_to_json(doc.inst, doc.x_bounds) == j1);
  CHECK(doc.x_bounds.size() == g.bounds.size());
}

TEST_CASE("missing probability names the offending field") {
  NhempCase c = load_fixture_case("golden_small");
  json j = case_to_json(c);
  j["scenarios"]["items"][0].erase("pi");
  try {
    case_from_json(j);
    FAIL("expected IoError");
  } catch (const IoError& ex) {
    CHECK(std::string(ex.what()).find("scenarios[0].pi") != std::string::npos);
  }
}

TEST_CASE("zone referencing an unknown node is a reference error") {
  NhempCase c = load_fixture_case("golden_small");
  json j = case_to_json(c);
  j["zones"][0]["candidates"].push_back(99);
  CHECK_THROWS_AS(case_from_json(j), IoError);
}

TEST_CASE("trace emission matches the trace rows and recomputes the gap") {
  CompactInstance inst = singleton_uncertainty_instance();
  EngineConfig cfg;
  cfg.epsilon = 1e-3;
  EngineResult r = run(inst, cfg);
  REQUIRE(r.status == EngineStatus::Converged);
  std::string path = tmp_path("trirobust_trace.csv");
  emit_trace(r, path);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,lb,ub,gap,master_s,sp_total_s");
  int rows = 0;
  std::string line;
  double last_gap = 1e300;
  while (std::getline(in, line)) {
    ++rows;
    double lb, ub, gap;
    int iter;
    char comma;
    std::istringstream is(line);
    is >> iter >> comma >> lb >> comma >> ub >> comma >> gap;
    REQUIRE(is);
    double recomputed = ub <= lb ? 0.0 : (ub - lb) / std::fabs(lb);
    CHECK(std::fabs(recomputed - gap) <= 1e-12 * std::max(1.0, std::fabs(gap)));
    last_gap = gap;
  }
  CHECK(rows == static_cast<int>(r.trace.size()));
  CHECK(last_gap <= cfg.epsilon);
}

TEST_CASE("solution files reload with values intact") {
  NhempCase c = load_fixture_case("golden_small");
  CompiledCase cc = build_compact_instance(c);
  EngineResult r = run(cc.inst, c.engine);
  REQUIRE(r.status == EngineStatus::Converged);
  std::string path = tmp_path("trirobust_solution.json");
  emit_solution(r, path, &cc.layout);
  PlanningSolution sol = load_solution(path);
  CHECK(sol.x.x == r.x.x);
  REQUIRE(sol.worst.size() == r.worst.size());
  for (std::size_t s = 0; s < sol.worst.size(); ++s) {
    CHECK(sol.worst[s].value == r.worst[s].value);
    CHECK(sol.worst[s].y == r.worst[s].y);
  }
  // metrics computed from the reloaded solution agree with the direct path
  PlanningMetrics direct = compute_metrics(cc, to_planning_solution(r));
  PlanningMetrics reloaded = compute_metrics(cc, sol);
  CHECK(direct.phi == doctest::Approx(reloaded.phi).epsilon(1e-12));
  CHECK(direct.gl_bar == doctest::Approx(reloaded.gl_bar).epsilon(1e-12));
}

TEST_CASE("engine config parsing honors the documented keys") {
  json j = {{"engine",
             {{"epsilon", 0.01}, {"max_iter", 7}, {"mode", "bccg"}, {"eta_floor", -1e9},
              {"parallel_sp", true}}},
            {"bigm", {{"mp", 5e5}, {"sp", 2e8}}},
            {"milp", {{"gap", 1e-7}, {"time_limit_s", 12.5}, {"backend", "highs"}}}};
  EngineConfig cfg = parse_engine_config(j);
  CHECK(cfg.epsilon == 0.01);
  CHECK(cfg.max_iter == 7);
  CHECK(cfg.mode == EngineMode::Bccg);
  CHECK(cfg.eta_floor == -1e9);
  CHECK(cfg.parallel_sp);
  CHECK(cfg.bigm_mp == 5e5);
  CHECK(cfg.bigm_sp == 2e8);
  CHECK(cfg.milp_gap == 1e-7);
  CHECK(cfg.time_limit_s == 12.5);
  CHECK(cfg.backend == "highs");

  SUBCASE("environment variable overrides the configured backend") {
    setenv("TRIROBUST_MILP_BACKEND", "highs", 1);
    json j2 = j;
    j2["milp"]["backend"] = "something-else";
    EngineConfig cfg2 = parse_engine_config(j2);
    CHECK(cfg2.backend == "highs");
    unsetenv("TRIROBUST_MILP_BACKEND");
  }
}

TEST_CASE("numeric formatting stays locale independent") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-1234.25) == "-1234.25");
  CHECK(format_double(1e300).find(',') == std::string::npos);
  // shortest round-trip repr
  double v = 0.1 + 0.2;
  CHECK(std::stod(format_double(v)) == v);
}
