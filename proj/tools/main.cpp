// Command-line front end: solve / verify / sweep / metrics / die-value.
// Exit codes: 0 success, 1 infeasible or iteration limit, 2 input error,
// 3 backend or verification failure.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "trirobust/io.hpp"

namespace fs = std::filesystem;
using namespace trirobust;

namespace {

struct LoadedProblem {
  CompactInstance inst;
  std::optional<CompiledCase> compiled;  // present for planning cases
  std::optional<NhempCase> nhemp;
  EngineConfig config;
  std::vector<oracle::IntRange> x_bounds;
  std::string stem;
};

bool is_nhemp_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open");
  char magic[9] = {};
  in.read(magic, 8);
  if (std::string_view(magic, 8) == "TRCINST1") return false;
  in.clear();
  in.seekg(0);
  std::string head((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return head.find("\"nhemp-case\"") != std::string::npos;
}

LoadedProblem load_problem(const std::string& path) {
  LoadedProblem p;
  p.stem = fs::path(path).stem().string();
  if (is_nhemp_case(path)) {
    p.nhemp = load_case(path);
    p.compiled = build_compact_instance(*p.nhemp);
    for (const auto& w : p.compiled->warnings) std::cerr << "warning: " << w << "\n";
    p.inst = p.compiled->inst;
    p.config = p.nhemp->engine;
    p.x_bounds = investment_bounds(*p.nhemp);
  } else {
    CompactDocument doc = load_compact_doc(path);
    p.inst = std::move(doc.inst);
    p.x_bounds = std::move(doc.x_bounds);
    if (doc.has_config) p.config = doc.config;
    p.config.backend = resolve_backend(p.config.backend);
  }
  return p;
}

fs::path ensure_out_dir(const std::string& out_opt, const std::string& stem) {
  fs::path dir = out_opt.empty() ? fs::path("out") / stem : fs::path(out_opt);
  fs::create_directories(dir);
  return dir;
}

int status_exit_code(EngineStatus s) {
  switch (s) {
    case EngineStatus::Converged: return 0;
    case EngineStatus::Infeasible:
    case EngineStatus::IterLimit: return 1;
    case EngineStatus::BackendError: return 3;
  }
  return 3;
}

void print_run_summary(const EngineResult& r) {
  std::cout << "status:     " << to_string(r.status) << "\n"
            << "objective:  " << format_double(r.objective) << "\n"
            << "lower_bnd:  " << format_double(r.lower_bound) << "\n"
            << "gap:        " << format_double(relative_gap(r.lower_bound, r.objective)) << "\n"
            << "iterations: " << r.iterations << "\n"
            << "time_s:     " << format_double(r.total_s) << "\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_solve(const std::string& path, const std::string& mode, const std::string& out_opt,
              double epsilon_override) {
  LoadedProblem p = load_problem(path);
  if (!mode.empty()) p.config.mode = mode == "bccg" ? EngineMode::Bccg : EngineMode::Pccg;
  if (epsilon_override >= 0) p.config.epsilon = epsilon_override;
  EngineResult r = run(p.inst, p.config);
  print_run_summary(r);
  fs::path dir = ensure_out_dir(out_opt, p.stem);
  emit_trace(r, (dir / "trace.csv").string());
  emit_solution(r, (dir / "solution.json").string(), p.compiled ? &p.compiled->layout : nullptr);
  if (p.compiled && r.status != EngineStatus::Infeasible &&
      r.status != EngineStatus::BackendError) {
    PlanningMetrics m = compute_metrics(*p.compiled, to_planning_solution(r));
    emit_metrics_csv(m, (dir / "metrics.csv").string());
    std::cout << "phi:        " << format_double(m.phi) << "\n"
              << "gl_bar:     " << format_double(m.gl_bar) << "\n";
  }
  std::cout << "results in " << dir.string() << "\n";
  return status_exit_code(r.status);
}

int cmd_verify(const std::string& path, const std::string& out_opt) {
  LoadedProblem p = load_problem(path);
  for (const auto& blk : p.inst.scenarios)
    if (blk.n_xi() > 8) {
      std::cerr << "verify: guard exceeded (n_xi > 8), instance is not oracle-verifiable\n";
      return 2;
    }
  if (p.x_bounds.empty()) {
    std::cerr << "verify: no enumeration bounds available for this instance\n";
    return 2;
  }
  double box = 1.0;
  for (const auto& r : p.x_bounds) box *= (r.hi - r.lo + 1);
  if (box > 1e5) {
    std::cerr << "verify: guard exceeded (enumeration box " << box << " > 1e5)\n";
    return 2;
  }
  EngineConfig cfg = p.config;
  cfg.epsilon = 0.0;
  EngineResult r = run(p.inst, cfg);
  if (r.status != EngineStatus::Converged) {
    std::cerr << "verify: engine did not converge (" << to_string(r.status) << ")\n";
    return status_exit_code(r.status);
  }
  auto backend = make_backend(cfg.backend);
  auto truth = oracle::exhaustive_trilevel_solve(p.inst, p.x_bounds, *backend);
  double err =
      std::fabs(r.objective - truth.objective) / std::max(1.0, std::fabs(truth.objective));
  std::cout << "engine objective: " << format_double(r.objective) << "\n"
            << "oracle objective: " << format_double(truth.objective) << "\n"
            << "relative error:   " << format_double(err) << "\n";
  if (!out_opt.empty()) {
    fs::path dir = ensure_out_dir(out_opt, p.stem);
    emit_trace(r, (dir / "trace.csv").string());
  }
  if (err > 1e-6) {
    std::cerr << "verify: MISMATCH beyond 1e-6\n";
    return 3;
  }
  std::cout << "verify: OK\n";
  return 0;
}

std::vector<double> parse_chi_grid(const std::string& spec) {
  // start:step:end, inclusive
  double start, step, end;
  char c1, c2;
  std::istringstream is(spec);
  if (!(is >> start >> c1 >> step >> c2 >> end) || c1 != ':' || c2 != ':' || step <= 0)
    throw IoError("--chi: expected start:step:end with step > 0");
  std::vector<double> grid;
  for (double v = start; v <= end + 1e-12; v += step) grid.push_back(std::min(v, end));
  return grid;
}

int cmd_sweep(const std::string& path, const std::string& chi_spec, const std::string& out_opt) {
  if (!is_nhemp_case(path)) {
    std::cerr << "sweep: requires a planning case\n";
    return 2;
  }
  NhempCase c = load_case(path);
  std::vector<double> grid = parse_chi_grid(chi_spec);
  auto rows = run_die_sensitivity(c, grid);
  std::cout << "chi,phi,gl_bar,v_die_rel,iterations,status\n";
  for (const auto& r : rows)
    std::cout << format_double(r.chi) << "," << format_double(r.phi) << ","
              << format_double(r.gl_bar) << "," << format_double(r.v_die_rel) << ","
              << r.iterations << "," << to_string(r.status) << "\n";
  fs::path dir = ensure_out_dir(out_opt, fs::path(path).stem().string());
  emit_sweep_csv(rows, (dir / "metrics.csv").string());
  std::cout << "results in " << dir.string() << "\n";
  for (const auto& r : rows)
    if (r.status != EngineStatus::Converged) return 1;
  return 0;
}

int cmd_metrics(const std::string& case_path, const std::string& sol_path,
                const std::string& out_opt) {
  if (!is_nhemp_case(case_path)) {
    std::cerr << "metrics: requires a planning case\n";
    return 2;
  }
  NhempCase c = load_case(case_path);
  CompiledCase cc = build_compact_instance(c);
  PlanningSolution sol = load_solution(sol_path);
  PlanningMetrics m = compute_metrics(cc, sol);
  std::cout << "phi:       " << format_double(m.phi) << "\n"
            << "phi_capex: " << format_double(m.phi_capex) << "\n"
            << "phi_om:    " << format_double(m.phi_om) << "\n"
            << "gl_bar:    " << format_double(m.gl_bar) << "\n"
            << "voltage:   max " << format_double(m.max_u) << " min " << format_double(m.min_u)
            << " ave " << format_double(m.ave_u) << " var " << format_double(m.var_u) << "\n";
  fs::path dir = ensure_out_dir(out_opt, fs::path(case_path).stem().string());
  emit_metrics_csv(m, (dir / "metrics.csv").string());
  return 0;
}

int cmd_die_value(const std::string& case_path, const std::string& plan_path,
                  const std::string& out_opt) {
  if (!is_nhemp_case(case_path)) {
    std::cerr << "die-value: requires a planning case\n";
    return 2;
  }
  NhempCase c = load_case(case_path);
  CompiledCase cc = build_compact_instance(c);
  PlanningSolution plan = load_solution(plan_path);
  DieResult res = compute_die_value(cc, plan.x, c.engine);
  std::cout << "phi_fixed (plan under DDU): " << format_double(res.phi_fixed) << "\n"
            << "phi_ddu   (fresh solve):    " << format_double(res.phi_ddu) << "\n"
            << "v_die:                      " << format_double(res.v_die) << "\n"
            << "v_die_rel:                  " << format_double(res.v_die_rel * 100.0) << "%\n";
  fs::path dir = ensure_out_dir(out_opt, fs::path(case_path).stem().string());
  emit_trace(res.ddu_run, (dir / "trace.csv").string());
  emit_solution(res.ddu_run, (dir / "solution.json").string(), &cc.layout);
  return status_exit_code(res.ddu_run.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trilevel stochastic-robust solver with decision-dependent uncertainty"};
  app.require_subcommand(1);

  std::string case_path, sol_path, out_dir, mode, chi_spec = "0:0.1:1";
  double epsilon = -1;

  auto* solve_cmd = app.add_subcommand("solve", "run the decomposition engine on a case");
  solve_cmd->add_option("case", case_path, "case or instance file")->required();
  solve_cmd->add_option("--mode", mode, "pccg|bccg")->check(CLI::IsMember({"pccg", "bccg"}));
  solve_cmd->add_option("--out", out_dir, "output directory (default out/<case>)");
  solve_cmd->add_option("--epsilon", epsilon, "override termination gap");

  auto* verify_cmd = app.add_subcommand("verify", "cross-check against the brute-force oracle");
  verify_cmd->add_option("case", case_path, "case or instance file")->required();
  verify_cmd->add_option("--out", out_dir, "output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "induced-demand sensitivity sweep");
  sweep_cmd->add_option("case", case_path, "planning case file")->required();
  sweep_cmd->add_option("--chi", chi_spec, "grid start:step:end (default 0:0.1:1)");
  sweep_cmd->add_option("--out", out_dir, "output directory");

  auto* metrics_cmd = app.add_subcommand("metrics", "planning metrics for a stored solution");
  metrics_cmd->add_option("case", case_path, "planning case file")->required();
  metrics_cmd->add_option("solution", sol_path, "solution.json")->required();
  metrics_cmd->add_option("--out", out_dir, "output directory");

  auto* die_cmd = app.add_subcommand("die-value", "value of the demand-inducing effect");
  die_cmd->add_option("case", case_path, "DDU planning case file")->required();
  die_cmd->add_option("plan", sol_path, "solution.json of the decision-independent solve")
      ->required();
  die_cmd->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return cmd_solve(case_path, mode, out_dir, epsilon);
    if (verify_cmd->parsed()) return cmd_verify(case_path, out_dir);
    if (sweep_cmd->parsed()) return cmd_sweep(case_path, chi_spec, out_dir);
    if (metrics_cmd->parsed()) return cmd_metrics(case_path, sol_path, out_dir);
    if (die_cmd->parsed()) return cmd_die_value(case_path, sol_path, out_dir);
  } catch (const IoError& ex) {
    std::cerr << "input error: " << ex.what() << "\n";
    return 2;
  } catch (const CaseError& ex) {
    std::cerr << "input error: " << ex.what() << "\n";
    return 2;
  } catch (const oracle::GuardError& ex) {
    std::cerr << "input error: " << ex.what() << "\n";
    return 2;
  } catch (const SpInfeasible& ex) {
    std::cerr << "infeasible: " << ex.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "input error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "backend error: " << ex.what() << "\n";
    return 3;
  }
  return 2;
}
