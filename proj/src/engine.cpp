#include "trirobust/engine.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace trirobust {
namespace {

constexpr double kInfBound = std::numeric_limits<double>::infinity();
constexpr int kMaxBigMEscalations = 6;

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void warn(std::vector<std::string>* sink, std::string msg) {
  if (sink) sink->push_back(std::move(msg));
}

MilpOptions solver_options(const EngineConfig& cfg) {
  MilpOptions o;
  o.rel_gap = cfg.milp_gap;
  o.time_limit_s = cfg.time_limit_s;
  o.threads = 1;
  return o;
}

InvestmentVector extract_x(const std::vector<double>& primal, std::span<const int> x_vars) {
  InvestmentVector x;
  x.x.reserve(x_vars.size());
  for (int v : x_vars) x.x.push_back(static_cast<int>(std::llround(primal[v])));
  return x;
}

}  // namespace

const char* to_string(EngineStatus s) {
  switch (s) {
    case EngineStatus::Converged: return "converged";
    case EngineStatus::IterLimit: return "iter_limit";
    case EngineStatus::Infeasible: return "infeasible";
    case EngineStatus::BackendError: return "backend_error";
  }
  return "?";
}

const char* to_string(EngineMode m) { return m == EngineMode::Pccg ? "pccg" : "bccg"; }

double relative_gap(double lb, double ub) {
  if (ub <= lb) return 0.0;
  if (lb == 0.0) return std::numeric_limits<double>::infinity();
  return (ub - lb) / std::fabs(lb);
}

double basis_combination_bound(const CompactInstance& inst) {
  double bound = 1.0;
  for (const auto& blk : inst.scenarios) {
    double binom = 1.0;
    const int n = blk.n_xi(), m = blk.m_xi();
    for (int i = 1; i <= m; ++i) binom *= static_cast<double>(n + i) / i;
    bound *= binom;
    if (!std::isfinite(bound)) return std::numeric_limits<double>::infinity();
  }
  return bound;
}

bool CutPool::contains(int s, const DualVector& lambda_hat) const {
  for (const auto& e : entries_[s]) {
    if (e.lambda_hat.size() != lambda_hat.size()) continue;
    double dist = 0.0;
    for (std::size_t i = 0; i < lambda_hat.size(); ++i)
      dist = std::max(dist, std::fabs(e.lambda_hat[i] - lambda_hat[i]));
    if (dist <= 1e-9) return true;
  }
  return false;
}

bool CutPool::append(int s, DualVector lambda_hat, bool benders) {
  if (contains(s, lambda_hat)) return false;
  entries_[s].push_back({std::move(lambda_hat), benders});
  return true;
}

bool CutPool::append_parametric(int s, DualVector lambda_hat) {
  return append(s, std::move(lambda_hat), false);
}

bool CutPool::append_benders(int s, DualVector lambda_hat) {
  return append(s, std::move(lambda_hat), true);
}

int CutPool::total_size() const {
  int n = 0;
  for (const auto& e : entries_) n += static_cast<int>(e.size());
  return n;
}

MasterModel assemble_master(const CompactInstance& inst, const CutPool& pool,
                            const EngineConfig& cfg) {
  MasterModel mm;
  MilpModel& m = mm.model;
  const int n_x = inst.n_x();
  for (int i = 0; i < n_x; ++i) {
    VarKind kind = i < inst.n_binary ? VarKind::Binary : VarKind::Integer;
    mm.x_vars.push_back(m.add_var(kind, 0.0, i < inst.n_binary ? 1.0 : kInfBound, inst.c[i]));
  }
  for (int s = 0; s < inst.num_scenarios(); ++s)
    mm.eta_vars.push_back(
        m.add_var(VarKind::Continuous, cfg.eta_floor, kInfBound, inst.scenarios[s].pi));

  for (int r = 0; r < inst.upper_a.rows(); ++r) {
    LinExpr lhs;
    auto cols = inst.upper_a.row_cols(r);
    auto vals = inst.upper_a.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k) lhs.add(mm.x_vars[cols[k]], vals[k]);
    m.add_row(lhs, RowSense::LessEqual, inst.upper_b[r]);
  }

  for (int s = 0; s < pool.scenario_count(); ++s) {
    const ScenarioBlock& blk = inst.scenarios[s];
    for (const CutEntry& entry : pool.entries(s)) {
      OuBlockVars ou = build_ou_block(m, inst, s, entry.lambda_hat, cfg.bigm_mp, mm.x_vars);
      mm.comps.insert(mm.comps.end(), ou.comps.begin(), ou.comps.end());
      if (entry.benders) {
        // eta_s >= (f - G x - E xi)^T lambda_hat: a single dual hyperplane.
        LinExpr lhs;
        lhs.add(mm.eta_vars[s], 1.0);
        std::vector<double> gt_lambda(n_x, 0.0);
        blk.G.transpose_multiply_add(std::span<const double>(entry.lambda_hat), gt_lambda);
        for (int i = 0; i < n_x; ++i) lhs.add(mm.x_vars[i], gt_lambda[i]);
        std::vector<double> et_lambda(blk.n_xi(), 0.0);
        blk.E.transpose_multiply_add(std::span<const double>(entry.lambda_hat), et_lambda);
        for (int i = 0; i < blk.n_xi(); ++i) lhs.add(ou.xi[i], et_lambda[i]);
        double f_lambda = 0.0;
        for (int r = 0; r < blk.m_y(); ++r) f_lambda += blk.f[r] * entry.lambda_hat[r];
        m.add_row(lhs, RowSense::GreaterEqual, f_lambda);
      } else {
        // Full recourse replica: eta_s >= d.y', B y' + G x + E xi >= f.
        std::vector<int> y_rep;
        for (int j = 0; j < blk.n_y(); ++j)
          y_rep.push_back(m.add_var(VarKind::Continuous, 0.0, kInfBound, 0.0));
        LinExpr eta_row;
        eta_row.add(mm.eta_vars[s], 1.0);
        for (int j = 0; j < blk.n_y(); ++j) eta_row.add(y_rep[j], -blk.d[j]);
        m.add_row(eta_row, RowSense::GreaterEqual, 0.0);
        for (int r = 0; r < blk.m_y(); ++r) {
          LinExpr lhs;
          auto bcols = blk.B.row_cols(r);
          auto bvals = blk.B.row_vals(r);
          for (std::size_t k = 0; k < bcols.size(); ++k) lhs.add(y_rep[bcols[k]], bvals[k]);
          auto gcols = blk.G.row_cols(r);
          auto gvals = blk.G.row_vals(r);
          for (std::size_t k = 0; k < gcols.size(); ++k) lhs.add(mm.x_vars[gcols[k]], gvals[k]);
          auto ecols = blk.E.row_cols(r);
          auto evals = blk.E.row_vals(r);
          for (std::size_t k = 0; k < ecols.size(); ++k) lhs.add(ou.xi[ecols[k]], evals[k]);
          m.add_row(lhs, RowSense::GreaterEqual, blk.f[r]);
        }
      }
    }
  }
  return mm;
}

namespace {

// Vertex polish at a fixed KKT point: re-optimizes lambda over Pi_s at xi0
// (simplex, so an extreme point comes back), then xi over Xi_s(x_hat), then
// recovers y by the recourse LP. Each step preserves bilinear optimality of
// a true KKT point, so the drift between the polished value and the MILP
// value doubles as a complementarity-integrity probe.
ScenarioOutcome polish_kkt_point(const CompactInstance& inst, int s,
                                 const InvestmentVector& x_hat,
                                 std::span<const double> xi0, const EngineConfig& cfg,
                                 MilpBackend& backend, const MilpOptions& opts) {
  const ScenarioBlock& blk = inst.scenarios[s];
  MilpOptions lp_opts = opts;
  lp_opts.require_basic = true;

  // lambda: maximize (f - G x - E xi0).lambda over Pi_s
  std::vector<double> rhs0 = blk.f;
  blk.G.multiply_add(std::span<const int>(x_hat.x), rhs0, -1.0);
  blk.E.multiply_add(xi0, rhs0, -1.0);
  MilpModel dual_lp;
  for (int r = 0; r < blk.m_y(); ++r)
    dual_lp.add_var(VarKind::Continuous, 0.0, kInfBound, -rhs0[r]);
  SparseMatrix bt = blk.B.transposed();
  for (int j = 0; j < blk.n_y(); ++j) {
    LinExpr lhs;
    auto cols = bt.row_cols(j);
    auto vals = bt.row_vals(j);
    for (std::size_t k = 0; k < cols.size(); ++k) lhs.add(cols[k], vals[k]);
    dual_lp.add_row(lhs, RowSense::LessEqual, blk.d[j]);
  }
  SolveOutcome dual_out = backend.solve(dual_lp, lp_opts);
  if (dual_out.status == SolveStatus::Unbounded)
    throw std::runtime_error("scenario " + std::to_string(s) +
                             ": dual LP unbounded (recourse infeasible at SP point)");
  if (dual_out.status != SolveStatus::Optimal)
    throw std::runtime_error("scenario " + std::to_string(s) + ": dual polish LP failed");

  ScenarioOutcome res;
  res.lambda = std::move(dual_out.primal);

  // xi: maximize (-E xi).lambda_hat over Xi_s(x_hat)
  std::vector<double> et_lambda(blk.n_xi(), 0.0);
  blk.E.transpose_multiply_add(std::span<const double>(res.lambda), et_lambda);
  Polytope xi_set = realize_ddu_polytope(inst, s, x_hat);
  MilpModel xi_lp;
  for (int i = 0; i < blk.n_xi(); ++i) {
    double obj = et_lambda[i];
    if (cfg.perturb_degenerate) obj -= 1e-7 * (i + 1);
    xi_lp.add_var(VarKind::Continuous, 0.0, kInfBound, obj);
  }
  for (int r = 0; r < blk.m_xi(); ++r) {
    LinExpr lhs;
    auto cols = xi_set.rows.row_cols(r);
    auto vals = xi_set.rows.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k) lhs.add(cols[k], vals[k]);
    xi_lp.add_row(lhs, RowSense::LessEqual, xi_set.rhs[r]);
  }
  SolveOutcome xi_out = backend.solve(xi_lp, lp_opts);
  if (xi_out.status == SolveStatus::Infeasible)
    throw SpInfeasible("scenario " + std::to_string(s) + ": empty uncertainty set");
  if (xi_out.status != SolveStatus::Optimal)
    throw std::runtime_error("scenario " + std::to_string(s) + ": vertex-selection LP failed");
  res.xi = std::move(xi_out.primal);

  RecourseSolution rec = evaluate_recourse_lp(inst, s, x_hat, res.xi, backend, opts);
  if (rec.status != SolveStatus::Optimal)
    throw std::runtime_error("scenario " + std::to_string(s) +
                             ": recourse LP failed at polished vertex");
  res.y = std::move(rec.y);
  res.value = rec.value;
  return res;
}

}  // namespace

namespace {

// Exact value of one complementarity pattern: the big-M boxes are replaced by
// hard zero-fixings, so no large coefficient remains and the LP value cannot
// be inflated by solver tolerances. Returns -inf for patterns that admit no
// KKT point, +inf when the pattern leaves the objective unbounded.
struct PatternValue {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<double> xi;
};

PatternValue repair_pattern(const CompactInstance& inst, int s, const InvestmentVector& x_hat,
                            const SpMilp& sp, std::span<const double> milp_primal,
                            MilpBackend& backend, const MilpOptions& opts) {
  const ScenarioBlock& blk = inst.scenarios[s];
  MilpModel lp;
  const int n_xi = blk.n_xi(), n_y = blk.n_y(), m_y = blk.m_y();
  std::vector<int> xi_v, y_v, l_v;
  for (int i = 0; i < n_xi; ++i) xi_v.push_back(lp.add_var(VarKind::Continuous, 0, kInfBound, 0));
  for (int j = 0; j < n_y; ++j) y_v.push_back(lp.add_var(VarKind::Continuous, 0, kInfBound, -blk.d[j]));
  for (int r = 0; r < m_y; ++r) l_v.push_back(lp.add_var(VarKind::Continuous, 0, kInfBound, 0));

  std::vector<double> rhs_xi = blk.h;
  blk.F.multiply_add(std::span<const int>(x_hat.x), rhs_xi, -1.0);
  for (int r = 0; r < blk.m_xi(); ++r) {
    LinExpr lhs;
    auto cols = blk.H.row_cols(r);
    auto vals = blk.H.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k) lhs.add(xi_v[cols[k]], vals[k]);
    lp.add_row(lhs, RowSense::LessEqual, rhs_xi[r]);
  }
  std::vector<double> rhs_y = blk.f;
  blk.G.multiply_add(std::span<const int>(x_hat.x), rhs_y, -1.0);
  for (int r = 0; r < m_y; ++r) {
    LinExpr lhs;
    auto bcols = blk.B.row_cols(r);
    auto bvals = blk.B.row_vals(r);
    for (std::size_t k = 0; k < bcols.size(); ++k) lhs.add(y_v[bcols[k]], bvals[k]);
    auto ecols = blk.E.row_cols(r);
    auto evals = blk.E.row_vals(r);
    for (std::size_t k = 0; k < ecols.size(); ++k) lhs.add(xi_v[ecols[k]], evals[k]);
    // w = 1 pins the primal row active, w = 0 pins the multiplier at zero
    bool active = milp_primal[sp.comps[r].w_var] > 0.5;
    lp.add_row(lhs, active ? RowSense::Equal : RowSense::GreaterEqual, rhs_y[r]);
    if (!active) lp.set_var_bounds(l_v[r], 0.0, 0.0);
  }
  SparseMatrix bt = blk.B.transposed();
  for (int j = 0; j < n_y; ++j) {
    LinExpr lhs;
    auto cols = bt.row_cols(j);
    auto vals = bt.row_vals(j);
    for (std::size_t k = 0; k < cols.size(); ++k) lhs.add(l_v[cols[k]], vals[k]);
    bool active = milp_primal[sp.comps[m_y + j].w_var] > 0.5;
    lp.add_row(lhs, active ? RowSense::Equal : RowSense::LessEqual, blk.d[j]);
    if (!active) lp.set_var_bounds(y_v[j], 0.0, 0.0);
  }
  SolveOutcome out = backend.solve(lp, opts);
  PatternValue pv;
  if (out.status == SolveStatus::Unbounded)
    pv.value = std::numeric_limits<double>::infinity();
  else if (out.status == SolveStatus::Optimal) {
    pv.value = -out.objective;
    pv.xi.resize(n_xi);
    for (int i = 0; i < n_xi; ++i) pv.xi[i] = out.primal[xi_v[i]];
  }
  return pv;
}

}  // namespace

ScenarioOutcome solve_scenario_subproblem(const CompactInstance& inst, int s,
                                          const InvestmentVector& x_hat, const EngineConfig& cfg,
                                          MilpBackend& backend,
                                          std::vector<std::string>* warnings) {
  const ScenarioBlock& blk = inst.scenarios[s];
  const MilpOptions opts = solver_options(cfg);

  auto uncertainty_set_nonempty = [&]() {
    Polytope p = realize_ddu_polytope(inst, s, x_hat);
    MilpModel feas;
    for (int i = 0; i < blk.n_xi(); ++i) feas.add_var(VarKind::Continuous, 0.0, kInfBound, 0.0);
    for (int r = 0; r < blk.m_xi(); ++r) {
      LinExpr lhs;
      auto cols = p.rows.row_cols(r);
      auto vals = p.rows.row_vals(r);
      for (std::size_t k = 0; k < cols.size(); ++k) lhs.add(cols[k], vals[k]);
      feas.add_row(lhs, RowSense::LessEqual, p.rhs[r]);
    }
    return backend.solve(feas, opts).status == SolveStatus::Optimal;
  };

  // The KKT MILP steers the search, but a maximizer will exploit any big-M
  // tolerance slack, so its claims are only upper bounds. Every incumbent
  // pattern is re-valued by an exact M-free LP; certified patterns accumulate
  // in best_value, uncertifiable ones are excluded by a no-good cut. Claims
  // never understate a representable pattern, so claim <= best_value proves
  // optimality. An undersized M (pattern space too small) surfaces as an
  // infeasible MILP and escalates x10.
  const double numeric_ceiling = 1e12;
  const int max_patterns = 60;
  double M = std::min(cfg.bigm_sp, 1e7);
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> best_xi;
  bool accepted = false;

  for (int attempt = 0; attempt <= kMaxBigMEscalations && !accepted; ++attempt) {
    SpMilp sp = build_sp_milp(inst, s, x_hat, M);
    for (int round = 0; round < max_patterns; ++round) {
      SolveOutcome out = backend.solve(sp.model, opts);
      if (out.status == SolveStatus::Infeasible) {
        if (round > 0 || best_xi.empty()) {
          // pattern space exhausted (or the starting M admits no pattern)
          if (round > 0 && !best_xi.empty()) accepted = true;
          break;
        }
        if (!uncertainty_set_nonempty())
          throw SpInfeasible("SP infeasible in scenario " + std::to_string(s) +
                             " (empty uncertainty set)");
        break;  // escalate
      }
      if (out.status != SolveStatus::Optimal)
        throw std::runtime_error("SP solve failed in scenario " + std::to_string(s) + ": " +
                                 to_string(out.status) + " " + out.message);
      const double claim = -out.objective;
      const double tol = 1e-7 * std::max(1.0, std::fabs(best_value));
      if (!best_xi.empty() && claim <= best_value + tol) {
        accepted = true;  // nothing representable can beat the certified value
        break;
      }
      PatternValue pv = repair_pattern(inst, s, x_hat, sp, out.primal, backend, opts);
      if (std::isinf(pv.value) && pv.value > 0)
        throw std::runtime_error("scenario " + std::to_string(s) +
                                 ": unbounded KKT pattern (recourse lacks a finite optimum)");
      if (pv.value > best_value) {
        best_value = pv.value;
        best_xi = pv.xi;
      }
      if (pv.value >= claim - 1e-7 * std::max(1.0, std::fabs(claim))) {
        accepted = true;  // the incumbent pattern certifies its own claim
        break;
      }
      {
        std::ostringstream os;
        os << "scenario " << s << ": KKT claim " << claim << " at M=" << M
           << " certified only to " << pv.value << ", excluding the pattern and re-solving";
        warn(warnings, os.str());
      }
      // no-good cut on the complementarity indicators
      LinExpr cut;
      double rhs = 1.0;
      for (const auto& rec : sp.comps) {
        if (out.primal[rec.w_var] > 0.5) {
          cut.add(rec.w_var, -1.0);
          rhs -= 1.0;
        } else {
          cut.add(rec.w_var, 1.0);
        }
      }
      sp.model.add_row(cut, RowSense::GreaterEqual, rhs);
      if (round == max_patterns - 1 && !best_xi.empty()) {
        warn(warnings, "scenario " + std::to_string(s) +
                           ": pattern search truncated; using the best certified value");
        accepted = true;
      }
    }
    if (!accepted) {
      if (attempt < kMaxBigMEscalations && M * 10.0 <= numeric_ceiling) {
        std::ostringstream os;
        os << "scenario " << s << ": KKT system infeasible at M=" << M
           << ", escalating x10 and re-solving";
        warn(warnings, os.str());
        M *= 10.0;
      } else if (!best_xi.empty()) {
        warn(warnings, "scenario " + std::to_string(s) +
                           ": big-M still saturated after escalation; value may be conservative");
        accepted = true;
      } else {
        throw std::runtime_error("scenario " + std::to_string(s) +
                                 ": KKT system unsolvable within the big-M ladder");
      }
    }
  }

  ScenarioOutcome res = polish_kkt_point(inst, s, x_hat, best_xi, cfg, backend, opts);
  if (res.value < best_value - 1e-5 * std::max(1.0, std::fabs(best_value)))
    warn(warnings, "scenario " + std::to_string(s) + ": polish drift " +
                       std::to_string(res.value - best_value));
  return res;
}

EngineResult run(const CompactInstance& inst, const EngineConfig& cfg) {
  const double t_start = now_s();
  EngineResult result;
  ValidationReport rep = validate_instance(inst);
  if (!rep.ok()) throw std::invalid_argument("invalid instance:\n" + rep.to_string());

  auto backend = make_backend(cfg.backend);
  const int S = inst.num_scenarios();
  CutPool pool(S);
  EngineConfig local = cfg;  // bigm_mp may escalate across iterations
  const MilpOptions opts = solver_options(cfg);

  double lb = -std::numeric_limits<double>::infinity();
  double ub = std::numeric_limits<double>::infinity();

  auto solve_all_sps = [&](const InvestmentVector& x_hat) {
    std::vector<ScenarioOutcome> outs(S);
    if (cfg.parallel_sp && S > 1) {
      std::vector<std::vector<std::string>> warns(S);
      std::vector<std::exception_ptr> errors(S);
      std::vector<std::thread> threads;
      threads.reserve(S);
      for (int s = 0; s < S; ++s)
        threads.emplace_back([&, s]() {
          try {
            auto be = make_backend(cfg.backend);
            outs[s] = solve_scenario_subproblem(inst, s, x_hat, local, *be, &warns[s]);
          } catch (...) {
            errors[s] = std::current_exception();
          }
        });
      for (auto& t : threads) t.join();
      for (int s = 0; s < S; ++s) {
        for (auto& w : warns[s]) result.warnings.push_back(std::move(w));
        if (errors[s]) std::rethrow_exception(errors[s]);
      }
    } else {
      for (int s = 0; s < S; ++s)
        outs[s] = solve_scenario_subproblem(inst, s, x_hat, local, *backend, &result.warnings);
    }
    return outs;
  };

  auto update_incumbent = [&](const InvestmentVector& x_hat,
                              std::vector<ScenarioOutcome> outs) -> double {
    double cx = 0.0;
    for (int i = 0; i < inst.n_x(); ++i) cx += inst.c[i] * x_hat.x[i];
    double candidate = cx;
    for (int s = 0; s < S; ++s) candidate += inst.scenarios[s].pi * outs[s].value;
    if (candidate < ub) {
      ub = candidate;
      result.x = x_hat;
      result.worst = std::move(outs);
    }
    return candidate;
  };

  auto notify = [&](int iter, const InvestmentVector& x_hat,
                    const std::vector<ScenarioOutcome>& outs) {
    if (!cfg.on_subproblem) return;
    for (int s = 0; s < S; ++s) cfg.on_subproblem(iter, s, x_hat, outs[s]);
  };

  if (cfg.seed_x) {
    InvestmentVector x0{*cfg.seed_x};
    if (!upper_level_feasible(inst, x0))
      throw std::invalid_argument("seed_x is not upper-level feasible");
    auto outs = solve_all_sps(x0);
    notify(0, x0, outs);
    for (int s = 0; s < S; ++s) {
      bool added = cfg.mode == EngineMode::Pccg ? pool.append_parametric(s, outs[s].lambda)
                                                : pool.append_benders(s, outs[s].lambda);
      (void)added;
    }
    update_incumbent(x0, std::move(outs));
  }

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    // Master phase, with big-M hygiene escalation on the OU blocks. A too
    // small M can make the cut blocks infeasible even though X is not empty;
    // the bare master disambiguates before infeasibility is reported.
    double master_t0 = now_s();
    SolveOutcome mp_out;
    MasterModel mm;
    for (int attempt = 0;; ++attempt) {
      mm = assemble_master(inst, pool, local);
      mp_out = backend->solve(mm.model, opts);
      if (mp_out.status == SolveStatus::Infeasible && pool.total_size() > 0 &&
          attempt < kMaxBigMEscalations) {
        MasterModel bare = assemble_master(inst, CutPool(S), local);
        if (backend->solve(bare.model, opts).status == SolveStatus::Optimal) {
          result.warnings.push_back("iter " + std::to_string(iter) +
                                    ": MP infeasible at current big-M, escalating x10");
          local.bigm_mp *= 10.0;
          continue;
        }
      }
      if (mp_out.status != SolveStatus::Optimal) break;
      double util = max_bigm_utilization(mm.comps, mp_out.primal);
      if (util <= 0.99 * local.bigm_mp || attempt >= kMaxBigMEscalations) {
        if (util > 0.99 * local.bigm_mp)
          result.warnings.push_back("MP big-M still saturated after escalation");
        break;
      }
      std::ostringstream os;
      os << "iter " << iter << ": MP big-M utilization " << util << " near M=" << local.bigm_mp
         << ", escalating x10";
      result.warnings.push_back(os.str());
      local.bigm_mp *= 10.0;
    }
    double master_s = now_s() - master_t0;

    if (mp_out.status == SolveStatus::Infeasible) {
      result.status = EngineStatus::Infeasible;
      result.iterations = iter - 1;
      result.objective = ub;
      result.lower_bound = lb;
      result.total_s = now_s() - t_start;
      return result;  // report infeasibility and terminate
    }
    if (mp_out.status != SolveStatus::Optimal) {
      result.status = EngineStatus::BackendError;
      result.warnings.push_back("MP solve: " + std::string(to_string(mp_out.status)) + " " +
                                mp_out.message);
      result.iterations = iter - 1;
      result.objective = ub;
      result.lower_bound = lb;
      result.total_s = now_s() - t_start;
      return result;
    }

    lb = std::max(lb, mp_out.dual_bound);
    InvestmentVector x_hat = extract_x(mp_out.primal, mm.x_vars);

    // Subproblem phase.
    double sp_t0 = now_s();
    auto outs = solve_all_sps(x_hat);
    double sp_total_s = now_s() - sp_t0;

    notify(iter, x_hat, outs);
    update_incumbent(x_hat, outs);

    int new_cuts = 0;
    for (int s = 0; s < S; ++s) {
      bool added = cfg.mode == EngineMode::Pccg ? pool.append_parametric(s, outs[s].lambda)
                                                : pool.append_benders(s, outs[s].lambda);
      if (added)
        ++new_cuts;
      else
        result.warnings.push_back("iter " + std::to_string(iter) + ": duplicate dual point in scenario " +
                                  std::to_string(s) + ", cut skipped");
    }

    IterationRecord rec;
    rec.iter = iter;
    rec.lb = lb;
    rec.ub = ub;
    rec.gap = relative_gap(lb, ub);
    rec.sp_values.reserve(S);
    for (const auto& o : outs) rec.sp_values.push_back(o.value);
    rec.master_s = master_s;
    rec.sp_total_s = sp_total_s;
    result.trace.push_back(std::move(rec));
    result.iterations = iter;

    const double slack = 1e-9 * std::max({1.0, std::fabs(lb), std::fabs(ub)});
    if (ub - lb <= cfg.epsilon * std::fabs(lb) + slack) {
      result.status = EngineStatus::Converged;
      break;
    }
    if (new_cuts == 0) {
      // Pool fixed point: the next MP would be identical, no further progress
      // is possible. In exact arithmetic this coincides with UB == LB.
      result.warnings.push_back("stalled: no new dual points; gap " +
                                std::to_string(relative_gap(lb, ub)));
      result.status = EngineStatus::IterLimit;
      break;
    }
    result.status = EngineStatus::IterLimit;  // stands if the loop exhausts max_iter
  }

  result.objective = ub;
  result.lower_bound = lb;
  result.total_s = now_s() - t_start;
  return result;
}

}  // namespace trirobust
