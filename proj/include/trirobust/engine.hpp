#pragma once

#include <functional>
#include <optional>
#include <string>

#include "trirobust/reformulate.hpp"

namespace trirobust {

enum class EngineMode { Pccg, Bccg };
enum class EngineStatus { Converged, IterLimit, Infeasible, BackendError };

const char* to_string(EngineStatus s);
const char* to_string(EngineMode m);

struct ScenarioOutcome;

struct EngineConfig {
  double epsilon = 1e-3;  // relative gap (UB-LB)/|LB| at termination
  int max_iter = 200;
  double bigm_mp = 1e6;
  double bigm_sp = 1e9;
  double eta_floor = -1e12;
  double milp_gap = 1e-6;
  double time_limit_s = std::numeric_limits<double>::infinity();  // per MILP solve
  bool parallel_sp = false;
  EngineMode mode = EngineMode::Pccg;
  bool perturb_degenerate = false;  // lexicographic tie-break on the vertex-selection LP
  std::string backend = "highs";
  /// Optional trial investment: runs one SP pass before the loop to seed cuts.
  std::optional<std::vector<int>> seed_x;
  /// Observation hook for verification harnesses; called once per subproblem
  /// solve, in scenario order (iter 0 = seeding pass).
  std::function<void(int iter, int s, const InvestmentVector& x_hat, const ScenarioOutcome&)>
      on_subproblem;
};

/// Raised when a subproblem has an empty realized uncertainty set
/// (cannot occur on instances with nonempty DDU sets over X).
struct SpInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CutEntry {
  DualVector lambda_hat;
  bool benders = false;
};

/// Accumulated dual extreme points per scenario; append-only, duplicates
/// (inf-norm distance <= 1e-9) are rejected.
class CutPool {
 public:
  CutPool() = default;
  explicit CutPool(int num_scenarios) : entries_(num_scenarios) {}

  bool append_parametric(int s, DualVector lambda_hat);
  bool append_benders(int s, DualVector lambda_hat);
  bool contains(int s, const DualVector& lambda_hat) const;

  const std::vector<CutEntry>& entries(int s) const { return entries_[s]; }
  int scenario_count() const { return static_cast<int>(entries_.size()); }
  int size(int s) const { return static_cast<int>(entries_[s].size()); }
  int total_size() const;

 private:
  bool append(int s, DualVector lambda_hat, bool benders);
  std::vector<std::vector<CutEntry>> entries_;
};

struct MasterModel {
  MilpModel model;
  std::vector<int> x_vars;
  std::vector<int> eta_vars;
  std::vector<ComplementarityRecord> comps;  // all OU pairs, for big-M hygiene
};

/// MP over (x, eta_1..eta_S) plus one replica/OU block per pool entry. With an
/// empty pool each eta_s is bounded below only by cfg.eta_floor.
MasterModel assemble_master(const CompactInstance& inst, const CutPool& pool,
                            const EngineConfig& cfg);

struct ScenarioOutcome {
  double value = 0.0;  // Q_s(x_hat)
  UncertaintyVector xi;
  RecourseVector y;
  DualVector lambda;
};

/// Worst-case evaluation at fixed x_hat: KKT MILP solve, then vertex polish
/// (lambda re-optimized over Pi_s, xi over Xi_s(x_hat), y by the recourse LP)
/// so the returned triple satisfies the extreme-point and strong-duality
/// properties deterministically.
ScenarioOutcome solve_scenario_subproblem(const CompactInstance& inst, int s,
                                          const InvestmentVector& x_hat, const EngineConfig& cfg,
                                          MilpBackend& backend,
                                          std::vector<std::string>* warnings = nullptr);

struct IterationRecord {
  int iter = 0;
  double lb = 0.0, ub = 0.0, gap = 0.0;
  std::vector<double> sp_values;
  double master_s = 0.0, sp_total_s = 0.0;
};

struct EngineResult {
  EngineStatus status = EngineStatus::BackendError;
  double objective = 0.0;  // incumbent UB at termination
  double lower_bound = 0.0;
  InvestmentVector x;
  std::vector<ScenarioOutcome> worst;  // per scenario, at the incumbent
  std::vector<IterationRecord> trace;
  int iterations = 0;
  double total_s = 0.0;
  std::vector<std::string> warnings;
};

EngineResult run(const CompactInstance& inst, const EngineConfig& cfg = {});

/// (UB-LB)/|LB|; 0 when UB==LB, +inf when LB==0 with UB>LB.
double relative_gap(double lb, double ub);

/// Product over scenarios of C(n_xi+m_xi, m_xi): the number of distinct
/// basis combinations, an upper bound on the engine's iteration count.
double basis_combination_bound(const CompactInstance& inst);

}  // namespace trirobust
