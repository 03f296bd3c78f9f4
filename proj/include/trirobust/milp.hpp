#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace trirobust {

enum class VarKind { Continuous, Binary, Integer };
enum class RowSense { LessEqual, GreaterEqual, Equal };

struct LinTerm {
  int var = -1;
  double coef = 0.0;
};

/// Affine expression over model variables; used for complementarity pairs.
struct LinExpr {
  std::vector<LinTerm> terms;
  double constant = 0.0;

  LinExpr& add(int var, double coef) {
    if (coef != 0.0) terms.push_back({var, coef});
    return *this;
  }
  double eval(std::span<const double> primal) const;
};

struct MilpVar {
  VarKind kind = VarKind::Continuous;
  double lb = 0.0;
  double ub = std::numeric_limits<double>::infinity();
  double obj = 0.0;
};

struct MilpRow {
  std::vector<LinTerm> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

/// Minimization model. The engine and reformulation layers build these;
/// only a backend ever interprets them.
class MilpModel {
 public:
  int add_var(VarKind kind, double lb, double ub, double obj);
  int add_row(std::vector<LinTerm> terms, RowSense sense, double rhs);
  int add_row(const LinExpr& lhs, RowSense sense, double rhs);

  void set_var_bounds(int var, double lb, double ub);
  void set_var_obj(int var, double obj);
  void set_objective_offset(double off) { obj_offset_ = off; }

  int var_count() const { return static_cast<int>(vars_.size()); }
  int row_count() const { return static_cast<int>(rows_.size()); }
  int binary_count() const { return n_binary_; }
  const MilpVar& var(int i) const { return vars_[i]; }
  const MilpRow& row(int i) const { return rows_[i]; }
  double objective_offset() const { return obj_offset_; }

  double eval_objective(std::span<const double> primal) const;
  /// Largest absolute constraint/bound violation at a candidate point.
  double max_violation(std::span<const double> primal) const;

 private:
  std::vector<MilpVar> vars_;
  std::vector<MilpRow> rows_;
  double obj_offset_ = 0.0;
  int n_binary_ = 0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Limit, Error };

const char* to_string(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::Error;
  double objective = 0.0;
  /// Best proven bound on the optimum (== objective for fully solved models).
  double dual_bound = 0.0;
  double mip_gap = 0.0;
  std::vector<double> primal;  // present iff status == Optimal
  double wall_s = 0.0;
  std::string message;
};

struct MilpOptions {
  double rel_gap = 1e-6;
  double time_limit_s = std::numeric_limits<double>::infinity();
  int threads = 1;
  int seed = 0;
  bool verbose = false;
  /// Force the simplex method for pure LPs so optima come back as basic
  /// (vertex) solutions; required by the subproblem polish steps.
  bool require_basic = false;
};

class MilpBackend {
 public:
  virtual ~MilpBackend() = default;
  virtual SolveOutcome solve(const MilpModel& model, const MilpOptions& opts) = 0;
  virtual std::string name() const = 0;
};

/// Factory for named backends. Only "highs" is compiled in; unknown names throw.
std::unique_ptr<MilpBackend> make_backend(const std::string& name = "highs");

}  // namespace trirobust
