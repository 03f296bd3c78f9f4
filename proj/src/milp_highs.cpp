// Backend binding for the HiGHS solver. The only translation unit in the
// library that includes Highs.h; everything above speaks MilpModel.

#include <chrono>
#include <stdexcept>

#include "Highs.h"
#include "trirobust/milp.hpp"

namespace trirobust {
namespace {

constexpr double kInf = 1e30;

double clamp_inf(double v) {
  if (v > kInf) return kInf;
  if (v < -kInf) return -kInf;
  return v;
}

HighsLp to_highs(const MilpModel& m) {
  HighsLp lp;
  lp.num_col_ = m.var_count();
  lp.num_row_ = m.row_count();
  lp.sense_ = ObjSense::kMinimize;
  lp.offset_ = m.objective_offset();
  lp.col_cost_.resize(lp.num_col_);
  lp.col_lower_.resize(lp.num_col_);
  lp.col_upper_.resize(lp.num_col_);
  bool any_integer = false;
  for (int i = 0; i < lp.num_col_; ++i) {
    const MilpVar& v = m.var(i);
    lp.col_cost_[i] = v.obj;
    lp.col_lower_[i] = clamp_inf(v.lb);
    lp.col_upper_[i] = clamp_inf(v.ub);
    any_integer |= v.kind != VarKind::Continuous;
  }
  if (any_integer) {
    lp.integrality_.resize(lp.num_col_);
    for (int i = 0; i < lp.num_col_; ++i)
      lp.integrality_[i] = m.var(i).kind == VarKind::Continuous ? HighsVarType::kContinuous
                                                                : HighsVarType::kInteger;
  }
  lp.row_lower_.resize(lp.num_row_);
  lp.row_upper_.resize(lp.num_row_);
  lp.a_matrix_.format_ = MatrixFormat::kRowwise;
  lp.a_matrix_.start_.assign(1, 0);
  for (int r = 0; r < lp.num_row_; ++r) {
    const MilpRow& row = m.row(r);
    switch (row.sense) {
      case RowSense::LessEqual:
        lp.row_lower_[r] = -kInf;
        lp.row_upper_[r] = row.rhs;
        break;
      case RowSense::GreaterEqual:
        lp.row_lower_[r] = row.rhs;
        lp.row_upper_[r] = kInf;
        break;
      case RowSense::Equal:
        lp.row_lower_[r] = row.rhs;
        lp.row_upper_[r] = row.rhs;
        break;
    }
    for (const auto& t : row.terms) {
      lp.a_matrix_.index_.push_back(t.var);
      lp.a_matrix_.value_.push_back(t.coef);
    }
    lp.a_matrix_.start_.push_back(static_cast<int>(lp.a_matrix_.index_.size()));
  }
  return lp;
}

class HighsBackend final : public MilpBackend {
 public:
  SolveOutcome solve(const MilpModel& model, const MilpOptions& opts) override {
    const auto t0 = std::chrono::steady_clock::now();
    SolveOutcome out = solve_once(model, opts, /*zero_objective=*/false);
    if (out.status == SolveStatus::Error && out.message == "unbounded_or_infeasible") {
      // Disambiguate by checking feasibility alone.
      SolveOutcome feas = solve_once(model, opts, /*zero_objective=*/true);
      out.status = feas.status == SolveStatus::Optimal ? SolveStatus::Unbounded
                                                       : SolveStatus::Infeasible;
      out.message.clear();
    }
    out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }

  std::string name() const override { return "highs"; }

 private:
  static SolveOutcome solve_once(const MilpModel& model, const MilpOptions& opts,
                                 bool zero_objective) {
    Highs highs;
    highs.setOptionValue("output_flag", opts.verbose);
    highs.setOptionValue("threads", opts.threads);
    highs.setOptionValue("random_seed", opts.seed);
    highs.setOptionValue("mip_rel_gap", opts.rel_gap);
    if (std::isfinite(opts.time_limit_s)) highs.setOptionValue("time_limit", opts.time_limit_s);
    if (opts.require_basic) highs.setOptionValue("solver", "simplex");

    HighsLp lp = to_highs(model);
    if (zero_objective) std::fill(lp.col_cost_.begin(), lp.col_cost_.end(), 0.0);
    SolveOutcome out;
    if (highs.passModel(lp) == HighsStatus::kError) {
      double worst_coef = 0.0, worst_cost = 0.0, worst_rhs = 0.0;
      long bad = 0;
      for (double v : lp.a_matrix_.value_) {
        if (!std::isfinite(v)) ++bad;
        worst_coef = std::max(worst_coef, std::fabs(v));
      }
      for (double v : lp.col_cost_) {
        if (!std::isfinite(v)) ++bad;
        worst_cost = std::max(worst_cost, std::fabs(v));
      }
      for (std::size_t i = 0; i < lp.row_lower_.size(); ++i)
        worst_rhs = std::max({worst_rhs,
                              std::fabs(lp.row_lower_[i]) < kInf ? std::fabs(lp.row_lower_[i]) : 0,
                              std::fabs(lp.row_upper_[i]) < kInf ? std::fabs(lp.row_upper_[i]) : 0});
      out.status = SolveStatus::Error;
      out.message = "highs rejected model (" + std::to_string(model.var_count()) + " vars, " +
                    std::to_string(model.row_count()) + " rows, nonfinite=" +
                    std::to_string(bad) + ", max|coef|=" + std::to_string(worst_coef) +
                    ", max|cost|=" + std::to_string(worst_cost) + ", max|rhs|=" +
                    std::to_string(worst_rhs) + ")";
      return out;
    }
    HighsStatus rs = highs.run();
    if (rs == HighsStatus::kError) {
      out.status = SolveStatus::Error;
      out.message = "highs run() error";
      return out;
    }
    const bool is_mip = !lp.integrality_.empty();
    const HighsInfo& info = highs.getInfo();
    switch (highs.getModelStatus()) {
      case HighsModelStatus::kOptimal:
        out.status = SolveStatus::Optimal;
        out.objective = info.objective_function_value;
        out.dual_bound = is_mip ? info.mip_dual_bound : info.objective_function_value;
        out.mip_gap = is_mip ? info.mip_gap : 0.0;
        out.primal = highs.getSolution().col_value;
        break;
      case HighsModelStatus::kInfeasible:
        out.status = SolveStatus::Infeasible;
        break;
      case HighsModelStatus::kUnbounded:
        out.status = SolveStatus::Unbounded;
        break;
      case HighsModelStatus::kUnboundedOrInfeasible:
        out.status = SolveStatus::Error;
        out.message = "unbounded_or_infeasible";
        break;
      case HighsModelStatus::kTimeLimit:
      case HighsModelStatus::kIterationLimit:
      case HighsModelStatus::kSolutionLimit:
        out.status = SolveStatus::Limit;
        if (is_mip && info.primal_solution_status == kSolutionStatusFeasible) {
          out.objective = info.objective_function_value;
          out.dual_bound = info.mip_dual_bound;
          out.mip_gap = info.mip_gap;
          out.primal = highs.getSolution().col_value;
        }
        out.message = "limit reached";
        break;
      default:
        out.status = SolveStatus::Error;
        out.message = "highs status " + highs.modelStatusToString(highs.getModelStatus());
        break;
    }
    return out;
  }
};

}  // namespace

std::unique_ptr<MilpBackend> make_backend(const std::string& name) {
  if (name == "highs" || name.empty()) return std::make_unique<HighsBackend>();
  throw std::invalid_argument("unknown MILP backend '" + name + "' (available: highs)");
}

}  // namespace trirobust
