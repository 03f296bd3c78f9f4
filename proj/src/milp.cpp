#include "trirobust/milp.hpp"

#include <cmath>
#include <stdexcept>

namespace trirobust {

double LinExpr::eval(std::span<const double> primal) const {
  double v = constant;
  for (const auto& t : terms) v += t.coef * primal[t.var];
  return v;
}

int MilpModel::add_var(VarKind kind, double lb, double ub, double obj) {
  if (kind == VarKind::Binary) {
    lb = 0.0;
    ub = 1.0;
    ++n_binary_;
  }
  if (lb > ub) throw std::invalid_argument("variable with lb > ub");
  vars_.push_back({kind, lb, ub, obj});
  return static_cast<int>(vars_.size()) - 1;
}

int MilpModel::add_row(std::vector<LinTerm> terms, RowSense sense, double rhs) {
  for (const auto& t : terms)
    if (t.var < 0 || t.var >= var_count())
      throw std::invalid_argument("constraint references undeclared variable");
  rows_.push_back({std::move(terms), sense, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

int MilpModel::add_row(const LinExpr& lhs, RowSense sense, double rhs) {
  return add_row(lhs.terms, sense, rhs - lhs.constant);
}

void MilpModel::set_var_bounds(int var, double lb, double ub) {
  if (lb > ub) throw std::invalid_argument("variable with lb > ub");
  vars_[var].lb = lb;
  vars_[var].ub = ub;
}

void MilpModel::set_var_obj(int var, double obj) { vars_[var].obj = obj; }

double MilpModel::eval_objective(std::span<const double> primal) const {
  double v = obj_offset_;
  for (int i = 0; i < var_count(); ++i) v += vars_[i].obj * primal[i];
  return v;
}

double MilpModel::max_violation(std::span<const double> primal) const {
  double worst = 0.0;
  for (int i = 0; i < var_count(); ++i) {
    worst = std::max(worst, vars_[i].lb - primal[i]);
    worst = std::max(worst, primal[i] - vars_[i].ub);
  }
  for (const auto& r : rows_) {
    double lhs = 0.0;
    for (const auto& t : r.terms) lhs += t.coef * primal[t.var];
    switch (r.sense) {
      case RowSense::LessEqual: worst = std::max(worst, lhs - r.rhs); break;
      case RowSense::GreaterEqual: worst = std::max(worst, r.rhs - lhs); break;
      case RowSense::Equal: worst = std::max(worst, std::fabs(lhs - r.rhs)); break;
    }
  }
  return worst;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Limit: return "limit";
    case SolveStatus::Error: return "error";
  }
  return "?";
}

}  // namespace trirobust
