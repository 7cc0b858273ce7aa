#include "auction/single_agent.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace auction {
namespace {

void validate_distribution(const VecXd& f, int types) {
  if (f.size() != types) throw StructuralError("distribution size does not match type count");
  for (int t = 0; t < types; ++t)
    if (f[t] < 0) throw StructuralError("negative type probability");
}

void validate_cap(const VecXd& cap, int types) {
  if (cap.size() != types) throw StructuralError("cap size does not match type count");
  for (int t = 0; t < types; ++t)
    if (cap[t] < -kFeasTol || cap[t] > 1 + kFeasTol)
      throw StructuralError("service cap outside [0,1]");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

SingleAgentSolution SingleAgentSolver::solve(const VecXd& cap) const {
  validate_cap(cap, type_count());
  LinearProgram lp;
  AgentLpBlock block = emit(lp);
  for (int t = 0; t < type_count(); ++t)
    lp.add_row(block.service[t], -kInf, clamp01(cap[t]));
  LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal)
    throw SolverError("single-agent program did not solve to optimality");
  return extract(block, sol.x);
}

UnitDemandSolver::UnitDemandSolver(UnitDemandPreference pref, VecXd f, SingleAgentOptions options)
    : pref_(std::move(pref)), f_(std::move(f)), options_(options) {
  if (pref_.type_count() == 0 || pref_.item_count() == 0)
    throw StructuralError("unit-demand preference needs at least one type and item");
  if ((pref_.values.array() < 0).any()) throw StructuralError("negative item value");
  validate_distribution(f_, pref_.type_count());
}

AgentLpBlock UnitDemandSolver::emit(LinearProgram& lp) const {
  const int T = pref_.type_count();
  const int m = pref_.item_count();
  AgentLpBlock block;
  block.first_var = lp.add_variables(T * m, 0.0, 1.0);
  int p0 = lp.add_variables(T, options_.no_subsidy ? 0.0 : -kInf, kInf);
  block.var_count = T * m + T;
  auto w = [&](int t, int j) { return block.first_var + t * m + j; };
  auto p = [&](int t) { return p0 + t; };

  for (int t = 0; t < T; ++t) lp.objective_coefficient(p(t), f_[t]);

  for (int t = 0; t < T; ++t) {
    std::vector<std::pair<int, double>> ir;
    for (int j = 0; j < m; ++j) ir.emplace_back(w(t, j), pref_.values(t, j));
    ir.emplace_back(p(t), -1.0);
    lp.add_row(ir, 0.0, kInf);
    for (int other = 0; other < T; ++other) {
      if (other == t) continue;
      std::vector<std::pair<int, double>> ic;
      for (int j = 0; j < m; ++j) {
        ic.emplace_back(w(t, j), pref_.values(t, j));
        ic.emplace_back(w(other, j), -pref_.values(t, j));
      }
      ic.emplace_back(p(t), -1.0);
      ic.emplace_back(p(other), 1.0);
      lp.add_row(ic, 0.0, kInf);
    }
  }

  block.service.resize(T);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < m; ++j) block.service[t].emplace_back(w(t, j), 1.0);
  return block;
}

SingleAgentSolution UnitDemandSolver::extract(const AgentLpBlock& block, const VecXd& lp_x) const {
  const int T = pref_.type_count();
  const int m = pref_.item_count();
  UnitDemandOutcomeRule rule;
  rule.item_prob.resize(T, m);
  rule.payment.resize(T);
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < m; ++j) rule.item_prob(t, j) = clamp01(lp_x[block.first_var + t * m + j]);
    rule.payment[t] = lp_x[block.first_var + T * m + t];
  }
  SingleAgentSolution out;
  out.service = rule.item_prob.rowwise().sum();
  out.payment = rule.payment;
  out.revenue = f_.dot(rule.payment);
  out.rule = std::move(rule);
  return out;
}

PrivateBudgetSolver::PrivateBudgetSolver(PrivateBudgetPreference pref, VecXd f)
    : pref_(std::move(pref)), f_(std::move(f)) {
  if (pref_.type_count() == 0) throw StructuralError("budget preference needs at least one type");
  if (pref_.budget.size() != pref_.value.size())
    throw StructuralError("value and budget vectors differ in length");
  if ((pref_.value.array() < 0).any() || (pref_.budget.array() < 0).any())
    throw StructuralError("negative value or budget");
  validate_distribution(f_, pref_.type_count());
}

AgentLpBlock PrivateBudgetSolver::emit(LinearProgram& lp) const {
  const int T = pref_.type_count();
  AgentLpBlock block;
  block.first_var = lp.add_variables(T, 0.0, 1.0);  // alloc
  int q0 = lp.add_variables(T, 0.0, 1.0);           // pay-budget probability
  block.var_count = 2 * T;
  auto a = [&](int t) { return block.first_var + t; };
  auto q = [&](int t) { return q0 + t; };

  for (int t = 0; t < T; ++t) lp.objective_coefficient(q(t), f_[t] * pref_.budget[t]);

  for (int t = 0; t < T; ++t) {
    lp.add_row({{a(t), pref_.value[t]}, {q(t), -pref_.budget[t]}}, 0.0, kInf);
    for (int other = 0; other < T; ++other) {
      if (other == t) continue;
      // Only misreports the type could afford: reported budget at most its own.
      if (pref_.budget[other] > pref_.budget[t]) continue;
      lp.add_row({{a(t), pref_.value[t]},
                  {q(t), -pref_.budget[t]},
                  {a(other), -pref_.value[t]},
                  {q(other), pref_.budget[other]}},
                 0.0, kInf);
    }
  }

  block.service.resize(T);
  for (int t = 0; t < T; ++t) block.service[t].emplace_back(a(t), 1.0);
  return block;
}

SingleAgentSolution PrivateBudgetSolver::extract(const AgentLpBlock& block,
                                                 const VecXd& lp_x) const {
  const int T = pref_.type_count();
  BudgetOutcomeRule rule;
  rule.alloc.resize(T);
  rule.pay_prob.resize(T);
  for (int t = 0; t < T; ++t) {
    rule.alloc[t] = clamp01(lp_x[block.first_var + t]);
    rule.pay_prob[t] = clamp01(lp_x[block.first_var + T + t]);
  }
  SingleAgentSolution out;
  out.service = rule.alloc;
  out.payment = rule.pay_prob.cwiseProduct(pref_.budget);
  out.revenue = f_.dot(out.payment);
  out.rule = std::move(rule);
  return out;
}

SingleAgentSolution solve_unit_demand(const UnitDemandPreference& pref, const VecXd& f,
                                      const VecXd& cap, SingleAgentOptions options) {
  return UnitDemandSolver(pref, f, options).solve(cap);
}

SingleAgentSolution solve_private_budget(const PrivateBudgetPreference& pref, const VecXd& f,
                                         const VecXd& cap) {
  return PrivateBudgetSolver(pref, f).solve(cap);
}

std::vector<std::string> check_ic_ir(const SingleAgentSolution& solution,
                                     const UnitDemandPreference& pref, double tol) {
  const auto* rule = std::get_if<UnitDemandOutcomeRule>(&solution.rule);
  if (!rule) throw StructuralError("solution does not carry a unit-demand rule");
  const int T = pref.type_count();
  std::vector<std::string> report;
  auto utility = [&](int t, int report_as) {
    return pref.values.row(t).dot(rule->item_prob.row(report_as)) - rule->payment[report_as];
  };
  for (int t = 0; t < T; ++t) {
    double truthful = utility(t, t);
    if (truthful < -tol)
      report.push_back("IR: type " + std::to_string(t) + " has utility " +
                       std::to_string(truthful));
    for (int other = 0; other < T; ++other) {
      if (other == t) continue;
      double gain = utility(t, other) - truthful;
      if (gain > tol)
        report.push_back("IC: type " + std::to_string(t) + " gains " + std::to_string(gain) +
                         " reporting " + std::to_string(other));
    }
  }
  return report;
}

std::vector<std::string> check_ic_ir(const SingleAgentSolution& solution,
                                     const PrivateBudgetPreference& pref, double tol) {
  const auto* rule = std::get_if<BudgetOutcomeRule>(&solution.rule);
  if (!rule) throw StructuralError("solution does not carry a budget rule");
  const int T = pref.type_count();
  std::vector<std::string> report;
  auto utility = [&](int t, int report_as) {
    return pref.value[t] * rule->alloc[report_as] - pref.budget[report_as] * rule->pay_prob[report_as];
  };
  for (int t = 0; t < T; ++t) {
    double truthful = utility(t, t);
    if (truthful < -tol)
      report.push_back("IR: type " + std::to_string(t) + " has utility " +
                       std::to_string(truthful));
    for (int other = 0; other < T; ++other) {
      if (other == t || pref.budget[other] > pref.budget[t]) continue;
      double gain = utility(t, other) - truthful;
      if (gain > tol)
        report.push_back("IC: type " + std::to_string(t) + " gains " + std::to_string(gain) +
                         " reporting " + std::to_string(other));
    }
  }
  return report;
}

std::vector<double> revenue_curve(const UnitDemandPreference& pref, const VecXd& f,
                                  const std::vector<VecXd>& caps) {
  UnitDemandSolver solver(pref, f);
  std::vector<double> out;
  out.reserve(caps.size());
  for (const auto& cap : caps) out.push_back(solver.solve(cap).revenue);
  return out;
}

std::vector<double> revenue_curve(const PrivateBudgetPreference& pref, const VecXd& f,
                                  const std::vector<VecXd>& caps) {
  PrivateBudgetSolver solver(pref, f);
  std::vector<double> out;
  out.reserve(caps.size());
  for (const auto& cap : caps) out.push_back(solver.solve(cap).revenue);
  return out;
}

}  // namespace auction
