#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "auction/errors.hpp"
#include "auction/lp.hpp"
#include "auction/types.hpp"

namespace auction {

// One agent, m disjoint items, additive values, wants at most one.
struct UnitDemandPreference {
  MatXd values;  // type x item, nonnegative

  int type_count() const { return static_cast<int>(values.rows()); }
  int item_count() const { return static_cast<int>(values.cols()); }
};

// One agent with a value for the single item and a hard payment budget.
struct PrivateBudgetPreference {
  VecXd value;
  VecXd budget;

  int type_count() const { return static_cast<int>(value.size()); }
};

struct UnitDemandOutcomeRule {
  MatXd item_prob;  // type x item
  VecXd payment;    // expected payment, sign-free
};

// Normal form: serve with probability alloc, collect the full budget with
// probability pay_prob.
struct BudgetOutcomeRule {
  VecXd alloc;
  VecXd pay_prob;
};

struct SingleAgentSolution {
  std::variant<UnitDemandOutcomeRule, BudgetOutcomeRule> rule;
  VecXd service;   // per type: probability the agent is served at all
  VecXd payment;   // per type: expected payment
  double revenue = 0.0;
};

struct SingleAgentOptions {
  bool no_subsidy = false;  // forbid negative unit-demand payments
};

// One agent's block inside a larger LP: variable range plus, per type, the
// linear expression giving its service probability.
struct AgentLpBlock {
  int first_var = 0;
  int var_count = 0;
  std::vector<std::vector<std::pair<int, double>>> service;
};

// Revenue-optimal truthful outcome rule for one agent under per-type service
// caps.  Bound to a fixed preference and type distribution; caps vary per
// call.  emit/extract let a joint program embed the same LP block.
class SingleAgentSolver {
 public:
  virtual ~SingleAgentSolver() = default;

  virtual int type_count() const = 0;
  virtual const VecXd& distribution() const = 0;
  virtual AgentLpBlock emit(LinearProgram& lp) const = 0;
  virtual SingleAgentSolution extract(const AgentLpBlock& block, const VecXd& lp_x) const = 0;

  SingleAgentSolution solve(const VecXd& cap) const;
};

class UnitDemandSolver final : public SingleAgentSolver {
 public:
  UnitDemandSolver(UnitDemandPreference pref, VecXd f, SingleAgentOptions options = {});

  int type_count() const override { return pref_.type_count(); }
  const VecXd& distribution() const override { return f_; }
  AgentLpBlock emit(LinearProgram& lp) const override;
  SingleAgentSolution extract(const AgentLpBlock& block, const VecXd& lp_x) const override;

  const UnitDemandPreference& preference() const { return pref_; }
  const SingleAgentOptions& options() const { return options_; }

 private:
  UnitDemandPreference pref_;
  VecXd f_;
  SingleAgentOptions options_;
};

class PrivateBudgetSolver final : public SingleAgentSolver {
 public:
  PrivateBudgetSolver(PrivateBudgetPreference pref, VecXd f);

  int type_count() const override { return pref_.type_count(); }
  const VecXd& distribution() const override { return f_; }
  AgentLpBlock emit(LinearProgram& lp) const override;
  SingleAgentSolution extract(const AgentLpBlock& block, const VecXd& lp_x) const override;

  const PrivateBudgetPreference& preference() const { return pref_; }

 private:
  PrivateBudgetPreference pref_;
  VecXd f_;
};

SingleAgentSolution solve_unit_demand(const UnitDemandPreference& pref, const VecXd& f,
                                      const VecXd& cap, SingleAgentOptions options = {});
SingleAgentSolution solve_private_budget(const PrivateBudgetPreference& pref, const VecXd& f,
                                         const VecXd& cap);

// Every IC or IR violation beyond tol, as human-readable lines.  Budget rules
// are only held to downward (lower-or-equal-budget) misreports.
std::vector<std::string> check_ic_ir(const SingleAgentSolution& solution,
                                     const UnitDemandPreference& pref, double tol = kOptTol);
std::vector<std::string> check_ic_ir(const SingleAgentSolution& solution,
                                     const PrivateBudgetPreference& pref, double tol = kOptTol);

std::vector<double> revenue_curve(const UnitDemandPreference& pref, const VecXd& f,
                                  const std::vector<VecXd>& caps);
std::vector<double> revenue_curve(const PrivateBudgetPreference& pref, const VecXd& f,
                                  const std::vector<VecXd>& caps);

}  // namespace auction
