#include "auction/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <utility>

#include "auction/feasibility.hpp"
#include "auction/lp.hpp"

namespace auction {
namespace {

// Ties each type's service expression to its normalized interim variable:
// f(t) * service(t) - xbar_t = 0.
void link_service(LinearProgram& lp, const TypeUniverse& u, const VecXd& mass,
                  const std::vector<AgentLpBlock>& blocks,
                  const std::function<int(int)>& xbar_var) {
  for (int agent = 1; agent <= u.agent_count(); ++agent) {
    for (int local = 0; local < u.agent_type_count(agent); ++local) {
      int t = u.first_ordinal(agent) + local;
      std::vector<std::pair<int, double>> terms;
      for (auto [var, coef] : blocks[agent - 1].service[local])
        terms.emplace_back(var, coef * mass[t]);
      terms.emplace_back(xbar_var(t), -1.0);
      lp.add_row(terms, 0.0, 0.0);
    }
  }
}

std::vector<AgentLpBlock> emit_agents(LinearProgram& lp, const AuctionInstance& instance) {
  std::vector<AgentLpBlock> blocks;
  blocks.reserve(instance.solvers.size());
  for (const auto& solver : instance.solvers) blocks.push_back(solver->emit(lp));
  return blocks;
}

std::vector<SingleAgentSolution> extract_agents(const AuctionInstance& instance,
                                                const std::vector<AgentLpBlock>& blocks,
                                                const VecXd& lp_x) {
  std::vector<SingleAgentSolution> out;
  out.reserve(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i)
    out.push_back(instance.solvers[i]->extract(blocks[i], lp_x));
  return out;
}

}  // namespace

void validate_instance(const AuctionInstance& instance) {
  const auto& u = instance.universe;
  validate_mass(u, instance.mass);
  if (static_cast<int>(instance.solvers.size()) != u.agent_count())
    throw StructuralError("one single-agent solver per agent required");
  for (int agent = 1; agent <= u.agent_count(); ++agent) {
    const auto& solver = instance.solvers[agent - 1];
    if (!solver) throw StructuralError("missing solver for an agent");
    if (solver->type_count() != u.agent_type_count(agent))
      throw StructuralError("solver type count does not match the universe");
    const VecXd& f = solver->distribution();
    for (int local = 0; local < solver->type_count(); ++local)
      if (std::abs(f[local] - instance.mass[u.first_ordinal(agent) + local]) > 1e-9)
        throw StructuralError("solver distribution disagrees with the instance mass");
  }
  switch (instance.supply.kind) {
    case SupplyKind::kSingleUnit:
      break;
    case SupplyKind::kKUnit:
      if (instance.supply.k < 1) throw StructuralError("supply needs at least one unit");
      break;
    case SupplyKind::kMatroid:
      if (!instance.supply.matroid) throw StructuralError("matroid supply without an oracle");
      if (instance.supply.matroid->ground_size != u.type_count())
        throw StructuralError("matroid ground set does not match the type count");
      break;
  }
}

MatroidOracle supply_matroid(const AuctionInstance& instance) {
  switch (instance.supply.kind) {
    case SupplyKind::kSingleUnit:
      return uniform_matroid(1, instance.universe.type_count());
    case SupplyKind::kKUnit:
      return uniform_matroid(instance.supply.k, instance.universe.type_count());
    case SupplyKind::kMatroid:
      return *instance.supply.matroid;
  }
  throw StructuralError("unknown supply kind");
}

OptimalAuction optimize_single_unit(const AuctionInstance& instance) {
  validate_instance(instance);
  if (instance.supply.kind != SupplyKind::kSingleUnit &&
      !(instance.supply.kind == SupplyKind::kKUnit && instance.supply.k == 1))
    throw StructuralError("single-unit path requires single-unit supply");
  const auto& u = instance.universe;
  const int n = u.agent_count();

  LinearProgram lp;
  SsaLpLayout layout = emit_ssa_polytope(lp, u, instance.mass);
  auto blocks = emit_agents(lp, instance);
  link_service(lp, u, instance.mass, blocks,
               [&](int t) { return layout.hold_var(t, n); });

  LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal)
    throw SolverError("joint single-unit program did not solve");

  SsaPoint point = eliminate_degenerate(u, instance.mass, point_from_lp(u, layout, sol));
  OptimalAuction out;
  out.xbar = xbar_of_point(u, point);
  out.per_agent = extract_agents(instance, blocks, sol.x);
  out.revenue = sol.objective;
  out.table = extract_table(u, instance.mass, point, 1e-7);
  return out;
}

OptimalAuction optimize_polymatroid(const AuctionInstance& instance) {
  validate_instance(instance);
  const auto& u = instance.universe;
  const int D = u.type_count();
  if (D > kMaxEnumeratedTypes)
    throw InstanceTooLargeError("separation needs at most " +
                                std::to_string(kMaxEnumeratedTypes) + " types");

  ExpectedRankOracle<double> F =
      instance.supply.kind == SupplyKind::kMatroid
          ? make_matroid_oracle<double>(u, instance.mass, *instance.supply.matroid)
          : make_k_unit_oracle<double>(u, instance.mass,
                                       instance.supply.kind == SupplyKind::kKUnit
                                           ? instance.supply.k
                                           : 1);
  if (D <= 16) F = tabulate(F);

  LinearProgram lp;
  auto blocks = emit_agents(lp, instance);
  int x0 = lp.add_variables(D, 0.0, 1.0);
  link_service(lp, u, instance.mass, blocks, [&](int t) { return x0 + t; });

  std::set<TypeMask> cuts;
  for (int t = 0; t < D; ++t) {
    TypeMask bit = TypeMask(1) << t;
    lp.add_row({{x0 + t, 1.0}}, -kInf, F(bit));
    cuts.insert(bit);
  }

  LpSolution sol;
  VecXd xbar;
  const int round_cap = 1 << std::min(D, 22);
  for (int round = 0;; ++round) {
    if (round > round_cap) throw SolverError("constraint generation failed to terminate");
    sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal)
      throw SolverError("joint polymatroid program did not solve");
    xbar = sol.x.segment(x0, D).cwiseMax(0.0);
    auto cert = separate<double>(xbar, F);
    if (cert.slack >= -kFeasTol) break;
    if (!cuts.insert(cert.set).second)
      throw SolverError("separation returned an already-active cut");
    std::vector<std::pair<int, double>> terms;
    for (TypeMask rest = cert.set; rest;) {
      terms.emplace_back(x0 + std::countr_zero(rest), 1.0);
      rest &= rest - 1;
    }
    lp.add_row(terms, -kInf, F(cert.set));
  }

  OptimalAuction out;
  out.xbar = xbar;
  out.per_agent = extract_agents(instance, blocks, sol.x);
  out.revenue = sol.objective;
  out.rra.emplace(F, xbar, supply_matroid(instance));
  return out;
}

OptimalAuction optimize(const AuctionInstance& instance) {
  return instance.supply.kind == SupplyKind::kSingleUnit ? optimize_single_unit(instance)
                                                         : optimize_polymatroid(instance);
}

std::vector<AgentOutcome> assemble_and_run(const AuctionInstance& instance,
                                           const OptimalAuction& auction,
                                           const TypeProfile& profile, Rng& rng) {
  const auto& u = instance.universe;
  const int n = u.agent_count();
  if (static_cast<int>(profile.chosen.size()) != n)
    throw StructuralError("profile size does not match agent count");

  TypeMask served_mask = 0;
  if (auction.table) {
    int winner = run_ssa(u, *auction.table, profile, rng);
    if (winner >= 0) served_mask = TypeMask(1) << winner;
  } else if (auction.rra) {
    served_mask = auction.rra->run(profile, rng);
  } else {
    throw StructuralError("auction carries no allocator");
  }

  std::vector<AgentOutcome> outcomes(n);
  for (int agent = 1; agent <= n; ++agent) {
    int t = profile.chosen[agent - 1];
    int local = t - u.first_ordinal(agent);
    const SingleAgentSolution& rule = auction.per_agent[agent - 1];
    AgentOutcome& out = outcomes[agent - 1];

    bool allocated = served_mask & (TypeMask(1) << t);
    if (allocated) {
      double x = auction.xbar[t] / instance.mass[t];
      if (x <= 1e-12) throw StructuralError("allocator served a type with zero interim mass");
      // Thin the allocator's rate down to the rule's own service probability.
      out.served = flip(rng, std::clamp(rule.service[local] / x, 0.0, 1.0));
    }

    if (const auto* ud = std::get_if<UnitDemandOutcomeRule>(&rule.rule)) {
      // Payments ride along deterministically; the item is drawn only when
      // the agent is actually served.
      out.payment = ud->payment[local];
      if (out.served) {
        double total = ud->item_prob.row(local).sum();
        if (total <= 1e-12) throw StructuralError("served a type whose rule never serves");
        out.item = sample_index(rng, ud->item_prob.row(local));
      }
    } else {
      const auto& budget = std::get<BudgetOutcomeRule>(rule.rule);
      const auto* solver =
          dynamic_cast<const PrivateBudgetSolver*>(instance.solvers[agent - 1].get());
      if (!solver) throw StructuralError("budget rule from a non-budget solver");
      // Budget collection is independent of service under the product form.
      out.paid_budget = flip(rng, budget.pay_prob[local]);
      out.payment = out.paid_budget ? solver->preference().budget[local] : 0.0;
    }
  }
  return outcomes;
}

}  // namespace auction
