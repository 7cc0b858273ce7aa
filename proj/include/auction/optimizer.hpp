#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "auction/errors.hpp"
#include "auction/matroid.hpp"
#include "auction/model.hpp"
#include "auction/polymatroid.hpp"
#include "auction/random.hpp"
#include "auction/single_agent.hpp"
#include "auction/ssa.hpp"
#include "auction/types.hpp"

namespace auction {

enum class SupplyKind { kSingleUnit, kKUnit, kMatroid };

struct SupplyConstraint {
  SupplyKind kind = SupplyKind::kSingleUnit;
  int k = 1;
  std::optional<MatroidOracle> matroid;
};

inline SupplyConstraint single_unit_supply() { return {}; }

inline SupplyConstraint k_unit_supply(int k) {
  if (k < 1) throw StructuralError("supply needs at least one unit");
  return {SupplyKind::kKUnit, k, std::nullopt};
}

inline SupplyConstraint matroid_supply(MatroidOracle m) {
  return {SupplyKind::kMatroid, 1, std::move(m)};
}

struct AuctionInstance {
  TypeUniverse universe;
  VecXd mass;  // per global ordinal; each agent block sums to one
  std::vector<std::shared_ptr<SingleAgentSolver>> solvers;  // one per agent
  SupplyConstraint supply;
};

void validate_instance(const AuctionInstance& instance);

// The supply as a rank oracle over global types.
MatroidOracle supply_matroid(const AuctionInstance& instance);

struct OptimalAuction {
  VecXd xbar;                                  // normalized interim target
  std::vector<SingleAgentSolution> per_agent;  // local type indexing
  double revenue = 0.0;
  std::optional<TransitionTable> table;  // single-unit allocator
  std::optional<RraMechanism> rra;       // k-unit / matroid allocator
};

// One joint LP: every agent's truthful-rule block, tied to a token-flow block
// so the interim allocation is implementable by a single unit.
OptimalAuction optimize_single_unit(const AuctionInstance& instance);

// Constraint generation against the expected-rank polytope; the allocator
// rounds the target to a priority order per profile.
OptimalAuction optimize_polymatroid(const AuctionInstance& instance);

// Dispatch on the supply kind.
OptimalAuction optimize(const AuctionInstance& instance);

struct AgentOutcome {
  bool served = false;
  int item = -1;            // unit-demand: item granted
  bool paid_budget = false;  // budget rule: whether the budget was collected
  double payment = 0.0;
};

// Executes one profile: allocator, per-agent service coin, outcome draws.
std::vector<AgentOutcome> assemble_and_run(const AuctionInstance& instance,
                                           const OptimalAuction& auction,
                                           const TypeProfile& profile, Rng& rng);

}  // namespace auction
