#include "auction/optimizer.hpp"

#include <cmath>
#include <memory>
#include <vector>

#include "auction/feasibility.hpp"
#include "auction/ssa.hpp"
#include "test_support.hpp"

using namespace auction;
using testing::bic_oracle_revenue;
using testing::check_vec_near;
using testing::half_mass;
using testing::intro_quasilinear;
using testing::random_quasilinear;
using testing::single_item_values;
using testing::stacked_values;
using testing::standalone_revenue_sum;
using testing::two_by_two;

TEST_CASE("one agent reduces to the standalone solver at full cap") {
  Rng rng(8001);
  for (int trial = 0; trial < 10; ++trial) {
    auto instance = random_quasilinear(rng, 1, 3);
    auto auction = optimize_single_unit(instance);
    double standalone = instance.solvers[0]->solve(VecXd::Ones(instance.solvers[0]->type_count()))
                            .revenue;
    CHECK(auction.revenue == doctest::Approx(standalone).epsilon(1e-7));
  }

  // Budget preference through the same path.
  PrivateBudgetPreference bp;
  bp.value = VecXd(2);
  bp.value << 2.0, 1.0;
  bp.budget = VecXd(2);
  bp.budget << 1.0, 3.0;
  AuctionInstance budget_instance;
  budget_instance.universe = TypeUniverse(std::vector<std::vector<std::string>>{{"A", "B"}});
  budget_instance.mass = VecXd::Constant(2, 0.5);
  budget_instance.solvers = {std::make_shared<PrivateBudgetSolver>(bp, budget_instance.mass)};
  budget_instance.supply = single_unit_supply();
  auto auction = optimize_single_unit(budget_instance);
  double standalone = budget_instance.solvers[0]->solve(VecXd::Ones(2)).revenue;
  CHECK(auction.revenue == doctest::Approx(standalone).epsilon(1e-7));
}

TEST_CASE("competition for one unit earns three halves") {
  auto instance = intro_quasilinear();
  auto auction = optimize_single_unit(instance);

  // Cross-checked against the unrestricted BIC oracle before being pinned.
  double oracle = bic_oracle_revenue(instance.universe, instance.mass,
                                     stacked_values(instance), 1);
  CHECK(oracle == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(auction.revenue == doctest::Approx(1.5).epsilon(1e-6));

  REQUIRE(auction.table.has_value());
  CHECK(auction.per_agent.size() == 2);
  double parts = auction.per_agent[0].revenue + auction.per_agent[1].revenue;
  CHECK(parts == doctest::Approx(auction.revenue).epsilon(1e-6));

  // The allocator's exact interim equals the target.
  auto replay = interim_of_table(instance.universe, instance.mass, *auction.table);
  check_vec_near(xbar_of_point(instance.universe, replay), auction.xbar, 1e-7);

  // Linkage makes the rule's service equal the allocator rate exactly.
  for (int agent = 1; agent <= 2; ++agent)
    for (int t = 0; t < 2; ++t) {
      int g = instance.universe.first_ordinal(agent) + t;
      CHECK(auction.per_agent[agent - 1].service[t] * instance.mass[g] ==
            doctest::Approx(auction.xbar[g]).epsilon(1e-7));
    }
}

TEST_CASE("worthless goods raise nothing") {
  Rng rng(8002);
  auto instance = intro_quasilinear();
  for (auto& solver : instance.solvers)
    solver = std::make_shared<UnitDemandSolver>(single_item_values({0.0, 0.0}),
                                                VecXd::Constant(2, 0.5));
  auto auction = optimize_single_unit(instance);
  CHECK(auction.revenue == doctest::Approx(0.0).epsilon(1e-9));
  auto outcomes = assemble_and_run(instance, auction, TypeProfile{{0, 2}}, rng);
  for (const auto& out : outcomes) CHECK(out.payment == doctest::Approx(0.0));
}

TEST_CASE("joint program matches the unrestricted BIC oracle") {
  Rng rng(8100);
  for (int trial = 0; trial < 20; ++trial) {
    auto instance = random_quasilinear(rng, 2, 2);
    auto auction = optimize_single_unit(instance);
    double oracle = bic_oracle_revenue(instance.universe, instance.mass,
                                       stacked_values(instance), 1);
    INFO("trial ", trial);
    CHECK(auction.revenue == doctest::Approx(oracle).epsilon(1e-5));
  }
}

TEST_CASE("simulated play recovers the program revenue and service rates") {
  auto instance = intro_quasilinear();
  auto auction = optimize_single_unit(instance);
  Rng rng(424242);
  const int N = 200000;
  double total = 0.0, total_sq = 0.0;
  VecXd served = VecXd::Zero(4);
  for (int s = 0; s < N; ++s) {
    auto profile = sample_profile(instance.universe, instance.mass, rng);
    auto outcomes = assemble_and_run(instance, auction, profile, rng);
    double draw = 0.0;
    for (int i = 0; i < 2; ++i) {
      draw += outcomes[i].payment;
      if (outcomes[i].served) served[profile.chosen[i]] += 1.0;
    }
    total += draw;
    total_sq += draw * draw;
  }
  double mean = total / N;
  double sd = std::sqrt(std::max(total_sq / N - mean * mean, 1e-12));
  CHECK(std::abs(mean - auction.revenue) <= 4.0 * sd / std::sqrt(double(N)));

  // Realized joint service rates match f(t) * x*(t).
  served /= N;
  for (int agent = 1; agent <= 2; ++agent)
    for (int t = 0; t < 2; ++t) {
      int g = instance.universe.first_ordinal(agent) + t;
      double expect = instance.mass[g] * auction.per_agent[agent - 1].service[t];
      double band = 4.0 * std::sqrt(std::max(expect * (1 - expect), 1e-12) / N);
      INFO("type ", instance.universe.qualified_label(g));
      CHECK(std::abs(served[g] - expect) <= band + 1e-9);
    }
}

TEST_CASE("polymatroid path agrees with the single-unit path at one unit") {
  Rng rng(8200);
  for (int trial = 0; trial < 20; ++trial) {
    auto instance = random_quasilinear(rng, 3, 3);
    auto single = optimize_single_unit(instance);
    instance.supply = k_unit_supply(1);
    auto poly = optimize_polymatroid(instance);
    INFO("trial ", trial);
    CHECK(poly.revenue == doctest::Approx(single.revenue).epsilon(1e-5));
    CHECK(poly.rra.has_value());
    CHECK(!poly.table.has_value());
  }
}

TEST_CASE("ample supply removes competition") {
  auto instance = intro_quasilinear(k_unit_supply(2));
  auto auction = optimize_polymatroid(instance);
  CHECK(auction.revenue == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(auction.revenue == doctest::Approx(standalone_revenue_sum(instance)).epsilon(1e-6));

  Rng rng(8300);
  for (int trial = 0; trial < 10; ++trial) {
    auto random_instance = random_quasilinear(rng, 3, 2);
    random_instance.supply = k_unit_supply(random_instance.universe.agent_count());
    auto relaxed = optimize_polymatroid(random_instance);
    CHECK(relaxed.revenue ==
          doctest::Approx(standalone_revenue_sum(random_instance)).epsilon(1e-5));
  }
}

TEST_CASE("revenue grows weakly with supply") {
  Rng rng(8400);
  for (int trial = 0; trial < 10; ++trial) {
    auto instance = random_quasilinear(rng, 3, 2);
    double last = 0.0;
    for (int k = 1; k <= 3; ++k) {
      instance.supply = k_unit_supply(k);
      auto auction = optimize_polymatroid(instance);
      CHECK(auction.revenue >= last - 1e-7);
      last = auction.revenue;
    }
  }
}

TEST_CASE("per-agent partition blocks decouple the market") {
  // One slot per agent's own block: nobody competes, revenue is the sum of
  // standalone optima (each agent faces an effectively private unit).
  auto instance = intro_quasilinear();
  instance.supply = matroid_supply(partition_matroid({0b0011, 0b1100}, {1, 1}, 4));
  auto auction = optimize_polymatroid(instance);
  CHECK(auction.revenue == doctest::Approx(2.0).epsilon(1e-6));

  // Monte Carlo revenue agrees with the program objective on the matroid path.
  Rng rng(8500);
  const int N = 100000;
  double total = 0.0, total_sq = 0.0;
  for (int s = 0; s < N; ++s) {
    auto profile = sample_profile(instance.universe, instance.mass, rng);
    auto outcomes = assemble_and_run(instance, auction, profile, rng);
    double draw = 0.0;
    for (const auto& out : outcomes) draw += out.payment;
    total += draw;
    total_sq += draw * draw;
  }
  double mean = total / N;
  double sd = std::sqrt(std::max(total_sq / N - mean * mean, 1e-12));
  CHECK(std::abs(mean - auction.revenue) <= 4.0 * sd / std::sqrt(double(N)) + 1e-9);
}

TEST_CASE("budget agents compete through the same reduction") {
  // Mixed instance: one budget agent, one quasilinear agent, one unit.
  AuctionInstance instance;
  instance.universe = two_by_two();
  instance.mass = half_mass();
  PrivateBudgetPreference bp;
  bp.value = VecXd(2);
  bp.value << 3.0, 3.0;
  bp.budget = VecXd(2);
  bp.budget << 2.0, 0.5;
  VecXd f = VecXd::Constant(2, 0.5);
  instance.solvers = {std::make_shared<PrivateBudgetSolver>(bp, f),
                      std::make_shared<UnitDemandSolver>(single_item_values({2.0, 1.0}), f)};
  instance.supply = single_unit_supply();
  auto auction = optimize_single_unit(instance);
  CHECK(auction.revenue > 0.0);

  // Relaxing to two units only helps, and matches standalone optima.
  instance.supply = k_unit_supply(2);
  auto relaxed = optimize_polymatroid(instance);
  CHECK(relaxed.revenue >= auction.revenue - 1e-7);
  CHECK(relaxed.revenue == doctest::Approx(standalone_revenue_sum(instance)).epsilon(1e-5));

  Rng rng(8600);
  const int N = 100000;
  double total = 0.0, total_sq = 0.0;
  for (int s = 0; s < N; ++s) {
    auto profile = sample_profile(instance.universe, instance.mass, rng);
    auto outcomes = assemble_and_run(instance, relaxed, profile, rng);
    double draw = 0.0;
    for (const auto& out : outcomes) draw += out.payment;
    total += draw;
    total_sq += draw * draw;
  }
  double mean = total / N;
  double sd = std::sqrt(std::max(total_sq / N - mean * mean, 1e-12));
  CHECK(std::abs(mean - relaxed.revenue) <= 4.0 * sd / std::sqrt(double(N)) + 1e-9);
}

TEST_CASE("malformed instances are rejected") {
  auto instance = intro_quasilinear();
  instance.solvers.pop_back();
  CHECK_THROWS_AS(optimize_single_unit(instance), StructuralError);

  instance = intro_quasilinear();
  instance.solvers[0] = std::make_shared<UnitDemandSolver>(single_item_values({1.0, 1.0}),
                                                           VecXd::Constant(2, 0.25).eval());
  CHECK_THROWS_AS(optimize_single_unit(instance), StructuralError);

  instance = intro_quasilinear();
  instance.supply = matroid_supply(uniform_matroid(1, 3));  // wrong ground size
  CHECK_THROWS_AS(optimize_polymatroid(instance), StructuralError);

  instance = intro_quasilinear(k_unit_supply(2));
  CHECK_THROWS_AS(optimize_single_unit(instance), StructuralError);
}
