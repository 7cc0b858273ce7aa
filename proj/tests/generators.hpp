#pragma once

// Shared instance generators and reference oracles.  Deliberately free of any
// test-framework include so binaries with their own main can use them.

#include <memory>
#include <string>
#include <vector>

#include "auction/errors.hpp"
#include "auction/lp.hpp"
#include "auction/model.hpp"
#include "auction/optimizer.hpp"
#include "auction/random.hpp"
#include "auction/rational.hpp"
#include "auction/single_agent.hpp"
#include "auction/types.hpp"

namespace testing {

using auction::Rational;
using auction::Rng;
using auction::TypeUniverse;
using auction::Vec;
using auction::VecXd;

// Two agents, types H and L each, all masses 1/2.
inline TypeUniverse two_by_two() { return TypeUniverse({{"H", "L"}, {"H", "L"}}); }

inline Vec<Rational> half_mass_q() {
  Vec<Rational> f(4);
  f << Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2);
  return f;
}

inline VecXd half_mass() { return VecXd::Constant(4, 0.5); }

// Random universe with 1..max_agents agents of 1..max_types types each.
inline TypeUniverse random_universe(Rng& rng, int max_agents, int max_types) {
  int n = 1 + static_cast<int>(rng() % max_agents);
  std::vector<std::vector<std::string>> labels(n);
  for (int a = 0; a < n; ++a) {
    int k = 1 + static_cast<int>(rng() % max_types);
    for (int i = 0; i < k; ++i) labels[a].push_back("t" + std::to_string(i));
  }
  return TypeUniverse(labels);
}

// Exact rational masses from small integer weights.
inline Vec<Rational> random_mass_q(Rng& rng, const TypeUniverse& u) {
  Vec<Rational> f(u.type_count());
  for (int a = 1; a <= u.agent_count(); ++a) {
    int base = u.first_ordinal(a), k = u.agent_type_count(a);
    long total = 0;
    std::vector<long> w(k);
    for (int i = 0; i < k; ++i) {
      w[i] = 1 + static_cast<long>(rng() % 8);
      total += w[i];
    }
    for (int i = 0; i < k; ++i) f[base + i] = Rational(w[i], total);
  }
  return f;
}

inline VecXd to_doubles(const Vec<Rational>& q) {
  VecXd d(q.size());
  for (int i = 0; i < q.size(); ++i) d[i] = auction::to_double(q[i]);
  return d;
}

inline auction::UnitDemandPreference single_item_values(std::vector<double> values) {
  auction::UnitDemandPreference p;
  p.values.resize(static_cast<int>(values.size()), 1);
  for (std::size_t t = 0; t < values.size(); ++t) p.values(static_cast<int>(t), 0) = values[t];
  return p;
}

// Two agents, types H/L at probability 1/2 each, values 2 and 1.
inline auction::AuctionInstance intro_quasilinear(
    auction::SupplyConstraint supply = auction::single_unit_supply()) {
  auction::AuctionInstance instance;
  instance.universe = two_by_two();
  instance.mass = half_mass();
  VecXd f = VecXd::Constant(2, 0.5);
  auto pref = single_item_values({2.0, 1.0});
  instance.solvers = {std::make_shared<auction::UnitDemandSolver>(pref, f),
                      std::make_shared<auction::UnitDemandSolver>(pref, f)};
  instance.supply = std::move(supply);
  return instance;
}

// Revenue of the best BIC mechanism outright: ex post allocations q_i(profile)
// plus interim payments, full IC/IR, at most k served per profile.  Sound for
// quasilinear single-item preferences.
inline double bic_oracle_revenue(const TypeUniverse& u, const VecXd& mass, const VecXd& value,
                                 int k) {
  using namespace auction;
  std::vector<TypeProfile> profiles;
  std::vector<double> fp;
  for_each_profile<double>(u, mass, [&](const TypeProfile& p, double f) {
    profiles.push_back(p);
    fp.push_back(f);
  });
  const int P = static_cast<int>(profiles.size());
  const int n = u.agent_count();
  const int D = u.type_count();

  LinearProgram lp;
  int q0 = lp.add_variables(P * n, 0.0, 1.0);
  int p0 = lp.add_variables(D, -kInf, kInf);
  auto q = [&](int pi, int agent) { return q0 + pi * n + agent; };
  for (int t = 0; t < D; ++t) lp.objective_coefficient(p0 + t, mass[t]);

  for (int pi = 0; pi < P; ++pi) {
    std::vector<std::pair<int, double>> terms;
    for (int i = 0; i < n; ++i) terms.emplace_back(q(pi, i), 1.0);
    lp.add_row(terms, -kInf, static_cast<double>(k));
  }

  // Interim service of type t scaled by `scale`, as LP terms.
  auto interim_terms = [&](int agent, int t, double scale,
                           std::vector<std::pair<int, double>>& terms) {
    for (int pi = 0; pi < P; ++pi)
      if (profiles[pi].chosen[agent - 1] == t)
        terms.emplace_back(q(pi, agent - 1), scale * fp[pi] / mass[t]);
  };
  for (int agent = 1; agent <= n; ++agent) {
    int base = u.first_ordinal(agent);
    for (int a = 0; a < u.agent_type_count(agent); ++a) {
      int t = base + a;
      std::vector<std::pair<int, double>> ir;
      interim_terms(agent, t, value[t], ir);
      ir.emplace_back(p0 + t, -1.0);
      lp.add_row(ir, 0.0, kInf);
      for (int b = 0; b < u.agent_type_count(agent); ++b) {
        if (a == b) continue;
        int t2 = base + b;
        std::vector<std::pair<int, double>> ic;
        interim_terms(agent, t, value[t], ic);
        interim_terms(agent, t2, -value[t], ic);
        ic.emplace_back(p0 + t, -1.0);
        ic.emplace_back(p0 + t2, 1.0);
        lp.add_row(ic, 0.0, kInf);
      }
    }
  }
  LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) throw SolverError("reference BIC program did not solve");
  return sol.objective;
}

inline auction::AuctionInstance random_quasilinear(
    Rng& rng, int max_agents, int max_types,
    auction::SupplyConstraint supply = auction::single_unit_supply()) {
  auto u = random_universe(rng, max_agents, max_types);
  VecXd mass = to_doubles(random_mass_q(rng, u));
  auction::AuctionInstance instance;
  instance.universe = u;
  instance.mass = mass;
  for (int agent = 1; agent <= u.agent_count(); ++agent) {
    int T = u.agent_type_count(agent);
    std::vector<double> values;
    for (int t = 0; t < T; ++t) values.push_back(0.5 * static_cast<double>(1 + rng() % 8));
    VecXd f = mass.segment(u.first_ordinal(agent), T);
    instance.solvers.push_back(
        std::make_shared<auction::UnitDemandSolver>(single_item_values(values), f));
  }
  instance.supply = std::move(supply);
  return instance;
}

// Per-ordinal single-item values of a unit-demand instance.
inline VecXd stacked_values(const auction::AuctionInstance& instance) {
  VecXd v(instance.universe.type_count());
  for (int agent = 1; agent <= instance.universe.agent_count(); ++agent) {
    const auto& solver =
        dynamic_cast<const auction::UnitDemandSolver&>(*instance.solvers[agent - 1]);
    for (int t = 0; t < solver.type_count(); ++t)
      v[instance.universe.first_ordinal(agent) + t] = solver.preference().values(t, 0);
  }
  return v;
}

inline double standalone_revenue_sum(const auction::AuctionInstance& instance) {
  double total = 0.0;
  for (const auto& solver : instance.solvers)
    total += solver->solve(VecXd::Ones(solver->type_count())).revenue;
  return total;
}

}  // namespace testing
