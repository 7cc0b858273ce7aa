#pragma once

#include <functional>
#include <vector>

#include "auction/errors.hpp"
#include "auction/matroid.hpp"
#include "auction/model.hpp"
#include "auction/polymatroid.hpp"
#include "auction/random.hpp"
#include "auction/rational.hpp"
#include "auction/ssa.hpp"
#include "auction/types.hpp"

namespace auction {

// Normalized interim allocation of a token-passing table, by exact stage DP.
template <typename Scalar>
Vec<Scalar> exact_interim(const TypeUniverse& u, const Vec<Scalar>& mass,
                          const TransitionTableT<Scalar>& table) {
  return xbar_of_point(u, interim_of_table(u, mass, table));
}

// Normalized interim allocation of the greedy priority scan, by profile
// enumeration (independent of the marginal-gain formula).
template <typename Scalar>
Vec<Scalar> exact_interim(const TypeUniverse& u, const Vec<Scalar>& mass,
                          const OrderedSubset& order, const MatroidOracle& constraint,
                          long long guard = 1000000) {
  Vec<Scalar> served = Vec<Scalar>::Zero(u.type_count());
  for_each_profile<Scalar>(
      u, mass,
      [&](const TypeProfile& p, const Scalar& f) {
        TypeMask mask = run_ordered_subset(order, constraint, p);
        while (mask) {
          served[std::countr_zero(mask)] += f;
          mask &= mask - 1;
        }
      },
      guard);
  return served;
}

template <typename Scalar>
Vec<Scalar> exact_interim(const TypeUniverse& u, const Vec<Scalar>& mass,
                          const OrderedSubset& order, int k, long long guard = 1000000) {
  return exact_interim(u, mass, order, uniform_matroid(k, u.type_count()), guard);
}

// A mechanism as far as verification cares: realized profile in, served set out.
using MechanismRunner = std::function<TypeMask(const TypeProfile&, Rng&)>;

struct InterimReport {
  VecXd target;    // x_bar to verify against
  VecXd measured;  // joint frequency of (type realized and served)
  VecXd se;        // binomial standard error, floored at 1/N
  VecXd z;
  double z_max = 4.0;
  long long samples = 0;
  bool pass = false;
};

InterimReport monte_carlo_interim(const TypeUniverse& u, const VecXd& mass,
                                  const MechanismRunner& run, const VecXd& target, long long n,
                                  Rng& rng, double z_max = 4.0);

// Max-flow implementation check: ship each type's interim mass through the
// profiles that realize it, k units per profile.
template <typename Scalar>
struct FlowSolutionT {
  bool saturated = false;
  std::vector<TypeProfile> profiles;  // enumeration order fixes row indices
  Vec<Scalar> profile_mass;
  Mat<Scalar> ex_post;  // per (profile, type): service probability given profile
  TypeMask cut_set = 0;  // on failure: a set whose interim demand exceeds supply
};
using FlowSolution = FlowSolutionT<Rational>;

FlowSolution flow_oracle(const TypeUniverse& u, const Vec<Rational>& mass,
                         const Vec<Rational>& xbar, int k, long long guard = 100000);

// Double convenience: exact lift of the inputs, saturation within tol.
FlowSolutionT<double> flow_oracle(const TypeUniverse& u, const VecXd& mass, const VecXd& xbar,
                                  int k, double tol = kFeasTol, long long guard = 100000);

}  // namespace auction
