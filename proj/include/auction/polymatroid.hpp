#pragma once

#include <vector>

#include "auction/errors.hpp"
#include "auction/feasibility.hpp"
#include "auction/matroid.hpp"
#include "auction/model.hpp"
#include "auction/random.hpp"
#include "auction/types.hpp"

namespace auction {

// Distinct type ordinals in service-priority order.
struct OrderedSubset {
  std::vector<int> elements;
};

template <typename Scalar>
struct PolymatroidVertexT {
  Vec<Scalar> y;        // over all of T_N; zero off the order
  OrderedSubset order;  // canonical: trailing zero-marginal elements trimmed
};
using PolymatroidVertex = PolymatroidVertexT<double>;

inline OrderedSubset ordered_subset_from_vertex(const PolymatroidVertex& v) { return v.order; }

template <typename Scalar>
OrderedSubset ordered_subset_from_vertex(const PolymatroidVertexT<Scalar>& v) {
  return v.order;
}

// Marginal-gain vector of the order: y(pi_r) = F(first r) - F(first r-1).
template <typename Scalar>
PolymatroidVertexT<Scalar> vertex_from_order(const ExpectedRankOracle<Scalar>& F,
                                             const OrderedSubset& order) {
  PolymatroidVertexT<Scalar> v;
  v.y = Vec<Scalar>::Zero(F.ground_size);
  TypeMask prefix = 0;
  Scalar prev(0);
  std::vector<Scalar> marginals;
  for (int t : order.elements) {
    if (t < 0 || t >= F.ground_size) throw StructuralError("order references unknown type");
    TypeMask bit = TypeMask(1) << t;
    if (prefix & bit) throw StructuralError("order repeats a type");
    prefix |= bit;
    Scalar cur = F(prefix);
    v.y[t] = cur - prev;
    marginals.push_back(v.y[t]);
    prev = cur;
  }
  v.order = order;
  while (!v.order.elements.empty() &&
         to_double_generic(marginals[v.order.elements.size() - 1]) <= 1e-12)
    v.order.elements.pop_back();
  return v;
}

// Greedy service scan: serve each present type, in order, that keeps the
// served set independent.
inline TypeMask run_ordered_subset(const OrderedSubset& order, const MatroidOracle& constraint,
                                   const TypeProfile& profile) {
  TypeMask present = profile_mask(profile);
  TypeMask served = 0;
  int count = 0;
  for (int t : order.elements) {
    TypeMask bit = TypeMask(1) << t;
    if (!(present & bit)) continue;
    if (constraint.rank(served | bit) == count + 1) {
      served |= bit;
      ++count;
    }
  }
  return served;
}

inline TypeMask run_ordered_subset(const OrderedSubset& order, int k, const TypeProfile& profile) {
  TypeMask present = profile_mask(profile);
  TypeMask served = 0;
  int count = 0;
  for (int t : order.elements) {
    if (count >= k) break;
    TypeMask bit = TypeMask(1) << t;
    if (present & bit) {
      served |= bit;
      ++count;
    }
  }
  return served;
}

// Per-component vertices for a mixture of capacity functions, all under the
// same order; their weighted sum is the mixture's vertex.
template <typename Scalar>
std::vector<PolymatroidVertexT<Scalar>> decompose_vertex(
    const std::vector<ExpectedRankOracle<Scalar>>& components, const OrderedSubset& order) {
  std::vector<PolymatroidVertexT<Scalar>> out;
  out.reserve(components.size());
  for (const auto& F : components) out.push_back(vertex_from_order(F, order));
  return out;
}

struct RandRoundOptions {
  bool check_membership = true;  // verify the input lies in the polytope
  double tol = 1e-9;             // membership slack
  double snap_tol = 1e-7;        // max drift from the exact vertex formula
};

struct RandRoundResult {
  PolymatroidVertex vertex;
  int iterations = 0;
};

// Mean-preserving randomized walk from a polytope point to a vertex.
RandRoundResult rand_round(const ExpectedRankOracle<double>& F, const VecXd& y0, Rng& rng,
                           const RandRoundOptions& options = {});

// Ex post mechanism: fresh rounding per profile, then the greedy scan.
class RraMechanism {
 public:
  RraMechanism(ExpectedRankOracle<double> F, VecXd xbar, MatroidOracle constraint);

  TypeMask run(const TypeProfile& profile, Rng& rng) const;
  const VecXd& target() const { return xbar_; }
  const MatroidOracle& constraint() const { return constraint_; }
  const ExpectedRankOracle<double>& capacity() const { return F_; }

 private:
  ExpectedRankOracle<double> F_;
  VecXd xbar_;
  MatroidOracle constraint_;
};

}  // namespace auction
