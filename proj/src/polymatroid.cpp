#include "auction/polymatroid.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace auction {
namespace {

// Minimum of F(base|X) - y(base|X) over X subseteq free; lex-lowest mask on
// ties.  base is included in every candidate set.
struct Argmin {
  double slack;
  TypeMask set;
};

Argmin min_slack(const ExpectedRankOracle<double>& F, const VecXd& y, TypeMask base,
                 TypeMask free) {
  auto eval = [&](TypeMask s) {
    double total = F(s);
    for (TypeMask rest = s; rest;) {
      int t = std::countr_zero(rest);
      total -= y[t];
      rest &= rest - 1;
    }
    return total;
  };
  Argmin best{eval(base), base};
  TypeMask sub = free;
  while (sub) {
    TypeMask s = base | sub;
    double slack = eval(s);
    if (slack < best.slack || (slack == best.slack && mask_lex_less(s, best.set)))
      best = {slack, s};
    sub = (sub - 1) & free;
  }
  return best;
}

}  // namespace

RandRoundResult rand_round(const ExpectedRankOracle<double>& F, const VecXd& y0, Rng& rng,
                           const RandRoundOptions& options) {
  const int D = F.ground_size;
  if (D > kMaxEnumeratedTypes) throw InstanceTooLargeError("ground set too large to round");
  if (y0.size() != D) throw StructuralError("point dimension does not match ground set");
  if (options.check_membership) {
    for (int t = 0; t < D; ++t)
      if (y0[t] < -options.tol) throw NotInPolytopeError("point has a negative coordinate");
    auto cert = separate<double>(y0, F);
    if (cert.slack < -options.tol) throw NotInPolytopeError("point violates a capacity cut");
  }

  VecXd y = y0.cwiseMax(0.0);
  const TypeMask universe = (D >= 32) ? ~TypeMask(0) : ((TypeMask(1) << D) - 1);
  std::vector<TypeMask> chain;  // strictly nested tight sets, smallest first

  auto clamp_delta = [&](double d) {
    if (d < -options.snap_tol) throw SolverError("rounding drifted outside the polytope");
    return std::max(d, 0.0);
  };

  int iterations = 0;
  const int iteration_cap = 2 * D + 2;
  while (true) {
    if (++iterations > iteration_cap) throw SolverError("rounding failed to terminate");

    // Rule 1: split a chain gap holding more than one element.
    bool acted = false;
    TypeMask below = 0;
    for (std::size_t r = 0; r < chain.size(); ++r) {
      TypeMask gap = chain[r] & ~below;
      if (popcount(gap) >= 2) {
        int s = std::countr_zero(gap);
        int s2 = std::countr_zero(gap & (gap - 1));
        TypeMask free = gap & ~(TypeMask(1) << s) & ~(TypeMask(1) << s2);
        Argmin up = min_slack(F, y, below | (TypeMask(1) << s), free);
        Argmin down = min_slack(F, y, below | (TypeMask(1) << s2), free);
        double delta = clamp_delta(up.slack);
        double delta2 = clamp_delta(down.slack);
        double total = delta + delta2;
        bool raise = (total <= 0.0) || (uniform01(rng) < delta2 / total);
        TypeMask grown;
        if (raise) {
          y[s] += delta;
          y[s2] = std::max(y[s2] - delta, 0.0);
          grown = up.set;
        } else {
          y[s] = std::max(y[s] - delta2, 0.0);
          y[s2] += delta2;
          grown = down.set;
        }
        chain.insert(chain.begin() + static_cast<std::ptrdiff_t>(r), grown);
        acted = true;
        break;
      }
      below = chain[r];
    }
    if (acted) continue;

    // Rule 2: pull an element still carrying mass outside the chain.
    TypeMask top = chain.empty() ? 0 : chain.back();
    TypeMask outside = universe & ~top;
    int pick = -1;
    for (TypeMask rest = outside; rest;) {
      int t = std::countr_zero(rest);
      if (y[t] > 1e-12) {
        pick = t;
        break;
      }
      rest &= rest - 1;
    }
    if (pick < 0) break;

    TypeMask bit = TypeMask(1) << pick;
    Argmin up = min_slack(F, y, top | bit, outside & ~bit);
    double delta = clamp_delta(up.slack);
    double delta2 = y[pick];
    double total = delta + delta2;
    if (total <= 0.0 || uniform01(rng) < delta2 / total) {
      y[pick] += delta;
      chain.push_back(up.set);
    } else {
      y[pick] = 0.0;
    }
  }

  // Read the order off the chain gaps and snap to the exact vertex.
  OrderedSubset order;
  TypeMask below = 0;
  for (TypeMask tight : chain) {
    TypeMask gap = tight & ~below;
    order.elements.push_back(std::countr_zero(gap));
    below = tight;
  }
  RandRoundResult result;
  result.vertex = vertex_from_order(F, order);
  result.iterations = iterations - 1;
  for (int t = 0; t < D; ++t)
    if (std::abs(result.vertex.y[t] - y[t]) > options.snap_tol)
      throw SolverError("rounded point does not match its vertex formula");
  return result;
}

RraMechanism::RraMechanism(ExpectedRankOracle<double> F, VecXd xbar, MatroidOracle constraint)
    : F_(std::move(F)), xbar_(std::move(xbar)), constraint_(std::move(constraint)) {
  if (xbar_.size() != F_.ground_size) throw StructuralError("target dimension mismatch");
  if (constraint_.ground_size != F_.ground_size)
    throw StructuralError("constraint ground set mismatch");
  RandRoundOptions probe;
  for (int t = 0; t < F_.ground_size; ++t)
    if (xbar_[t] < -probe.tol) throw NotInPolytopeError("target has a negative coordinate");
  auto cert = separate<double>(xbar_, F_);
  if (cert.slack < -probe.tol) throw NotInPolytopeError("target violates a capacity cut");
}

TypeMask RraMechanism::run(const TypeProfile& profile, Rng& rng) const {
  RandRoundOptions options;
  options.check_membership = false;  // validated once at construction
  auto rounded = rand_round(F_, xbar_, rng, options);
  return run_ordered_subset(rounded.vertex.order, constraint_, profile);
}

}  // namespace auction
