#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "auction/errors.hpp"
#include "auction/matroid.hpp"
#include "auction/model.hpp"
#include "auction/random.hpp"
#include "auction/types.hpp"

namespace auction {

// Expected rank g of the realized type set: the capacity function of the
// feasibility polymatroid.  Monotone, submodular, g(empty) = 0.
template <typename Scalar>
struct ExpectedRankOracle {
  std::function<Scalar(TypeMask)> eval;
  int ground_size = 0;
  std::string flavor;
  Scalar operator()(TypeMask S) const { return eval(S); }
};

template <typename Scalar>
struct ViolationCertificate {
  TypeMask set = 0;
  Scalar slack = Scalar(0);  // g(S) - x_bar(S); negative when violated
};

// E[min(|T intersect S|, k)] by dynamic program over agents: state j tracks
// min(hits so far, k).
template <typename Scalar>
Scalar g_k_dp(const TypeUniverse& u, const Vec<Scalar>& mass, int k, TypeMask S) {
  if (k < 1) throw StructuralError("supply must be at least 1");
  const int n = u.agent_count();
  std::vector<Scalar> d(k + 1, Scalar(0)), next(k + 1, Scalar(0));
  d[0] = Scalar(1);
  for (int a = 1; a <= n; ++a) {
    Scalar hit(0);
    for (int t = u.first_ordinal(a); t < u.first_ordinal(a) + u.agent_type_count(a); ++t)
      if (S & (TypeMask(1) << t)) hit += mass[t];
    for (int j = 0; j <= k; ++j) {
      Scalar below = j > 0 ? d[j - 1] : Scalar(0);
      if (j == k)
        next[j] = d[j] + hit * below;
      else
        next[j] = d[j] + hit * (below - d[j]);
    }
    d.swap(next);
  }
  Scalar g(0);
  for (int j = 1; j <= k; ++j) g += Scalar(j) * d[j];
  return g;
}

// Exact expectation by full profile enumeration; rank is any set function.
template <typename Scalar>
Scalar g_bruteforce(const TypeUniverse& u, const Vec<Scalar>& mass,
                    const std::function<int(TypeMask)>& rank, TypeMask S) {
  Scalar g(0);
  for_each_profile<Scalar>(
      u, mass,
      [&](const TypeProfile& p, const Scalar& w) {
        g += w * Scalar(rank(profile_intersection(p, S)));
      },
      1000000);
  return g;
}

template <typename Scalar>
Scalar g_bruteforce(const TypeUniverse& u, const Vec<Scalar>& mass, int k, TypeMask S) {
  return g_bruteforce<Scalar>(
      u, mass, [k](TypeMask present) { return uniform_rank(k, present); }, S);
}

template <typename Scalar>
ExpectedRankOracle<Scalar> make_k_unit_oracle(const TypeUniverse& u, const Vec<Scalar>& mass,
                                              int k) {
  return {[u, mass, k](TypeMask S) { return g_k_dp<Scalar>(u, mass, k, S); }, u.type_count(),
          "k-unit exact DP (k=" + std::to_string(k) + ")"};
}

template <typename Scalar>
ExpectedRankOracle<Scalar> make_k_unit_enum_oracle(const TypeUniverse& u, const Vec<Scalar>& mass,
                                                   int k) {
  return {[u, mass, k](TypeMask S) { return g_bruteforce<Scalar>(u, mass, k, S); }, u.type_count(),
          "k-unit enumeration (k=" + std::to_string(k) + ")"};
}

template <typename Scalar>
ExpectedRankOracle<Scalar> make_matroid_oracle(const TypeUniverse& u, const Vec<Scalar>& mass,
                                               const MatroidOracle& m) {
  if (m.ground_size != u.type_count())
    throw StructuralError("matroid ground set does not match the type universe");
  return {[u, mass, rank = m.rank](TypeMask S) { return g_bruteforce<Scalar>(u, mass, rank, S); },
          u.type_count(), "matroid enumeration"};
}

// Approximate g_M by sampling; per-subset error eps*sqrt(n) with probability
// 1-delta (Hoeffding, rank range [0, n]).  Deterministic per subset: draws
// are seeded from (seed, S).
inline ExpectedRankOracle<double> make_matroid_oracle_sampled(const TypeUniverse& u,
                                                              const VecXd& mass,
                                                              const MatroidOracle& m, double eps,
                                                              double delta,
                                                              std::uint64_t seed) {
  if (m.ground_size != u.type_count())
    throw StructuralError("matroid ground set does not match the type universe");
  long N = static_cast<long>(std::ceil(std::log(2.0 / delta) / (2.0 * eps * eps))) *
           u.agent_count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "matroid sampled (eps=%g, delta=%g)", eps, delta);
  return {[u, mass, rank = m.rank, N, seed](TypeMask S) {
            Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (S + 1)));
            long long total = 0;
            for (long i = 0; i < N; ++i) {
              TypeProfile p = sample_profile(u, mass, rng);
              total += rank(profile_intersection(p, S));
            }
            return static_cast<double>(total) / static_cast<double>(N);
          },
          u.type_count(), buf};
}

// Precomputes g over every subset.  Worth it whenever many evaluations hit
// the same oracle (separation loops, rounding).
template <typename Scalar>
ExpectedRankOracle<Scalar> tabulate(const ExpectedRankOracle<Scalar>& g) {
  if (g.ground_size > kMaxEnumeratedTypes)
    throw InstanceTooLargeError("cannot tabulate over " + std::to_string(g.ground_size) +
                                " types (guard " + std::to_string(kMaxEnumeratedTypes) + ")");
  auto table = std::make_shared<std::vector<Scalar>>(std::size_t(1) << g.ground_size);
  for (TypeMask S = 0; S < table->size(); ++S) (*table)[S] = g.eval(S);
  return {[table](TypeMask S) { return (*table)[S]; }, g.ground_size, g.flavor + ", tabulated"};
}

// Minimizes g(S) - x_bar(S) by brute force over all subsets; ties go to the
// set containing the smallest non-shared ordinal.
template <typename Scalar>
ViolationCertificate<Scalar> separate(const Vec<Scalar>& xbar, const ExpectedRankOracle<Scalar>& g) {
  const int D = g.ground_size;
  if (D > kMaxEnumeratedTypes)
    throw InstanceTooLargeError("separation over " + std::to_string(D) + " types exceeds guard " +
                                std::to_string(kMaxEnumeratedTypes));
  if (xbar.size() != D) throw StructuralError("rule length does not match oracle ground set");
  ViolationCertificate<Scalar> best{0, g(0)};
  const TypeMask limit = D == 32 ? ~TypeMask(0) : (TypeMask(1) << D) - 1;
  for (TypeMask S = 1; S <= limit && S != 0; ++S) {
    Scalar x(0);
    for (TypeMask r = S; r;) {
      int t = __builtin_ctz(r);
      x += xbar[t];
      r &= r - 1;
    }
    Scalar slack = g(S) - x;
    if (slack < best.slack || (slack == best.slack && mask_lex_less(S, best.set)))
      best = {S, slack};
  }
  return best;
}

template <typename Scalar>
std::pair<bool, ViolationCertificate<Scalar>> is_feasible(const Vec<Scalar>& xbar,
                                                          const ExpectedRankOracle<Scalar>& g,
                                                          double tol = kFeasTol) {
  auto cert = separate(xbar, g);
  return {to_double_generic(cert.slack) >= -tol, cert};
}

}  // namespace auction
