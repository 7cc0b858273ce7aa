#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "auction/errors.hpp"
#include "auction/lp.hpp"
#include "auction/model.hpp"
#include "auction/random.hpp"
#include "auction/types.hpp"

namespace auction {

// Token-passing state space.  Row index = global type ordinal, with one extra
// row for the dummy holder t0; column index = stage (0..n for hold).
// hold(tau, i): probability tau holds the token after stage i.
// take(src, dst): probability the token moves from src to dst at dst's stage.
template <typename Scalar>
struct SsaPointT {
  Mat<Scalar> hold;
  Mat<Scalar> take;
};
using SsaPoint = SsaPointT<double>;

// prob(src, dst): chance the token is offered onward from holder src to a
// realized type dst at dst's stage.
template <typename Scalar>
struct TransitionTableT {
  Mat<Scalar> prob;
};
using TransitionTable = TransitionTableT<double>;

inline int dummy_ordinal(const TypeUniverse& u) { return u.type_count(); }

// Dummy acts before every agent: stage 0.
inline int stage_of(const TypeUniverse& u, int ordinal) {
  return ordinal == u.type_count() ? 0 : u.agent_of(ordinal);
}

template <typename Scalar>
void validate_table(const TypeUniverse& u, const TransitionTableT<Scalar>& table) {
  const int D = u.type_count();
  if (table.prob.rows() != D + 1 || table.prob.cols() != D)
    throw StructuralError("transition table has wrong shape");
  for (int src = 0; src <= D; ++src)
    for (int dst = 0; dst < D; ++dst) {
      if (stage_of(u, src) >= stage_of(u, dst)) continue;
      double v = to_double_generic(table.prob(src, dst));
      if (v < 0.0 || v > 1.0)
        throw StructuralError("transition probability outside [0,1] at (" + std::to_string(src) +
                              "," + std::to_string(dst) + ")");
    }
}

// Forward pass: the exact distribution of the token through all stages.
template <typename Scalar>
SsaPointT<Scalar> interim_of_table(const TypeUniverse& u, const Vec<Scalar>& mass,
                                   const TransitionTableT<Scalar>& table) {
  validate_table(u, table);
  const int D = u.type_count(), n = u.agent_count();
  SsaPointT<Scalar> pt;
  pt.hold = Mat<Scalar>::Zero(D + 1, n + 1);
  pt.take = Mat<Scalar>::Zero(D + 1, D);
  pt.hold(D, 0) = Scalar(1);
  for (int i = 1; i <= n; ++i) {
    for (int src = 0; src <= D; ++src) {
      if (stage_of(u, src) >= i) continue;
      Scalar out(0);
      for (int t = u.first_ordinal(i); t < u.first_ordinal(i) + u.agent_type_count(i); ++t) {
        pt.take(src, t) = pt.hold(src, i - 1) * table.prob(src, t) * mass[t];
        out += pt.take(src, t);
      }
      pt.hold(src, i) = pt.hold(src, i - 1) - out;
    }
    for (int t = u.first_ordinal(i); t < u.first_ordinal(i) + u.agent_type_count(i); ++t) {
      Scalar in(0);
      for (int src = 0; src <= D; ++src)
        if (stage_of(u, src) < i) in += pt.take(src, t);
      pt.hold(t, i) = in;
    }
  }
  return pt;
}

template <typename Scalar>
Vec<Scalar> xbar_of_point(const TypeUniverse& u, const SsaPointT<Scalar>& pt) {
  return pt.hold.col(u.agent_count()).head(u.type_count());
}

// All violated token-flow constraints, humanly labeled; empty iff the point
// lies in the polytope (within tol).
template <typename Scalar>
std::vector<std::string> ssa_violations(const TypeUniverse& u, const Vec<Scalar>& mass,
                                        const SsaPointT<Scalar>& pt, double tol = kFeasTol) {
  std::vector<std::string> out;
  const int D = u.type_count(), n = u.agent_count();
  if (pt.hold.rows() != D + 1 || pt.hold.cols() != n + 1 || pt.take.rows() != D + 1 ||
      pt.take.cols() != D) {
    out.push_back("wrong shape");
    return out;
  }
  auto name = [&](int ord) { return ord == D ? std::string("t0") : u.qualified_label(ord); };
  if (std::abs(to_double_generic(pt.hold(D, 0)) - 1.0) > tol)
    out.push_back("dummy does not start with the token");
  for (int tau = 0; tau <= D; ++tau)
    for (int i = stage_of(u, tau); i <= n; ++i)
      if (to_double_generic(pt.hold(tau, i)) < -tol)
        out.push_back("negative hold at (" + name(tau) + ", stage " + std::to_string(i) + ")");
  for (int i = 1; i <= n; ++i) {
    for (int t = u.first_ordinal(i); t < u.first_ordinal(i) + u.agent_type_count(i); ++t) {
      Scalar in(0);
      for (int src = 0; src <= D; ++src)
        if (stage_of(u, src) < i) in += pt.take(src, t);
      if (std::abs(to_double_generic(Scalar(pt.hold(t, i) - in))) > tol)
        out.push_back("arrival mismatch at " + name(t));
    }
    for (int src = 0; src <= D; ++src) {
      if (stage_of(u, src) >= i) continue;
      Scalar out_flow(0);
      for (int t = u.first_ordinal(i); t < u.first_ordinal(i) + u.agent_type_count(i); ++t) {
        out_flow += pt.take(src, t);
        Scalar z = pt.take(src, t);
        if (to_double_generic(z) < -tol)
          out.push_back("negative transfer " + name(src) + " -> " + name(t));
        if (to_double_generic(Scalar(z - pt.hold(src, i - 1) * mass[t])) > tol)
          out.push_back("transfer above capacity " + name(src) + " -> " + name(t));
      }
      if (std::abs(to_double_generic(Scalar(pt.hold(src, i) - (pt.hold(src, i - 1) - out_flow)))) > tol)
        out.push_back("retention mismatch at (" + name(src) + ", stage " + std::to_string(i) + ")");
    }
  }
  return out;
}

// Recovers the table from flows: prob = take / (hold * mass), zero where the
// denominator vanishes.
template <typename Scalar>
TransitionTableT<Scalar> extract_table(const TypeUniverse& u, const Vec<Scalar>& mass,
                                       const SsaPointT<Scalar>& pt, double tol = kFeasTol) {
  auto bad = ssa_violations(u, mass, pt, tol);
  if (!bad.empty()) throw StructuralError("not a token-flow point: " + bad.front());
  const int D = u.type_count();
  TransitionTableT<Scalar> table;
  table.prob = Mat<Scalar>::Zero(D + 1, D);
  for (int src = 0; src <= D; ++src)
    for (int dst = 0; dst < D; ++dst) {
      if (stage_of(u, src) >= stage_of(u, dst)) continue;
      Scalar denom = pt.hold(src, stage_of(u, dst) - 1) * mass[dst];
      if (to_double_generic(denom) <= 1e-12) continue;
      Scalar p = pt.take(src, dst) / denom;
      double pd = to_double_generic(p);
      if (pd < 0.0) p = Scalar(0);
      if (pd > 1.0) p = Scalar(1);
      table.prob(src, dst) = p;
    }
  return table;
}

// One token-passing execution: exactly one coin per agent.  Returns the
// winning ordinal, or -1 when the dummy keeps the token.
inline int run_ssa(const TypeUniverse& u, const TransitionTable& table, const TypeProfile& profile,
                   Rng& rng) {
  int holder = dummy_ordinal(u);
  for (int i = 1; i <= u.agent_count(); ++i) {
    int t = profile.chosen[i - 1];
    double coin = uniform01(rng);
    if (stage_of(u, holder) < i && coin < table.prob(holder, t)) holder = t;
  }
  return holder == dummy_ordinal(u) ? -1 : holder;
}

// Spare capacity for moving mass from a to b (either may be the dummy).
template <typename Scalar>
Scalar residual_capacity(const TypeUniverse& u, const Vec<Scalar>& mass,
                         const SsaPointT<Scalar>& pt, int a, int b) {
  int sa = stage_of(u, a), sb = stage_of(u, b);
  if (sa == sb || a == b) return Scalar(0);
  if (sa < sb) return pt.hold(a, sb - 1) * mass[b] - pt.take(a, b);
  return pt.take(b, a);
}

// Moves a rho-fraction of src's remaining token mass to dst along the cycle
// through stage max(stage(src), stage(dst)); downstream flows scale with it.
template <typename Scalar>
void reroute_in_place(const TypeUniverse& u, const Vec<Scalar>& mass, SsaPointT<Scalar>& pt,
                      int src, int dst, const Scalar& rho) {
  const int D = u.type_count(), n = u.agent_count();
  double rd = to_double_generic(rho);
  if (rd < 0.0 || rd > 1.0) throw StructuralError("fraction outside [0,1]");
  int si = stage_of(u, src), di = stage_of(u, dst);
  if (src == dst || si == di) throw StructuralError("reroute needs types at distinct stages");
  const int hi = std::max(si, di);

  if (si < di) {
    Scalar z = pt.take(src, dst) + rho * pt.hold(src, di);
    Scalar cap = pt.hold(src, di - 1) * mass[dst];
    if (to_double_generic(Scalar(z - cap)) > 1e-12)
      throw RerouteCapacityError("connecting edge over capacity");
    pt.take(src, dst) = z;
  } else {
    Scalar z = pt.take(dst, src) - rho * pt.hold(src, si);
    if (to_double_generic(z) < -1e-12)
      throw RerouteCapacityError("connecting edge driven negative");
    if (to_double_generic(z) < 0.0) z = Scalar(0);
    pt.take(dst, src) = z;
  }
  for (int stage = hi; stage <= n; ++stage) {
    Scalar moved = rho * pt.hold(src, stage);
    pt.hold(dst, stage) += moved;
    pt.hold(src, stage) -= moved;
  }
  for (int t = 0; t < D; ++t) {
    if (stage_of(u, t) <= hi) continue;
    Scalar moved = rho * pt.take(src, t);
    pt.take(dst, t) += moved;
    pt.take(src, t) -= moved;
  }
}

template <typename Scalar>
SsaPointT<Scalar> reroute(const TypeUniverse& u, const Vec<Scalar>& mass,
                          const SsaPointT<Scalar>& pt, int src, int dst, const Scalar& rho) {
  auto bad = ssa_violations(u, mass, pt);
  if (!bad.empty()) throw StructuralError("not a token-flow point: " + bad.front());
  SsaPointT<Scalar> out = pt;
  reroute_in_place(u, mass, out, src, dst, rho);
  return out;
}

// Removes every type that sometimes receives the token but never keeps it
// through the end, by rerouting its incoming flow back to the senders.
// Final-stage masses of real types are unchanged.
template <typename Scalar>
SsaPointT<Scalar> eliminate_degenerate(const TypeUniverse& u, const Vec<Scalar>& mass,
                                       const SsaPointT<Scalar>& pt, double tol = 1e-12) {
  const int D = u.type_count(), n = u.agent_count();
  SsaPointT<Scalar> out = pt;
  for (int t = 0; t < D; ++t) {
    int i = stage_of(u, t);
    if (to_double_generic(out.hold(t, n)) > tol) continue;
    for (int src = 0; src <= D; ++src) {
      if (stage_of(u, src) >= i) continue;
      if (to_double_generic(out.hold(t, i)) <= tol) break;
      if (to_double_generic(out.take(src, t)) <= 0.0) continue;
      Scalar rho = out.take(src, t) / out.hold(t, i);
      if (to_double_generic(rho) > 1.0) rho = Scalar(1);
      reroute_in_place(u, mass, out, t, src, rho);
    }
    for (int stage = i; stage <= n; ++stage)
      if (std::abs(to_double_generic(out.hold(t, stage))) <= 1e-9) out.hold(t, stage) = Scalar(0);
  }
  return out;
}

// Where each polytope coordinate landed in an LP.
struct SsaLpLayout {
  Eigen::MatrixXi hold_var;  // (D+1) x (n+1), -1 where undefined
  Eigen::MatrixXi take_var;  // (D+1) x D, -1 where undefined
};

// Adds the token-flow variables and constraints to an LP.
SsaLpLayout emit_ssa_polytope(LinearProgram& lp, const TypeUniverse& u, const VecXd& mass);

SsaPoint point_from_lp(const TypeUniverse& u, const SsaLpLayout& layout, const LpSolution& sol);

struct MaxCoverageResult {
  SsaPoint point;
  double achieved = 0.0;
};

// Largest total final mass placeable under the per-type targets; the target
// rule is implementable iff achieved == sum(target).
MaxCoverageResult max_coverage_lp(const TypeUniverse& u, const VecXd& mass,
                                  const VecXd& xbar_target);

// True iff the type's final mass can strictly grow with every other type's
// final mass held fixed (dummy: true iff it ever keeps the token).
bool is_augmentable(const TypeUniverse& u, const VecXd& mass, const SsaPoint& pt, int ordinal,
                    double tol = kOptTol);

}  // namespace auction
