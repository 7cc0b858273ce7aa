#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>

namespace auction {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecXd = Vec<double>;
using MatXd = Mat<double>;
using VecXi = Vec<int>;

// Subset of global type ordinals, one bit per ordinal.
using TypeMask = std::uint32_t;

// Hard cap on |T_N| wherever code enumerates all subsets or submasks.
inline constexpr int kMaxEnumeratedTypes = 22;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Default comparison tolerances.  Callers may override per operation.
inline constexpr double kFeasTol = 1e-9;   // constraint satisfaction / probability mass
inline constexpr double kOptTol = 1e-7;    // objective / interim value agreement

inline int popcount(TypeMask m) { return __builtin_popcount(m); }

// Scalar-generic narrowing to double (identity for double, exact-to-nearest
// for multiprecision rationals).
inline double to_double_generic(double v) { return v; }
template <typename Scalar>
double to_double_generic(const Scalar& v) {
  return v.template convert_to<double>();
}

template <typename Scalar>
Scalar scalar_abs(const Scalar& v) {
  return v < Scalar(0) ? Scalar(-v) : v;
}

// True if a precedes b in the element-wise ordering of subsets: the set
// owning the smallest non-shared ordinal comes first.
inline bool mask_lex_less(TypeMask a, TypeMask b) {
  TypeMask d = a ^ b;
  if (d == 0) return false;
  return a & (d & -d);
}

}  // namespace auction
