#include "auction/ssa.hpp"

#include <algorithm>

namespace auction {

SsaLpLayout emit_ssa_polytope(LinearProgram& lp, const TypeUniverse& u, const VecXd& mass) {
  const int D = u.type_count(), n = u.agent_count();
  SsaLpLayout L;
  L.hold_var = Eigen::MatrixXi::Constant(D + 1, n + 1, -1);
  L.take_var = Eigen::MatrixXi::Constant(D + 1, D, -1);
  for (int tau = 0; tau <= D; ++tau)
    for (int i = stage_of(u, tau); i <= n; ++i)
      L.hold_var(tau, i) =
          (tau == D && i == 0) ? lp.add_variable(1.0, 1.0) : lp.add_variable(0.0, 1.0);
  for (int src = 0; src <= D; ++src)
    for (int dst = 0; dst < D; ++dst)
      if (stage_of(u, src) < stage_of(u, dst)) L.take_var(src, dst) = lp.add_variable(0.0, 1.0);

  for (int i = 1; i <= n; ++i) {
    for (int t = u.first_ordinal(i); t < u.first_ordinal(i) + u.agent_type_count(i); ++t) {
      std::vector<std::pair<int, double>> arrive{{L.hold_var(t, i), 1.0}};
      for (int src = 0; src <= D; ++src)
        if (stage_of(u, src) < i) arrive.push_back({L.take_var(src, t), -1.0});
      lp.add_row(arrive, 0.0, 0.0);
    }
    for (int src = 0; src <= D; ++src) {
      if (stage_of(u, src) >= i) continue;
      std::vector<std::pair<int, double>> retain{{L.hold_var(src, i), 1.0},
                                                 {L.hold_var(src, i - 1), -1.0}};
      for (int t = u.first_ordinal(i); t < u.first_ordinal(i) + u.agent_type_count(i); ++t) {
        retain.push_back({L.take_var(src, t), 1.0});
        lp.add_row({{L.take_var(src, t), 1.0}, {L.hold_var(src, i - 1), -mass[t]}}, -kInf, 0.0);
      }
      lp.add_row(retain, 0.0, 0.0);
    }
  }
  return L;
}

SsaPoint point_from_lp(const TypeUniverse& u, const SsaLpLayout& layout, const LpSolution& sol) {
  const int D = u.type_count(), n = u.agent_count();
  SsaPoint pt;
  pt.hold = MatXd::Zero(D + 1, n + 1);
  pt.take = MatXd::Zero(D + 1, D);
  for (int tau = 0; tau <= D; ++tau)
    for (int i = 0; i <= n; ++i)
      if (layout.hold_var(tau, i) >= 0)
        pt.hold(tau, i) = std::max(0.0, sol.x[layout.hold_var(tau, i)]);
  for (int src = 0; src <= D; ++src)
    for (int dst = 0; dst < D; ++dst)
      if (layout.take_var(src, dst) >= 0)
        pt.take(src, dst) = std::max(0.0, sol.x[layout.take_var(src, dst)]);
  return pt;
}

MaxCoverageResult max_coverage_lp(const TypeUniverse& u, const VecXd& mass,
                                  const VecXd& xbar_target) {
  if (xbar_target.size() != u.type_count())
    throw StructuralError("target rule has wrong length");
  LinearProgram lp;
  auto layout = emit_ssa_polytope(lp, u, mass);
  const int n = u.agent_count();
  for (int t = 0; t < u.type_count(); ++t) {
    lp.add_row({{layout.hold_var(t, n), 1.0}}, -kInf, std::max(0.0, xbar_target[t]));
    lp.objective_coefficient(layout.hold_var(t, n), 1.0);
  }
  auto sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal)
    throw SolverError("coverage program did not solve to optimality");
  return {point_from_lp(u, layout, sol), sol.objective};
}

bool is_augmentable(const TypeUniverse& u, const VecXd& mass, const SsaPoint& pt, int ordinal,
                    double tol) {
  const int D = u.type_count(), n = u.agent_count();
  if (ordinal == D) return pt.hold(D, n) > tol;
  LinearProgram lp;
  auto layout = emit_ssa_polytope(lp, u, mass);
  for (int t = 0; t < D; ++t) {
    if (t == ordinal) continue;
    double v = pt.hold(t, n);
    lp.add_row({{layout.hold_var(t, n), 1.0}}, v - 1e-9, v + 1e-9);
  }
  lp.objective_coefficient(layout.hold_var(ordinal, n), 1.0);
  auto sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal)
    throw SolverError("augmentability probe did not solve");
  return sol.objective > pt.hold(ordinal, n) + tol;
}

}  // namespace auction
