#include "auction/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "auction/errors.hpp"

namespace auction {

int LinearProgram::add_variable(double lower, double upper) {
  if (lower > upper) throw StructuralError("variable bounds cross");
  lower_.push_back(lower);
  upper_.push_back(upper);
  objective_.push_back(0.0);
  return static_cast<int>(lower_.size()) - 1;
}

int LinearProgram::add_variables(int n, double lower, double upper) {
  int first = variable_count();
  for (int i = 0; i < n; ++i) add_variable(lower, upper);
  return first;
}

void LinearProgram::objective_coefficient(int var, double coef) {
  objective_.at(var) = coef;
}

int LinearProgram::add_row(std::vector<std::pair<int, double>> terms, double lower, double upper) {
  if (lower > upper) throw StructuralError("row bounds cross");
  for (auto& [v, c] : terms) {
    if (v < 0 || v >= variable_count()) throw StructuralError("row references unknown variable");
    (void)c;
  }
  rows_.push_back(Row{std::move(terms), lower, upper});
  return row_count() - 1;
}

namespace {

// One standardized constraint: coeffs . xs  (<= | ==)  rhs, xs >= 0.
struct StdRow {
  VecXd coeffs;
  double rhs = 0.0;
  bool equality = false;
  int source_row = -1;  // original row index, -1 for variable-bound rows
  double dual_sign = 0.0;  // contribution factor of this row's dual to the source row's dual
};

// How an original variable maps onto standardized columns.
struct VarMap {
  int col = -1;       // primary column
  int neg_col = -1;   // second column of a free split
  double scale = 1.0; // +1 shifted, -1 mirrored
  double offset = 0.0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  const double tol = options.tol;
  const int n_orig = lp.variable_count();

  // --- standardize variables ---
  std::vector<VarMap> vmap(n_orig);
  int ncols = 0;
  for (int j = 0; j < n_orig; ++j) {
    double lo = lp.lower_[j], up = lp.upper_[j];
    VarMap& m = vmap[j];
    if (std::isinf(lo) && std::isinf(up)) {  // free: x = xp - xn
      m.col = ncols++;
      m.neg_col = ncols++;
    } else if (std::isinf(lo)) {  // x = up - xs
      m.col = ncols++;
      m.scale = -1.0;
      m.offset = up;
    } else {  // x = lo + xs
      m.col = ncols++;
      m.offset = lo;
    }
  }

  std::vector<StdRow> rows;
  auto emit = [&](const std::vector<std::pair<int, double>>& terms, double lo, double up,
                  int source) {
    // Substitute standardized variables, producing a'.xs in [lo', up'].
    VecXd a = VecXd::Zero(ncols);
    double shift = 0.0;
    for (auto [v, c] : terms) {
      const VarMap& m = vmap[v];
      a[m.col] += c * m.scale;
      if (m.neg_col >= 0) a[m.neg_col] -= c;
      shift += c * m.offset;
    }
    if (!std::isinf(lo)) lo -= shift;
    if (!std::isinf(up)) up -= shift;
    if (!std::isinf(lo) && !std::isinf(up) && lo == up) {
      rows.push_back(StdRow{a, up, true, source, 1.0});
      return;
    }
    if (!std::isinf(up)) rows.push_back(StdRow{a, up, false, source, 1.0});
    if (!std::isinf(lo)) rows.push_back(StdRow{-a, -lo, false, source, -1.0});
  };

  for (int j = 0; j < n_orig; ++j) {
    double lo = lp.lower_[j], up = lp.upper_[j];
    if (!std::isinf(lo) && !std::isinf(up))
      emit({{j, 1.0}}, -kInf, up, -1);  // lower bound handled by the shift
  }
  for (int r = 0; r < lp.row_count(); ++r)
    emit(lp.rows_[r].terms, lp.rows_[r].lower, lp.rows_[r].upper, r);

  const int m = static_cast<int>(rows.size());

  // Objective over standardized columns (internally minimized).
  VecXd cmin = VecXd::Zero(ncols);
  for (int j = 0; j < n_orig; ++j) {
    double c = lp.objective_[j];
    if (c == 0.0) continue;
    const VarMap& vm = vmap[j];
    cmin[vm.col] -= c * vm.scale;
    if (vm.neg_col >= 0) cmin[vm.neg_col] += c;
  }

  // --- build tableau: columns = structural | slack | artificial | rhs ---
  std::vector<double> flip(m, 1.0);
  std::vector<int> slack_col(m, -1), art_col(m, -1);
  int nslack = 0, nart = 0;
  for (int i = 0; i < m; ++i) {
    if (!rows[i].equality) slack_col[i] = ncols + nslack++;
    bool neg = rows[i].rhs < 0.0;
    if (neg) flip[i] = -1.0;
    if (rows[i].equality || neg) ++nart;
  }
  int art_base = ncols + nslack;
  int total = ncols + nslack + nart;
  {
    int k = art_base;
    for (int i = 0; i < m; ++i)
      if (rows[i].equality || flip[i] < 0) art_col[i] = k++;
  }

  MatXd T = MatXd::Zero(m, total + 1);
  std::vector<int> basis(m, -1);
  for (int i = 0; i < m; ++i) {
    T.row(i).head(ncols) = flip[i] * rows[i].coeffs.transpose();
    if (slack_col[i] >= 0) T(i, slack_col[i]) = flip[i];
    T(i, total) = flip[i] * rows[i].rhs;
    if (art_col[i] >= 0) {
      T(i, art_col[i]) = 1.0;
      basis[i] = art_col[i];
    } else {
      basis[i] = slack_col[i];
    }
  }

  std::vector<bool> banned(total, false);

  long iter_cap = options.max_iterations > 0 ? options.max_iterations
                                             : 400L * (m + total) + 5000;
  long bland_after = 4L * (m + total) + 200;
  long iters = 0;

  VecXd red = VecXd::Zero(total);  // reduced costs of the current objective

  auto recompute_reduced = [&](const VecXd& cost) {
    red = cost;
    double unused = 0.0;
    (void)unused;
    for (int i = 0; i < m; ++i) {
      double cb = cost[basis[i]];
      if (cb != 0.0) red -= cb * T.row(i).head(total).transpose();
    }
  };

  auto pivot = [&](int prow, int pcol) {
    T.row(prow) /= T(prow, pcol);
    for (int i = 0; i < m; ++i) {
      if (i == prow) continue;
      double f = T(i, pcol);
      if (f != 0.0) T.row(i) -= f * T.row(prow);
    }
    double f = red[pcol];
    if (f != 0.0) {
      red -= f * T.row(prow).head(total).transpose();
      red[pcol] = 0.0;  // keep exactly zero against drift
    }
    basis[prow] = pcol;
  };

  // Returns kOptimal or kUnbounded or kIterationLimit for the current objective.
  auto run_simplex = [&]() -> LpStatus {
    while (true) {
      if (++iters > iter_cap) return LpStatus::kIterationLimit;
      bool bland = iters > bland_after;
      int enter = -1;
      double best = -tol;
      for (int j = 0; j < total; ++j) {
        if (banned[j]) continue;
        if (red[j] < best) {
          enter = j;
          if (bland) break;
          best = red[j];
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m; ++i) {
        double a = T(i, enter);
        if (a <= tol) continue;
        double ratio = T(i, total) / a;
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      int leaving_var = basis[leave];
      pivot(leave, enter);
      if (leaving_var >= art_base) banned[leaving_var] = true;
      if (T(leave, total) < 0.0 && T(leave, total) > -1e-9) T(leave, total) = 0.0;
    }
  };

  LpSolution out;
  out.x = VecXd::Zero(n_orig);
  out.row_dual = VecXd::Zero(lp.row_count());

  // --- phase 1 ---
  std::vector<int> live(m);
  for (int i = 0; i < m; ++i) live[i] = i;
  if (nart > 0) {
    VecXd c1 = VecXd::Zero(total);
    for (int j = art_base; j < total; ++j) c1[j] = 1.0;
    recompute_reduced(c1);
    LpStatus s1 = run_simplex();
    if (s1 == LpStatus::kIterationLimit) {
      out.status = s1;
      return out;
    }
    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
      if (basis[i] >= art_base) infeas += T(i, total);
    if (infeas > 1e-7) {
      out.status = LpStatus::kInfeasible;
      return out;
    }
    // Drive remaining artificials out of the basis; rows that cannot pivot
    // are redundant and their artificial stays basic at zero.
    for (int i = 0; i < m; ++i) {
      if (basis[i] < art_base) continue;
      int pcol = -1;
      for (int j = 0; j < art_base; ++j)
        if (std::abs(T(i, j)) > 1e-7) {
          pcol = j;
          break;
        }
      if (pcol >= 0) pivot(i, pcol);
    }
    for (int j = art_base; j < total; ++j) banned[j] = true;
  }

  // --- phase 2 ---
  VecXd c2 = VecXd::Zero(total);
  c2.head(ncols) = cmin;
  recompute_reduced(c2);
  LpStatus s2 = run_simplex();
  if (s2 != LpStatus::kOptimal) {
    out.status = s2 == LpStatus::kUnbounded ? LpStatus::kUnbounded : LpStatus::kIterationLimit;
    return out;
  }

  // --- recover primal ---
  VecXd xs = VecXd::Zero(total);
  for (int i = 0; i < m; ++i) xs[basis[i]] = T(i, total);
  for (int j = 0; j < n_orig; ++j) {
    const VarMap& vm = vmap[j];
    double v = vm.offset + vm.scale * xs[vm.col];
    if (vm.neg_col >= 0) v -= xs[vm.neg_col];
    out.x[j] = v;
  }
  out.objective = 0.0;
  for (int j = 0; j < n_orig; ++j) out.objective += lp.objective_[j] * out.x[j];

  // --- duals from final reduced costs ---
  // Standard row i carries dual y_i = red[slack] (slack rows) or
  // flip * red[artificial] (equality rows); the original row's dual sums the
  // contributions of the standard rows it produced.
  for (int i = 0; i < m; ++i) {
    int src = rows[i].source_row;
    if (src < 0) continue;
    double y;
    if (slack_col[i] >= 0)
      y = red[slack_col[i]];
    else
      y = flip[i] * red[art_col[i]];
    out.row_dual[src] += rows[i].dual_sign * y;
  }

  out.status = LpStatus::kOptimal;
  return out;
}

}  // namespace auction
