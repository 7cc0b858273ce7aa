#pragma once

#include <utility>
#include <vector>

#include "auction/types.hpp"

namespace auction {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  double objective = 0.0;
  VecXd x;         // per variable
  VecXd row_dual;  // per row: d(objective)/d(bound shift), see add_row
};

struct LpOptions {
  double tol = 1e-9;        // reduced-cost / pivot tolerance
  long max_iterations = 0;  // 0 = scale with problem size
};

// Dense LP builder, maximization.  Variables have box bounds (+-inf allowed);
// rows are lower <= a.x <= upper with either side optionally infinite.
class LinearProgram {
 public:
  int add_variable(double lower = 0.0, double upper = kInf);
  // Adds n variables with identical bounds; returns the first index.
  int add_variables(int n, double lower = 0.0, double upper = kInf);

  void objective_coefficient(int var, double coef);

  // Returns the row index.  The reported dual is the objective gradient for
  // shifting the whole [lower, upper] interval upward by one unit.
  int add_row(std::vector<std::pair<int, double>> terms, double lower, double upper);

  int variable_count() const { return static_cast<int>(lower_.size()); }
  int row_count() const { return static_cast<int>(rows_.size()); }

 private:
  friend LpSolution solve_lp(const LinearProgram&, const LpOptions&);
  struct Row {
    std::vector<std::pair<int, double>> terms;
    double lower, upper;
  };
  std::vector<double> lower_, upper_, objective_;
  std::vector<Row> rows_;
};

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace auction
