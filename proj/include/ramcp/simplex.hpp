#pragma once

#include <vector>

namespace ramcp {

enum class Relation { LessEqual, Equal, GreaterEqual };

/// minimize c'x  subject to  rows,  x >= 0.
struct LinearProgram {
  struct Row {
    std::vector<double> coeffs;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
  };

  std::vector<double> objective;
  std::vector<Row> rows;

  void add_row(std::vector<double> coeffs, Relation relation, double rhs) {
    rows.push_back({std::move(coeffs), relation, rhs});
  }
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
};

/// Dense two-phase tableau simplex with Bland's rule. Intended for problems
/// with at most a few hundred variables and rows. Throws InfeasibleProblem or
/// UnboundedProblem.
LpSolution simplex_solve(const LinearProgram& lp);

}  // namespace ramcp
