#include "ramcp/simplex.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include "ramcp/errors.hpp"

namespace ramcp {

namespace {

constexpr double kPivotTol = 1e-12;
constexpr double kCostTol = 1e-11;
constexpr double kFeasibilityTol = 1e-9;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double rhs(std::size_t r) const { return at(r, cols_); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double p = at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) /= p;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  void erase_row(std::size_t r) {
    data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r * (cols_ + 1)),
                data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * (cols_ + 1)));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    --rows_;
  }

  /// Runs Bland's-rule simplex minimizing `cost` over columns with
  /// allowed[c] set.
  void optimize(const std::vector<double>& cost, const std::vector<bool>& allowed) {
    const std::size_t max_iters = 50000 + 100 * (rows_ + cols_);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
      std::size_t entering = cols_;
      for (std::size_t c = 0; c < cols_ && entering == cols_; ++c) {
        if (!allowed[c]) continue;
        double reduced = cost[c];
        for (std::size_t r = 0; r < rows_; ++r) reduced -= cost[basis_[r]] * at(r, c);
        if (reduced < -kCostTol) entering = c;
      }
      if (entering == cols_) return;

      std::size_t leaving = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = at(r, entering);
        if (a <= kPivotTol) continue;
        const double ratio = rhs(r) / a;
        if (ratio < best_ratio - 1e-14 ||
            (std::abs(ratio - best_ratio) <= 1e-14 && leaving < rows_ && basis_[r] < basis_[leaving])) {
          best_ratio = ratio;
          leaving = r;
        }
      }
      if (leaving == rows_) throw UnboundedProblem("linear program is unbounded");
      pivot(leaving, entering);
    }
    throw Error("simplex iteration limit reached");
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpSolution simplex_solve(const LinearProgram& lp) {
  const std::size_t n = lp.objective.size();
  const std::size_t m = lp.rows.size();
  if (n == 0) throw InvalidArgument("linear program has no variables");

  // Normalize to nonnegative right-hand sides.
  std::vector<LinearProgram::Row> rows = lp.rows;
  std::size_t num_slack = 0;
  std::size_t num_artificial = 0;
  for (auto& row : rows) {
    if (row.coeffs.size() != n) throw InvalidArgument("constraint row has wrong length");
    if (row.rhs < 0.0) {
      for (double& v : row.coeffs) v = -v;
      row.rhs = -row.rhs;
      if (row.relation == Relation::LessEqual) row.relation = Relation::GreaterEqual;
      else if (row.relation == Relation::GreaterEqual) row.relation = Relation::LessEqual;
    }
    if (row.relation != Relation::Equal) ++num_slack;
    if (row.relation != Relation::LessEqual) ++num_artificial;
  }

  const std::size_t cols = n + num_slack + num_artificial;
  const std::size_t first_artificial = n + num_slack;
  Tableau t(m, cols);
  std::size_t next_slack = n;
  std::size_t next_artificial = first_artificial;
  for (std::size_t r = 0; r < m; ++r) {
    const auto& row = rows[r];
    for (std::size_t c = 0; c < n; ++c) t.at(r, c) = row.coeffs[c];
    t.rhs(r) = row.rhs;
    switch (row.relation) {
      case Relation::LessEqual:
        t.at(r, next_slack) = 1.0;
        t.basis()[r] = next_slack++;
        break;
      case Relation::GreaterEqual:
        t.at(r, next_slack++) = -1.0;
        t.at(r, next_artificial) = 1.0;
        t.basis()[r] = next_artificial++;
        break;
      case Relation::Equal:
        t.at(r, next_artificial) = 1.0;
        t.basis()[r] = next_artificial++;
        break;
    }
  }

  std::vector<bool> allowed(cols, true);
  if (num_artificial > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t c = first_artificial; c < cols; ++c) phase1[c] = 1.0;
    t.optimize(phase1, allowed);
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
      if (t.basis()[r] >= first_artificial) infeasibility += t.rhs(r);
    }
    if (infeasibility > kFeasibilityTol) throw InfeasibleProblem("linear program is infeasible");

    // Drive remaining (zero-level) artificials out of the basis.
    for (std::size_t r = 0; r < t.rows();) {
      if (t.basis()[r] < first_artificial) {
        ++r;
        continue;
      }
      std::size_t replacement = first_artificial;
      for (std::size_t c = 0; c < first_artificial; ++c) {
        if (std::abs(t.at(r, c)) > 1e-9) {
          replacement = c;
          break;
        }
      }
      if (replacement == first_artificial) {
        t.erase_row(r);  // redundant constraint
      } else {
        t.pivot(r, replacement);
        ++r;
      }
    }
    for (std::size_t c = first_artificial; c < cols; ++c) allowed[c] = false;
  }

  std::vector<double> cost(cols, 0.0);
  for (std::size_t c = 0; c < n; ++c) cost[c] = lp.objective[c];
  t.optimize(cost, allowed);

  LpSolution sol;
  sol.x.assign(n, 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    if (t.basis()[r] < n) sol.x[t.basis()[r]] = std::max(0.0, t.rhs(r));
  }
  for (std::size_t c = 0; c < n; ++c) sol.objective += lp.objective[c] * sol.x[c];
  return sol;
}

}  // namespace ramcp
