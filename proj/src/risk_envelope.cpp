#include "ramcp/risk_envelope.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "ramcp/errors.hpp"
#include "ramcp/simplex.hpp"

namespace ramcp {

namespace {

void check_values(const RiskEnvelope& envelope, std::span<const double> values) {
  if (values.size() != envelope.size()) throw InvalidArgument("value vector length differs from model count");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("model values must be finite");
  }
}

AdversarialResponse make_response(const Belief& prior, std::vector<double> b, std::span<const double> values) {
  AdversarialResponse out;
  out.zeta.assign(prior.size(), 1.0);
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior[i] > 0.0) out.zeta[i] = b[i] / prior[i];
  }
  for (std::size_t i = 0; i < b.size(); ++i) out.objective_value += b[i] * values[i];
  out.b_adv = Belief(std::move(b));
  return out;
}

// Solves the square system A x = rhs in place; false if singular.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> rhs, std::vector<double>& x) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-12) return false;
    std::swap(a[piv], a[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i] / a[i][i];
  return true;
}

}  // namespace

RiskEnvelope::RiskEnvelope(EnvelopeKind kind, Belief prior, double alpha, std::vector<LinearConstraint> constraints)
    : kind_(kind), prior_(std::move(prior)), alpha_(alpha), constraints_(std::move(constraints)) {}

RiskEnvelope RiskEnvelope::expectation(Belief prior) {
  return RiskEnvelope(EnvelopeKind::Expectation, std::move(prior), 1.0, {});
}

RiskEnvelope RiskEnvelope::worst_case(Belief prior) {
  return RiskEnvelope(EnvelopeKind::WorstCase, std::move(prior), 0.0, {});
}

RiskEnvelope RiskEnvelope::cvar(Belief prior, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("CVaR level must lie in (0, 1]");
  return RiskEnvelope(EnvelopeKind::CVaR, std::move(prior), alpha, {});
}

RiskEnvelope RiskEnvelope::polytope(Belief prior, std::vector<LinearConstraint> constraints) {
  for (const auto& c : constraints) {
    if (c.coeffs.size() != prior.size()) throw InvalidArgument("polytope constraint has wrong length");
  }
  RiskEnvelope env(EnvelopeKind::GeneralPolytope, std::move(prior), 0.0, std::move(constraints));
  // Nonempty check: solve a feasibility LP.
  LinearProgram lp;
  lp.objective.assign(env.size(), 0.0);
  std::vector<double> density(env.size());
  for (std::size_t i = 0; i < env.size(); ++i) density[i] = env.prior_[i];
  lp.add_row(density, Relation::Equal, 1.0);
  for (const auto& c : env.constraints_) lp.add_row(c.coeffs, Relation::LessEqual, c.bound);
  try {
    simplex_solve(lp);
  } catch (const InfeasibleProblem&) {
    throw InfeasibleProblem("risk envelope polytope is empty");
  }
  return env;
}

std::string RiskEnvelope::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case EnvelopeKind::Expectation: out << "expectation"; break;
    case EnvelopeKind::WorstCase: out << "worst_case"; break;
    case EnvelopeKind::CVaR: out << "cvar(" << alpha_ << ")"; break;
    case EnvelopeKind::GeneralPolytope: out << "polytope(" << constraints_.size() << " constraints)"; break;
  }
  return out.str();
}

std::vector<LinearConstraint> RiskEnvelope::belief_space_constraints() const {
  const std::size_t M = size();
  std::vector<LinearConstraint> out;
  switch (kind_) {
    case EnvelopeKind::Expectation:
      for (std::size_t i = 0; i < M; ++i) {
        if (prior_[i] <= 0.0) continue;
        LinearConstraint c{std::vector<double>(M, 0.0), prior_[i]};
        c.coeffs[i] = 1.0;
        out.push_back(c);
      }
      break;
    case EnvelopeKind::WorstCase:
      break;
    case EnvelopeKind::CVaR:
      for (std::size_t i = 0; i < M; ++i) {
        if (prior_[i] <= 0.0) continue;
        LinearConstraint c{std::vector<double>(M, 0.0), prior_[i] / alpha_};
        c.coeffs[i] = 1.0;
        out.push_back(c);
      }
      break;
    case EnvelopeKind::GeneralPolytope:
      for (const auto& src : constraints_) {
        LinearConstraint c{std::vector<double>(M, 0.0), src.bound};
        for (std::size_t i = 0; i < M; ++i) {
          if (prior_[i] > 0.0) {
            c.coeffs[i] = src.coeffs[i] / prior_[i];
          } else if (src.coeffs[i] != 0.0) {
            throw InvalidArgument("belief-space form undefined for constraints on zero-prior models");
          }
        }
        out.push_back(c);
      }
      break;
  }
  return out;
}

std::vector<std::vector<double>> RiskEnvelope::belief_vertices() const {
  const std::size_t M = size();
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < M; ++i) {
    if (prior_[i] > 0.0) support.push_back(i);
  }
  const std::size_t d = support.size();

  // Inequalities over the support coordinates: -b_j <= 0 and the envelope rows.
  std::vector<LinearConstraint> ineq;
  for (std::size_t j = 0; j < d; ++j) {
    LinearConstraint c{std::vector<double>(d, 0.0), 0.0};
    c.coeffs[j] = -1.0;
    ineq.push_back(c);
  }
  for (const auto& c : belief_space_constraints()) {
    LinearConstraint r{std::vector<double>(d), c.bound};
    for (std::size_t j = 0; j < d; ++j) r.coeffs[j] = c.coeffs[support[j]];
    ineq.push_back(r);
  }

  std::vector<std::vector<double>> vertices;
  auto feasible = [&](const std::vector<double>& b) {
    for (const auto& c : ineq) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < d; ++j) lhs += c.coeffs[j] * b[j];
      if (lhs > c.bound + 1e-9) return false;
    }
    return true;
  };
  auto record = [&](const std::vector<double>& b) {
    std::vector<double> full(M, 0.0);
    for (std::size_t j = 0; j < d; ++j) full[support[j]] = std::max(0.0, b[j]);
    for (const auto& v : vertices) {
      double diff = 0.0;
      for (std::size_t i = 0; i < M; ++i) diff = std::max(diff, std::abs(v[i] - full[i]));
      if (diff < 1e-9) return;
    }
    vertices.push_back(std::move(full));
  };

  std::vector<std::size_t> chosen;
  std::function<void(std::size_t)> recurse = [&](std::size_t start) {
    if (chosen.size() == d - 1) {
      std::vector<std::vector<double>> a;
      std::vector<double> rhs;
      a.emplace_back(d, 1.0);
      rhs.push_back(1.0);
      for (std::size_t k : chosen) {
        a.push_back(ineq[k].coeffs);
        rhs.push_back(ineq[k].bound);
      }
      std::vector<double> b;
      if (solve_dense(a, rhs, b) && feasible(b)) record(b);
      return;
    }
    for (std::size_t k = start; k < ineq.size(); ++k) {
      chosen.push_back(k);
      recurse(k + 1);
      chosen.pop_back();
    }
  };
  recurse(0);
  if (vertices.empty()) throw InfeasibleProblem("risk envelope has no vertices");
  return vertices;
}

bool RiskEnvelope::contains(std::span<const double> zeta, double tol) const {
  if (zeta.size() != size()) return false;
  double mass = 0.0;
  for (std::size_t i = 0; i < zeta.size(); ++i) {
    if (zeta[i] < -tol) return false;
    mass += prior_[i] * zeta[i];
  }
  if (std::abs(mass - 1.0) > tol) return false;
  switch (kind_) {
    case EnvelopeKind::Expectation:
      for (std::size_t i = 0; i < zeta.size(); ++i) {
        if (prior_[i] > 0.0 && std::abs(zeta[i] - 1.0) > tol) return false;
      }
      return true;
    case EnvelopeKind::WorstCase:
      return true;
    case EnvelopeKind::CVaR:
      for (std::size_t i = 0; i < zeta.size(); ++i) {
        if (prior_[i] > 0.0 && zeta[i] > 1.0 / alpha_ + tol) return false;
      }
      return true;
    case EnvelopeKind::GeneralPolytope:
      for (const auto& c : constraints_) {
        double lhs = 0.0;
        for (std::size_t i = 0; i < zeta.size(); ++i) lhs += c.coeffs[i] * zeta[i];
        if (lhs > c.bound + tol) return false;
      }
      return true;
  }
  return false;
}

AdversarialResponse adversary_best_response(const RiskEnvelope& envelope, std::span<const double> values) {
  check_values(envelope, values);
  const Belief& prior = envelope.base_belief();
  const std::size_t M = prior.size();

  if (envelope.kind() == EnvelopeKind::GeneralPolytope) return adversary_best_response_lp(envelope, values);

  if (envelope.kind() == EnvelopeKind::Expectation ||
      (envelope.kind() == EnvelopeKind::CVaR && envelope.alpha() >= 1.0)) {
    return make_response(prior, prior.weights(), values);
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < M; ++i) {
    if (prior[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> b(M, 0.0);
  if (envelope.kind() == EnvelopeKind::WorstCase) {
    b[order.front()] = 1.0;
    return make_response(prior, std::move(b), values);
  }

  const double inv_alpha = 1.0 / envelope.alpha();
  double remaining = 1.0;
  for (std::size_t idx = 0; idx < order.size() && remaining > 0.0; ++idx) {
    const std::size_t i = order[idx];
    const double take = std::min(prior[i] * inv_alpha, remaining);
    b[i] = take;
    remaining -= take;
  }
  return make_response(prior, std::move(b), values);
}

AdversarialResponse adversary_best_response_lp(const RiskEnvelope& envelope, std::span<const double> values) {
  check_values(envelope, values);
  const Belief& prior = envelope.base_belief();
  const std::size_t M = prior.size();

  LinearProgram lp;
  lp.objective.resize(M);
  std::vector<double> density(M);
  for (std::size_t i = 0; i < M; ++i) {
    lp.objective[i] = prior[i] * values[i];
    density[i] = prior[i];
  }
  lp.add_row(density, Relation::Equal, 1.0);
  switch (envelope.kind()) {
    case EnvelopeKind::Expectation:
      for (std::size_t i = 0; i < M; ++i) {
        std::vector<double> row(M, 0.0);
        row[i] = 1.0;
        lp.add_row(row, Relation::Equal, 1.0);
      }
      break;
    case EnvelopeKind::WorstCase:
      break;
    case EnvelopeKind::CVaR:
      for (std::size_t i = 0; i < M; ++i) {
        std::vector<double> row(M, 0.0);
        row[i] = 1.0;
        lp.add_row(row, Relation::LessEqual, 1.0 / envelope.alpha());
      }
      break;
    case EnvelopeKind::GeneralPolytope:
      for (const auto& c : envelope.constraints()) lp.add_row(c.coeffs, Relation::LessEqual, c.bound);
      break;
  }
  const auto sol = simplex_solve(lp);

  std::vector<double> b(M, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    b[i] = prior[i] * sol.x[i];
    total += b[i];
  }
  // absorb simplex round-off so the result is an exact distribution
  for (double& v : b) v /= total;
  AdversarialResponse out = make_response(prior, std::move(b), values);
  for (std::size_t i = 0; i < M; ++i) {
    if (prior[i] <= 0.0) out.zeta[i] = sol.x[i];
  }
  return out;
}

double risk_value(const RiskEnvelope& envelope, std::span<const double> values) {
  return adversary_best_response(envelope, values).objective_value;
}

}  // namespace ramcp
