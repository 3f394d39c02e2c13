#pragma once

#include <span>
#include <string>
#include <vector>

#include "ramcp/problem.hpp"

namespace ramcp {

enum class EnvelopeKind { Expectation, WorstCase, CVaR, GeneralPolytope };

/// coeffs . zeta <= bound
struct LinearConstraint {
  std::vector<double> coeffs;
  double bound = 0.0;
};

/// Polytopic risk envelope: a set of density perturbations zeta with
/// zeta >= 0 and sum_i prior(i) zeta(i) = 1, plus kind-specific constraints.
class RiskEnvelope {
 public:
  static RiskEnvelope expectation(Belief prior);
  static RiskEnvelope worst_case(Belief prior);
  /// 0 <= zeta <= 1/alpha, alpha in (0, 1].
  static RiskEnvelope cvar(Belief prior, double alpha);
  /// Additional constraints are given in zeta space.
  static RiskEnvelope polytope(Belief prior, std::vector<LinearConstraint> constraints);

  EnvelopeKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  const Belief& base_belief() const noexcept { return prior_; }
  const std::vector<LinearConstraint>& constraints() const noexcept { return constraints_; }
  std::size_t size() const noexcept { return prior_.size(); }

  std::string describe() const;

  /// Constraints of the envelope rewritten over b = prior * zeta, restricted
  /// to the support of the prior. Does not include b >= 0 or sum b = 1.
  std::vector<LinearConstraint> belief_space_constraints() const;

  /// Vertices of the envelope in belief space (length-M beliefs; zero-prior
  /// entries are 0). Enumerated by brute force over active constraint sets,
  /// so only intended for small M.
  std::vector<std::vector<double>> belief_vertices() const;

  bool contains(std::span<const double> zeta, double tol = 1e-9) const;

 private:
  RiskEnvelope(EnvelopeKind kind, Belief prior, double alpha, std::vector<LinearConstraint> constraints);

  EnvelopeKind kind_;
  Belief prior_;
  double alpha_;
  std::vector<LinearConstraint> constraints_;
};

struct AdversarialResponse {
  Belief b_adv;
  std::vector<double> zeta;
  double objective_value = 0.0;
};

/// Minimizes sum_i values(i) b(i) over b = prior * zeta, zeta in the envelope.
/// CVaR, Expectation and WorstCase use the sorted greedy closed form (ties
/// broken by model index); GeneralPolytope solves a dense LP.
AdversarialResponse adversary_best_response(const RiskEnvelope& envelope, std::span<const double> values);

/// Same problem solved with the simplex backend for every envelope kind.
AdversarialResponse adversary_best_response_lp(const RiskEnvelope& envelope, std::span<const double> values);

/// rho(values) = min over the envelope of the perturbed expectation.
double risk_value(const RiskEnvelope& envelope, std::span<const double> values);

}  // namespace ramcp
