#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ramcp/problem.hpp"
#include "ramcp/risk_envelope.hpp"

namespace ramcp {

/// Exact solvers for desk-scale problems. Every routine enumerates the
/// history tree and throws TooLarge when a node or policy budget is exceeded.

/// Deterministic map from history key to action. Histories absent from the
/// map are undefined.
class DeterministicHistoryPolicy : public HistoryPolicy {
 public:
  explicit DeterministicHistoryPolicy(std::size_t num_actions = 0) : num_actions_(num_actions) {}

  void set(const History& h, Action a) { actions_[h.key()] = a; }
  std::optional<Action> action(const History& h) const;
  std::size_t size() const noexcept { return actions_.size(); }
  const std::map<std::vector<int>, Action>& entries() const noexcept { return actions_; }
  std::vector<double> action_probabilities(const History& h) const override;

 private:
  std::size_t num_actions_;
  std::map<std::vector<int>, Action> actions_;
};

inline constexpr std::size_t kDefaultNodeLimit = 1'000'000;

/// Expected total reward of a (possibly stochastic) policy on one model, by
/// forward enumeration of the reachable histories.
double exact_policy_value(const BamdpProblem& problem, const HistoryPolicy& policy, std::size_t model_index,
                          std::size_t node_limit = kDefaultNodeLimit);

struct BayesSolution {
  double value = 0.0;
  std::vector<double> root_q;  // per root action
};

/// Bayes-optimal expected total reward under `belief`, by backward induction
/// over the history tree with Bayes posterior updates. With a utility gamma
/// the objective is E[-exp(-gamma J)] + 1 (so a zero return scores 0).
BayesSolution solve_belief_tree(const BamdpProblem& problem, const Belief& belief,
                                std::optional<double> utility_gamma = std::nullopt,
                                std::size_t node_limit = kDefaultNodeLimit);

double bayes_optimal_value(const BamdpProblem& problem, const Belief& belief,
                           std::size_t node_limit = kDefaultNodeLimit);

/// Exact per-model values (columns) of deterministic policies (rows).
struct PayoffMatrix {
  std::vector<std::vector<double>> values;
  std::vector<DeterministicHistoryPolicy> policies;

  std::size_t rows() const noexcept { return values.size(); }
};

struct EnumerationOptions {
  /// Drop policies whose payoff vector is weakly dominated by another one.
  /// Never changes the maximin value under a nonnegative-belief adversary.
  bool prune_dominated = true;
  std::size_t policy_limit = 200'000;
  std::size_t node_limit = kDefaultNodeLimit;
};

/// Deterministic policies on reachable histories, with duplicate payoff
/// vectors merged.
PayoffMatrix enumerate_policies(const BamdpProblem& problem, const EnumerationOptions& options = {});

struct NashSolution {
  double value = 0.0;
  std::vector<double> mixture;  // weights over payoff.policies
  Belief b_adv;                 // adversary equilibrium belief
  double adversary_value = 0.0; // value of the adversary's LP; equals value
  PayoffMatrix payoff;
};

/// max over policy mixtures of min over the envelope of the prior-perturbed
/// expected value. Solved as two linear programs over the enumerated
/// policies and the envelope's belief-space vertices.
NashSolution exact_nash_value(const BamdpProblem& problem, const RiskEnvelope& envelope,
                              const EnumerationOptions& options = {});

}  // namespace ramcp
