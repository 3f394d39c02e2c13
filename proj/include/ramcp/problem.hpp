#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ramcp/rng.hpp"

namespace ramcp {

using State = int;
using Action = int;

/// Probability vector over the M candidate models.
class Belief {
 public:
  Belief() = default;
  /// Throws InvalidArgument unless entries are nonnegative and sum to 1
  /// within 1e-9.
  explicit Belief(std::vector<double> weights);

  static Belief uniform(std::size_t size);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Prior-weighted sum of `values`.
  double expectation(std::span<const double> values) const;

 private:
  std::vector<double> weights_;
};

/// Dynamics of one candidate model: T(s' | s, a) stored densely.
class TransitionModel {
 public:
  TransitionModel() = default;
  /// `probabilities` is indexed [s][a][s'] and flattened row-major. Every
  /// (s, a) slice must be a distribution (nonnegative, sums to 1 within
  /// 1e-12).
  TransitionModel(std::size_t num_states, std::size_t num_actions,
                  std::vector<double> probabilities);

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }

  double probability(State s, Action a, State next) const;
  std::span<const double> row(State s, Action a) const;
  const std::vector<double>& data() const noexcept { return probabilities_; }

 private:
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::vector<double> probabilities_;
};

/// Alternating sequence s0, a0, s1, a1, ..., st. The raw integer sequence is
/// the canonical key of the history.
class History {
 public:
  explicit History(State initial);

  State state() const noexcept { return sequence_.back(); }
  /// Number of actions taken so far.
  int depth() const noexcept { return static_cast<int>(sequence_.size() / 2); }

  State state_at(int step) const { return sequence_.at(2 * static_cast<std::size_t>(step)); }
  Action action_at(int step) const {
    return sequence_.at(2 * static_cast<std::size_t>(step) + 1);
  }

  void push(Action a, State next);
  void pop();
  History extended(Action a, State next) const;

  const std::vector<int>& key() const noexcept { return sequence_; }
  std::string to_string() const;

  friend bool operator==(const History&, const History&) = default;
  friend auto operator<=>(const History&, const History&) = default;

 private:
  std::vector<int> sequence_;
};

/// A realized episode together with its stage rewards.
struct Trajectory {
  History history;
  std::vector<double> rewards;
};

/// Sum of the stage rewards of a trajectory.
double trajectory_reward(const Trajectory& trajectory);

struct Transition {
  State next;
  double reward;
};

/// Nonzero entry of a transition row.
struct Successor {
  State next;
  double probability;
};

/// Inverse-CDF draw from a successor list given u in [0, 1).
State draw_successor(std::span<const Successor> successors, double u);

/// Stochastic history-dependent policy.
class HistoryPolicy {
 public:
  virtual ~HistoryPolicy() = default;
  /// Distribution over actions at `h`. Throws PolicyUndefined when the policy
  /// does not cover `h`.
  virtual std::vector<double> action_probabilities(const History& h) const = 0;
};

/// Discrete MDP family with a finite prior over transition models.
class BamdpProblem {
 public:
  struct Definition {
    std::string name;
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    int horizon = 0;
    std::vector<TransitionModel> models;
    /// R(s, a, s') flattened [s][a][s'].
    std::vector<double> reward;
    Belief prior;
    std::vector<State> terminal_states;
    State initial_state = 0;
  };

  explicit BamdpProblem(Definition definition);

  const std::string& name() const noexcept { return def_.name; }
  std::size_t num_states() const noexcept { return def_.num_states; }
  std::size_t num_actions() const noexcept { return def_.num_actions; }
  std::size_t num_models() const noexcept { return def_.models.size(); }
  int horizon() const noexcept { return def_.horizon; }
  State initial_state() const noexcept { return def_.initial_state; }
  const Belief& prior() const noexcept { return def_.prior; }
  const TransitionModel& model(std::size_t i) const { return def_.models.at(i); }
  const Definition& definition() const noexcept { return def_; }

  double reward(State s, Action a, State next) const {
    return def_.reward[(static_cast<std::size_t>(s) * def_.num_actions +
                        static_cast<std::size_t>(a)) * def_.num_states +
                       static_cast<std::size_t>(next)];
  }
  bool is_terminal(State s) const { return terminal_[static_cast<std::size_t>(s)]; }

  /// Nonzero successors of (s, a) under model i, in increasing state order.
  std::span<const Successor> successors(std::size_t model_index, State s, Action a) const;

  /// H times the spread of stage rewards; used by concentration bounds.
  double value_range() const noexcept { return value_range_; }
  double min_stage_reward() const noexcept { return min_reward_; }
  double max_stage_reward() const noexcept { return max_reward_; }

  /// Draws s' ~ T_i(s, a) and returns it with R(s, a, s').
  Transition sample_transition(std::size_t model_index, State s, Action a, Rng& rng) const;

  void check_state(State s) const;
  void check_action(Action a) const;
  void check_model(std::size_t model_index) const;

 private:
  Definition def_;
  std::vector<bool> terminal_;
  // successor lists, indexed [model][s][a]
  std::vector<std::vector<Successor>> sparse_;
  double min_reward_ = 0.0;
  double max_reward_ = 0.0;
  double value_range_ = 0.0;
};

/// Samples one episode of `policy` on model `model_index`. Stops early at
/// terminal states. Throws PolicyUndefined if the policy does not cover a
/// reached history.
Trajectory rollout_policy(const BamdpProblem& problem, std::size_t model_index,
                          const HistoryPolicy& policy, Rng& rng);

/// Plays the same action at every history.
class ConstantPolicy : public HistoryPolicy {
 public:
  ConstantPolicy(std::size_t num_actions, Action action);
  std::vector<double> action_probabilities(const History& h) const override;

 private:
  std::size_t num_actions_;
  Action action_;
};

/// Uniform distribution over all actions at every history.
class UniformPolicy : public HistoryPolicy {
 public:
  explicit UniformPolicy(std::size_t num_actions) : num_actions_(num_actions) {}
  std::vector<double> action_probabilities(const History& h) const override;

 private:
  std::size_t num_actions_;
};

}  // namespace ramcp
