#include "ramcp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ramcp/errors.hpp"

namespace ramcp {

namespace {

constexpr double kRowTolerance = 1e-12;
constexpr double kBeliefTolerance = 1e-9;

}  // namespace

Belief::Belief(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidArgument("belief must have at least one entry");
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidArgument("belief entries must be finite and nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > kBeliefTolerance) {
    std::ostringstream msg;
    msg << "belief sums to " << total << ", expected 1";
    throw InvalidArgument(msg.str());
  }
}

Belief Belief::uniform(std::size_t size) {
  if (size == 0) throw InvalidArgument("belief must have at least one entry");
  return Belief(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

double Belief::expectation(std::span<const double> values) const {
  if (values.size() != weights_.size()) throw InvalidArgument("belief/value size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) total += weights_[i] * values[i];
  return total;
}

TransitionModel::TransitionModel(std::size_t num_states, std::size_t num_actions,
                                 std::vector<double> probabilities)
    : num_states_(num_states), num_actions_(num_actions), probabilities_(std::move(probabilities)) {
  if (num_states_ == 0 || num_actions_ == 0) throw InvalidArgument("empty state or action space");
  if (probabilities_.size() != num_states_ * num_actions_ * num_states_) {
    throw InvalidArgument("transition table has wrong size");
  }
  for (std::size_t s = 0; s < num_states_; ++s) {
    for (std::size_t a = 0; a < num_actions_; ++a) {
      const auto r = row(static_cast<State>(s), static_cast<Action>(a));
      double total = 0.0;
      for (double p : r) {
        if (!std::isfinite(p) || p < 0.0) {
          throw InvalidArgument("negative or non-finite transition probability at s=" +
                                std::to_string(s) + " a=" + std::to_string(a));
        }
        total += p;
      }
      if (std::abs(total - 1.0) > kRowTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "transition row s=" << s << " a=" << a << " sums to " << total;
        throw InvalidArgument(msg.str());
      }
    }
  }
}

double TransitionModel::probability(State s, Action a, State next) const {
  return row(s, a)[static_cast<std::size_t>(next)];
}

std::span<const double> TransitionModel::row(State s, Action a) const {
  const std::size_t offset =
      (static_cast<std::size_t>(s) * num_actions_ + static_cast<std::size_t>(a)) * num_states_;
  return {probabilities_.data() + offset, num_states_};
}

History::History(State initial) : sequence_{initial} {}

void History::push(Action a, State next) {
  sequence_.push_back(a);
  sequence_.push_back(next);
}

void History::pop() {
  if (sequence_.size() < 3) throw InvalidArgument("cannot pop the initial state of a history");
  sequence_.resize(sequence_.size() - 2);
}

History History::extended(Action a, State next) const {
  History copy = *this;
  copy.push(a, next);
  return copy;
}

std::string History::to_string() const {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < sequence_.size(); ++i) {
    if (i) out << (i % 2 ? " a" : " s");
    else out << 's';
    out << sequence_[i];
  }
  out << ')';
  return out.str();
}

double trajectory_reward(const Trajectory& trajectory) {
  return std::accumulate(trajectory.rewards.begin(), trajectory.rewards.end(), 0.0);
}

BamdpProblem::BamdpProblem(Definition definition) : def_(std::move(definition)) {
  const std::size_t S = def_.num_states;
  const std::size_t A = def_.num_actions;
  if (S == 0) throw InvalidArgument("problem needs at least one state");
  if (A == 0) throw InvalidArgument("problem needs at least one action");
  if (def_.horizon < 1) throw InvalidArgument("horizon must be at least 1");
  if (def_.models.empty()) throw InvalidArgument("problem needs at least one model");
  if (def_.prior.size() != def_.models.size()) throw InvalidArgument("prior length differs from model count");
  for (const auto& m : def_.models) {
    if (m.num_states() != S || m.num_actions() != A) throw InvalidArgument("model dimensions differ from problem");
  }
  if (def_.reward.size() != S * A * S) throw InvalidArgument("reward table has wrong size");
  min_reward_ = def_.reward.front();
  max_reward_ = def_.reward.front();
  for (double r : def_.reward) {
    if (!std::isfinite(r)) throw InvalidArgument("reward must be finite");
    min_reward_ = std::min(min_reward_, r);
    max_reward_ = std::max(max_reward_, r);
  }
  value_range_ = def_.horizon * (max_reward_ - min_reward_);
  check_state(def_.initial_state);
  terminal_.assign(S, false);
  for (State t : def_.terminal_states) {
    check_state(t);
    terminal_[static_cast<std::size_t>(t)] = true;
  }

  sparse_.resize(def_.models.size() * S * A);
  for (std::size_t i = 0; i < def_.models.size(); ++i) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        auto& list = sparse_[(i * S + s) * A + a];
        const auto r = def_.models[i].row(static_cast<State>(s), static_cast<Action>(a));
        for (std::size_t next = 0; next < S; ++next) {
          if (r[next] > 0.0) list.push_back({static_cast<State>(next), r[next]});
        }
      }
    }
  }
}

void BamdpProblem::check_state(State s) const {
  if (s < 0 || static_cast<std::size_t>(s) >= def_.num_states) {
    throw InvalidArgument("state index " + std::to_string(s) + " out of range");
  }
}

void BamdpProblem::check_action(Action a) const {
  if (a < 0 || static_cast<std::size_t>(a) >= def_.num_actions) {
    throw InvalidArgument("action index " + std::to_string(a) + " out of range");
  }
}

void BamdpProblem::check_model(std::size_t model_index) const {
  if (model_index >= def_.models.size()) {
    throw InvalidArgument("model index " + std::to_string(model_index) + " out of range");
  }
}

std::span<const Successor> BamdpProblem::successors(std::size_t model_index, State s, Action a) const {
  const std::size_t S = def_.num_states;
  const std::size_t A = def_.num_actions;
  return sparse_[(model_index * S + static_cast<std::size_t>(s)) * A + static_cast<std::size_t>(a)];
}

State draw_successor(std::span<const Successor> successors, double u) {
  double acc = 0.0;
  for (const auto& entry : successors) {
    acc += entry.probability;
    if (u < acc) return entry.next;
  }
  return successors.back().next;
}

Transition BamdpProblem::sample_transition(std::size_t model_index, State s, Action a, Rng& rng) const {
  check_model(model_index);
  check_state(s);
  check_action(a);
  const State next = draw_successor(successors(model_index, s, a), rng.uniform());
  return {next, reward(s, a, next)};
}

Trajectory rollout_policy(const BamdpProblem& problem, std::size_t model_index,
                          const HistoryPolicy& policy, Rng& rng) {
  problem.check_model(model_index);
  Trajectory traj{History(problem.initial_state()), {}};
  traj.rewards.reserve(static_cast<std::size_t>(problem.horizon()));
  while (traj.history.depth() < problem.horizon() && !problem.is_terminal(traj.history.state())) {
    const auto probs = policy.action_probabilities(traj.history);
    if (probs.size() != problem.num_actions()) {
      throw PolicyUndefined(traj.history.to_string(), "policy returned a distribution of the wrong size");
    }
    const auto a = static_cast<Action>(rng.categorical(probs));
    const auto step = problem.sample_transition(model_index, traj.history.state(), a, rng);
    traj.history.push(a, step.next);
    traj.rewards.push_back(step.reward);
  }
  return traj;
}

ConstantPolicy::ConstantPolicy(std::size_t num_actions, Action action)
    : num_actions_(num_actions), action_(action) {
  if (action < 0 || static_cast<std::size_t>(action) >= num_actions) {
    throw InvalidArgument("constant policy action out of range");
  }
}

std::vector<double> ConstantPolicy::action_probabilities(const History&) const {
  std::vector<double> p(num_actions_, 0.0);
  p[static_cast<std::size_t>(action_)] = 1.0;
  return p;
}

std::vector<double> UniformPolicy::action_probabilities(const History&) const {
  return std::vector<double>(num_actions_, 1.0 / static_cast<double>(num_actions_));
}

}  // namespace ramcp
