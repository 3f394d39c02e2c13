#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ramcp/problem.hpp"
#include "ramcp/risk_envelope.hpp"
#include "ramcp/search_tree.hpp"

namespace ramcp {

struct SearchOptions {
  UpdateMode mode = UpdateMode::Full;
  std::uint64_t budget = 10000;  // fictitious-play iterations
  NodeKeying keying = NodeKeying::History;
  /// Exponential utility gamma; see TreeOptions.
  std::optional<double> utility_gamma;
};

/// Fictitious-play iterate.
struct GameState {
  std::uint64_t k = 0;
  std::vector<double> v_hat;  // running mean of greedy returns per model
  Belief b_adv;               // latest adversary best response
  std::vector<double> b_avg;  // mean of b_adv over iterations 1..k
  RiskEnvelope envelope;
};

/// min over the envelope of sum_i b(i) v_hat(i).
double game_value(const GameState& state);

/// Prior-weighted mean of v_hat.
double prior_expected_value(const GameState& state);

struct TraceRow {
  std::uint64_t k = 0;
  std::vector<double> b_adv;
  std::vector<double> b_avg;
  std::vector<double> v_hat;
  double game_value = 0.0;
};

/// Per-iteration record of the search. Iterations 1..1000 are all kept,
/// later ones every 10th, and the final iteration always.
class ConvergenceTrace {
 public:
  explicit ConvergenceTrace(std::size_t num_models = 0) : num_models_(num_models) {}

  static bool records(std::uint64_t k, std::uint64_t budget) noexcept {
    return k <= 1000 || k % 10 == 0 || k == budget;
  }

  void append(TraceRow row) { rows_.push_back(std::move(row)); }
  const std::vector<TraceRow>& rows() const noexcept { return rows_; }
  std::size_t num_models() const noexcept { return num_models_; }

  /// k,b_adv_0..,b_avg_0..,v_hat_0..,game_value
  std::string csv_header() const;
  void write_csv(std::ostream& out) const;

 private:
  std::size_t num_models_;
  std::vector<TraceRow> rows_;
};

/// Averaged agent strategy read from the W_br statistics of a finished tree.
class MixedPolicy : public HistoryPolicy {
 public:
  enum class Fallback { Error, Uniform };

  explicit MixedPolicy(std::shared_ptr<const SearchTree> tree, Fallback fallback = Fallback::Error);

  std::vector<double> action_probabilities(const History& h) const override;

  const SearchTree& tree() const noexcept { return *tree_; }
  /// Histories answered by the uniform fallback so far. Not synchronized.
  std::size_t fallback_count() const noexcept { return fallbacks_; }

 private:
  std::shared_ptr<const SearchTree> tree_;
  Fallback fallback_;
  mutable std::size_t fallbacks_ = 0;
};

/// Greedy policy of the tree in its current state: argmax Q at nodes present
/// in the tree, action 0 elsewhere (a missing node has all-zero Q). Holds a
/// reference, so it tracks later mutation.
class GreedyTreePolicy : public HistoryPolicy {
 public:
  explicit GreedyTreePolicy(const SearchTree& tree) : tree_(tree) {}
  std::vector<double> action_probabilities(const History& h) const override;

 private:
  const SearchTree& tree_;
};

/// Hooks into the search loop, for diagnostics and statistical tests.
class SearchObserver {
 public:
  virtual ~SearchObserver() = default;
  virtual void on_iteration_start(std::uint64_t /*k*/, const SearchTree& /*tree*/) {}
  virtual void on_simulation(std::uint64_t /*k*/, std::size_t /*model*/, double /*weight*/, double /*v_br*/) {}
  virtual void on_iteration_end(const GameState& /*state*/, const SearchTree& /*tree*/) {}
};

struct SearchResult {
  std::shared_ptr<SearchTree> tree;
  GameState state;
  ConvergenceTrace trace;

  MixedPolicy policy(MixedPolicy::Fallback fallback = MixedPolicy::Fallback::Error) const {
    return MixedPolicy(tree, fallback);
  }
};

/// Fictitious play between the tree-search agent and the belief adversary.
/// Each iteration simulates once per model with weight M * b_adv(i), updates
/// the per-model running means, recomputes Q (Full mode) and takes the
/// adversary's best response.
SearchResult search(std::shared_ptr<const BamdpProblem> problem, const RiskEnvelope& envelope,
                    const SearchOptions& options, Rng& rng, SearchObserver* observer = nullptr);

struct Evaluation {
  double mean = 0.0;
  double stddev = 0.0;
  double ci90 = 0.0;  // half-width, 1.645 * stddev / sqrt(n)
  std::size_t rollouts = 0;
};

/// Monte Carlo total reward of `policy` on one model.
Evaluation evaluate_policy(const BamdpProblem& problem, const HistoryPolicy& policy, std::size_t model_index,
                           std::size_t n_rollouts, Rng& rng);

struct EstimatorCheck {
  double weighted = 0.0;         // mean of w * Q_ha, theta ~ proposal
  double direct = 0.0;           // mean of Q_ha, theta ~ target
  double weighted_stderr = 0.0;
  double direct_stderr = 0.0;
  double weighted_tree_q = 0.0;  // Q(root, a) kept by the incremental tree
  double direct_tree_q = 0.0;

  double pooled_stderr() const;
};

/// Compares the importance-weighted incremental Q estimate at (root, action)
/// against the directly sampled one. Runs two incremental-mode trees with
/// n_samples root simulations each: one drawing models from `proposal` with
/// weight target/proposal, one drawing from `target` with weight 1.
EstimatorCheck weighted_value_estimator_check(std::shared_ptr<const BamdpProblem> problem,
                                              const Belief& target, const Belief& proposal,
                                              std::size_t n_samples, Action action, Rng& rng);

}  // namespace ramcp
