#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ramcp/problem.hpp"

namespace ramcp {

/// Full: values come from ComputeQValues dynamic programming over empirical
/// transition weights. Incremental: Q and V are running weighted averages
/// updated inside every simulation.
enum class UpdateMode { Full, Incremental };

/// History: one node per distinct history. StateDepth: histories that reach
/// the same state at the same depth share a node (state-dependent planner).
enum class NodeKeying { History, StateDepth };

const char* to_string(UpdateMode mode);
UpdateMode parse_update_mode(const std::string& text);

struct TreeOptions {
  UpdateMode mode = UpdateMode::Full;
  NodeKeying keying = NodeKeying::History;
  /// When set, the tree optimizes E[-exp(-gamma J)] instead of E[J]. The
  /// utility is applied to the trajectory return through telescoping stage
  /// terms U(J_t + r) - U(J_t), so leaf values stay 0. History keying only.
  std::optional<double> exponential_utility;
};

class SearchTree {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kNoNode = static_cast<NodeId>(-1);

  struct Edge {
    State next;
    NodeId child;
    std::uint64_t visits = 0;
    double weight = 0.0;  // W(has')
  };

  struct ActionStats {
    std::uint64_t visits = 0;   // N(h,a)
    double weight = 0.0;        // W(h,a)
    double greedy_weight = 0.0; // W_br(h,a)
    double q = 0.0;             // Q(h,a)
    std::vector<Edge> edges;
  };

  struct Node {
    State state;
    int depth;
    bool leaf;                  // depth >= H or terminal state
    std::uint64_t visits = 0;   // N(h)
    double weight = 0.0;        // W(h)
    double value = 0.0;         // V(h)
    std::vector<ActionStats> actions;
    std::uint64_t pass = 0;     // memo stamp for DAG traversals
  };

  SearchTree(std::shared_ptr<const BamdpProblem> problem, TreeOptions options = {});

  const BamdpProblem& problem() const noexcept { return *problem_; }
  std::shared_ptr<const BamdpProblem> problem_ptr() const noexcept { return problem_; }
  const TreeOptions& options() const noexcept { return options_; }

  NodeId root() const noexcept { return 0; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Node reached by `h`, if the tree contains it.
  std::optional<NodeId> find(const History& h) const;

  /// One weighted simulation pass from the root under model `model_index`.
  /// Every action is expanded at every non-leaf node; returns the return of
  /// the path that follows the greedy action (argmax Q, lowest index on ties).
  double simulate(std::size_t model_index, double weight, Rng& rng);

  /// Same, starting from history `h` (created along with its ancestors if
  /// missing).
  double simulate(const History& h, std::size_t model_index, double weight, Rng& rng);

  /// Recomputes Q and V below the root by dynamic programming over the
  /// empirical transition probabilities W(has') / W(ha); returns V(root).
  double compute_q_values();
  double compute_q_values(const History& h);

  /// Number of expanded actions with W(h,a) = 0 met by the last
  /// compute_q_values call. Their Q is set to 0.
  std::size_t zero_weight_actions() const noexcept { return zero_weight_actions_; }

  /// argmax_a Q(h, a), lowest index on ties.
  Action greedy_action(NodeId id) const;

  /// W_br(h, .) normalized. Throws PolicyUndefined when h is absent or all
  /// W_br are zero.
  std::vector<double> average_strategy(const History& h) const;

  /// Samples from average_strategy(h).
  Action avg_action(const History& h, Rng& rng) const;

  /// Per-action return samples Q_ha formed at `depth` by the most recent
  /// simulate call that passed through that depth (unweighted).
  std::span<const double> last_samples(int depth) const;

  /// Per-node statistics as JSON, for debugging and golden tests.
  nlohmann::json to_json() const;

 private:
  NodeId make_node(State s, int depth);
  NodeId child_for(NodeId parent, Action a, State next);
  NodeId find_or_create(const History& h);
  double simulate_node(NodeId id, std::size_t model_index, double weight, Rng& rng, double accumulated);
  double compute_node(NodeId id, double accumulated);
  double stage_term(double accumulated, double reward) const;

  std::shared_ptr<const BamdpProblem> problem_;
  TreeOptions options_;
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, NodeId> state_depth_index_;
  std::vector<double> scratch_;  // per-depth Q samples, indexed depth * A + a
  std::uint64_t pass_ = 0;
  std::size_t zero_weight_actions_ = 0;
};

}  // namespace ramcp
