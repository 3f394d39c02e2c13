#include "ramcp/search_tree.hpp"

#include <cmath>
#include <string>

#include "ramcp/errors.hpp"

namespace ramcp {

const char* to_string(UpdateMode mode) { return mode == UpdateMode::Full ? "F" : "I"; }

UpdateMode parse_update_mode(const std::string& text) {
  if (text == "F" || text == "f" || text == "full") return UpdateMode::Full;
  if (text == "I" || text == "i" || text == "incremental") return UpdateMode::Incremental;
  throw InvalidArgument("unknown update mode '" + text + "' (expected F or I)");
}

SearchTree::SearchTree(std::shared_ptr<const BamdpProblem> problem, TreeOptions options)
    : problem_(std::move(problem)), options_(options) {
  if (!problem_) throw InvalidArgument("search tree needs a problem");
  if (options_.exponential_utility) {
    if (!(*options_.exponential_utility > 0.0)) throw InvalidArgument("utility gamma must be positive");
    if (options_.keying != NodeKeying::History) {
      throw InvalidArgument("exponential utility needs history-keyed nodes");
    }
  }
  scratch_.assign(static_cast<std::size_t>(problem_->horizon() + 1) * problem_->num_actions(), 0.0);
  make_node(problem_->initial_state(), 0);
}

SearchTree::NodeId SearchTree::make_node(State s, int depth) {
  const auto id = static_cast<NodeId>(nodes_.size());
  Node n{s, depth, depth >= problem_->horizon() || problem_->is_terminal(s), 0, 0.0, 0.0, {}, 0};
  if (!n.leaf) n.actions.resize(problem_->num_actions());
  nodes_.push_back(std::move(n));
  if (options_.keying == NodeKeying::StateDepth) {
    state_depth_index_.emplace(static_cast<std::uint64_t>(depth) * problem_->num_states() +
                                   static_cast<std::uint64_t>(s),
                               id);
  }
  return id;
}

SearchTree::NodeId SearchTree::child_for(NodeId parent, Action a, State next) {
  {
    const auto& edges = nodes_[parent].actions[static_cast<std::size_t>(a)].edges;
    for (const auto& e : edges) {
      if (e.next == next) return e.child;
    }
  }
  const int depth = nodes_[parent].depth + 1;
  NodeId child = kNoNode;
  if (options_.keying == NodeKeying::StateDepth) {
    const auto key = static_cast<std::uint64_t>(depth) * problem_->num_states() + static_cast<std::uint64_t>(next);
    if (auto it = state_depth_index_.find(key); it != state_depth_index_.end()) child = it->second;
  }
  if (child == kNoNode) child = make_node(next, depth);
  nodes_[parent].actions[static_cast<std::size_t>(a)].edges.push_back({next, child});
  return child;
}

std::optional<SearchTree::NodeId> SearchTree::find(const History& h) const {
  if (h.state_at(0) != nodes_.front().state) return std::nullopt;
  if (options_.keying == NodeKeying::StateDepth) {
    const auto key = static_cast<std::uint64_t>(h.depth()) * problem_->num_states() +
                     static_cast<std::uint64_t>(h.state());
    if (auto it = state_depth_index_.find(key); it != state_depth_index_.end()) return it->second;
    return std::nullopt;
  }
  NodeId id = root();
  for (int t = 0; t < h.depth(); ++t) {
    const auto& n = nodes_[id];
    const Action a = h.action_at(t);
    if (n.leaf || a < 0 || static_cast<std::size_t>(a) >= n.actions.size()) return std::nullopt;
    const State next = h.state_at(t + 1);
    NodeId child = kNoNode;
    for (const auto& e : n.actions[static_cast<std::size_t>(a)].edges) {
      if (e.next == next) {
        child = e.child;
        break;
      }
    }
    if (child == kNoNode) return std::nullopt;
    id = child;
  }
  return id;
}

SearchTree::NodeId SearchTree::find_or_create(const History& h) {
  if (h.state_at(0) != nodes_.front().state) {
    throw InvalidArgument("history " + h.to_string() + " does not start at the root state");
  }
  if (h.depth() > problem_->horizon()) throw InvalidArgument("history deeper than the horizon");
  NodeId id = root();
  for (int t = 0; t < h.depth(); ++t) {
    if (nodes_[id].leaf) throw InvalidArgument("history " + h.to_string() + " continues past a leaf");
    problem_->check_action(h.action_at(t));
    problem_->check_state(h.state_at(t + 1));
    id = child_for(id, h.action_at(t), h.state_at(t + 1));
  }
  return id;
}

double SearchTree::stage_term(double accumulated, double reward) const {
  if (!options_.exponential_utility) return reward;
  const double g = *options_.exponential_utility;
  return std::exp(-g * accumulated) - std::exp(-g * (accumulated + reward));
}

double SearchTree::simulate(std::size_t model_index, double weight, Rng& rng) {
  return simulate(History(problem_->initial_state()), model_index, weight, rng);
}

double SearchTree::simulate(const History& h, std::size_t model_index, double weight, Rng& rng) {
  problem_->check_model(model_index);
  if (!std::isfinite(weight) || weight < 0.0) throw InvalidArgument("simulation weight must be finite and >= 0");
  double accumulated = 0.0;
  if (options_.exponential_utility) {
    for (int t = 0; t < h.depth(); ++t) accumulated += problem_->reward(h.state_at(t), h.action_at(t), h.state_at(t + 1));
  }
  return simulate_node(find_or_create(h), model_index, weight, rng, accumulated);
}

double SearchTree::simulate_node(NodeId id, std::size_t model_index, double weight, Rng& rng, double accumulated) {
  {
    Node& n = nodes_[id];
    ++n.visits;
    n.weight += weight;
    if (n.leaf) return 0.0;
  }
  const State s = nodes_[id].state;
  const std::size_t num_actions = problem_->num_actions();
  double* samples = scratch_.data() + static_cast<std::size_t>(nodes_[id].depth) * num_actions;
  const bool incremental = options_.mode == UpdateMode::Incremental;

  for (std::size_t ai = 0; ai < num_actions; ++ai) {
    const auto a = static_cast<Action>(ai);
    {
      ActionStats& rec = nodes_[id].actions[ai];
      ++rec.visits;
      rec.weight += weight;
    }
    const State next = draw_successor(problem_->successors(model_index, s, a), rng.uniform());
    const double r = problem_->reward(s, a, next);
    const NodeId child = child_for(id, a, next);
    for (auto& e : nodes_[id].actions[ai].edges) {
      if (e.next == next) {
        ++e.visits;
        e.weight += weight;
        break;
      }
    }
    const double below = simulate_node(child, model_index, weight, rng, accumulated + r);
    const double sample = stage_term(accumulated, r) + below;
    samples[ai] = sample;
    if (incremental) {
      ActionStats& rec = nodes_[id].actions[ai];
      rec.q += (weight * sample - rec.q) / static_cast<double>(rec.visits);
    }
  }

  const Action best = greedy_action(id);
  Node& n = nodes_[id];
  n.actions[static_cast<std::size_t>(best)].greedy_weight += weight;
  const double v_br = samples[static_cast<std::size_t>(best)];
  if (incremental) n.value += (weight * v_br - n.value) / static_cast<double>(n.visits);
  return v_br;
}

Action SearchTree::greedy_action(NodeId id) const {
  const auto& actions = nodes_.at(id).actions;
  if (actions.empty()) throw InvalidArgument("greedy action requested at a leaf");
  std::size_t best = 0;
  for (std::size_t a = 1; a < actions.size(); ++a) {
    if (actions[a].q > actions[best].q) best = a;
  }
  return static_cast<Action>(best);
}

double SearchTree::compute_q_values() {
  ++pass_;
  zero_weight_actions_ = 0;
  return compute_node(root(), 0.0);
}

double SearchTree::compute_q_values(const History& h) {
  const auto id = find(h);
  if (!id) throw InvalidArgument("history " + h.to_string() + " is not in the tree");
  double accumulated = 0.0;
  if (options_.exponential_utility) {
    for (int t = 0; t < h.depth(); ++t) accumulated += problem_->reward(h.state_at(t), h.action_at(t), h.state_at(t + 1));
  }
  ++pass_;
  zero_weight_actions_ = 0;
  return compute_node(*id, accumulated);
}

double SearchTree::compute_node(NodeId id, double accumulated) {
  Node& n = nodes_[id];
  if (options_.keying == NodeKeying::StateDepth) {
    if (n.pass == pass_) return n.value;
    n.pass = pass_;
  }
  if (n.leaf) {
    n.value = 0.0;
    return 0.0;
  }
  // No nodes are created here, so references into nodes_ stay valid.
  double best = 0.0;
  for (std::size_t ai = 0; ai < n.actions.size(); ++ai) {
    ActionStats& rec = n.actions[ai];
    double total = 0.0;
    for (const auto& e : rec.edges) {
      const double r = problem_->reward(n.state, static_cast<Action>(ai), e.next);
      const double below = compute_node(e.child, accumulated + r);
      total += e.weight * (stage_term(accumulated, r) + below);
    }
    if (rec.weight > 0.0) {
      rec.q = total / rec.weight;
    } else {
      rec.q = 0.0;
      if (rec.visits > 0) ++zero_weight_actions_;
    }
    if (ai == 0 || rec.q > best) best = rec.q;
  }
  n.value = best;
  return best;
}

std::vector<double> SearchTree::average_strategy(const History& h) const {
  const auto id = find(h);
  if (!id) throw PolicyUndefined(h.to_string(), "history not in search tree");
  const Node& n = nodes_[*id];
  if (n.leaf) throw PolicyUndefined(h.to_string(), "no decision at a leaf");
  double total = 0.0;
  for (const auto& rec : n.actions) total += rec.greedy_weight;
  if (!(total > 0.0)) throw PolicyUndefined(h.to_string(), "no greedy weight recorded");
  std::vector<double> p(n.actions.size());
  for (std::size_t a = 0; a < p.size(); ++a) p[a] = n.actions[a].greedy_weight / total;
  return p;
}

Action SearchTree::avg_action(const History& h, Rng& rng) const {
  return static_cast<Action>(rng.categorical(average_strategy(h)));
}

std::span<const double> SearchTree::last_samples(int depth) const {
  if (depth < 0 || depth >= problem_->horizon()) throw InvalidArgument("depth outside the search horizon");
  const std::size_t a = problem_->num_actions();
  return {scratch_.data() + static_cast<std::size_t>(depth) * a, a};
}

nlohmann::json SearchTree::to_json() const {
  using nlohmann::json;
  json out;
  out["mode"] = to_string(options_.mode);
  out["keying"] = options_.keying == NodeKeying::History ? "history" : "state_depth";
  if (options_.exponential_utility) out["utility_gamma"] = *options_.exponential_utility;

  // Reconstruct history keys by walking from the root (first parent wins for
  // shared nodes).
  std::vector<std::vector<int>> keys(nodes_.size());
  std::vector<bool> seen(nodes_.size(), false);
  keys[0] = {nodes_[0].state};
  seen[0] = true;
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const Node& n = nodes_[id];
    for (std::size_t a = 0; a < n.actions.size(); ++a) {
      for (const auto& e : n.actions[a].edges) {
        if (seen[e.child]) continue;
        seen[e.child] = true;
        keys[e.child] = keys[id];
        keys[e.child].push_back(static_cast<int>(a));
        keys[e.child].push_back(e.next);
        stack.push_back(e.child);
      }
    }
  }

  json nodes = json::array();
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    json jn;
    jn["id"] = id;
    jn["history"] = keys[id];
    jn["state"] = n.state;
    jn["depth"] = n.depth;
    jn["N"] = n.visits;
    jn["W"] = n.weight;
    jn["V"] = n.value;
    json actions = json::array();
    for (std::size_t a = 0; a < n.actions.size(); ++a) {
      const auto& rec = n.actions[a];
      json ja{{"action", a}, {"N", rec.visits}, {"W", rec.weight}, {"W_br", rec.greedy_weight}, {"Q", rec.q}};
      json children = json::array();
      for (const auto& e : rec.edges) {
        children.push_back({{"next_state", e.next}, {"node", e.child}, {"N", e.visits}, {"W", e.weight}});
      }
      ja["children"] = std::move(children);
      actions.push_back(std::move(ja));
    }
    jn["actions"] = std::move(actions);
    nodes.push_back(std::move(jn));
  }
  out["nodes"] = std::move(nodes);
  return out;
}

}  // namespace ramcp
