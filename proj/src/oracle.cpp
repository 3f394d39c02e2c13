#include "ramcp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "ramcp/errors.hpp"
#include "ramcp/simplex.hpp"

namespace ramcp {

std::optional<Action> DeterministicHistoryPolicy::action(const History& h) const {
  if (auto it = actions_.find(h.key()); it != actions_.end()) return it->second;
  return std::nullopt;
}

std::vector<double> DeterministicHistoryPolicy::action_probabilities(const History& h) const {
  const auto a = action(h);
  if (!a) throw PolicyUndefined(h.to_string(), "deterministic policy has no entry");
  if (*a < 0 || static_cast<std::size_t>(*a) >= num_actions_) {
    throw PolicyUndefined(h.to_string(), "deterministic policy action out of range");
  }
  std::vector<double> p(num_actions_, 0.0);
  p[static_cast<std::size_t>(*a)] = 1.0;
  return p;
}

namespace {

bool is_leaf(const BamdpProblem& problem, State s, int depth) {
  return depth >= problem.horizon() || problem.is_terminal(s);
}

class NodeBudget {
 public:
  NodeBudget(std::size_t limit, const char* what) : limit_(limit), what_(what) {}
  void visit() {
    if (++count_ > limit_) throw TooLarge(what_, static_cast<double>(count_));
  }

 private:
  std::size_t limit_;
  std::size_t count_ = 0;
  const char* what_;
};

// Successor states of (s, a) reachable under at least one model, ascending.
std::vector<State> reachable_successors(const BamdpProblem& problem, State s, Action a) {
  std::vector<State> out;
  for (std::size_t i = 0; i < problem.num_models(); ++i) {
    for (const auto& succ : problem.successors(i, s, a)) out.push_back(succ.next);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double policy_value(const BamdpProblem& problem, const HistoryPolicy& policy, std::size_t model, History& h,
                    NodeBudget& budget) {
  budget.visit();
  const State s = h.state();
  if (is_leaf(problem, s, h.depth())) return 0.0;
  const auto probs = policy.action_probabilities(h);
  if (probs.size() != problem.num_actions()) {
    throw PolicyUndefined(h.to_string(), "policy returned a distribution of the wrong size");
  }
  double value = 0.0;
  for (std::size_t ai = 0; ai < probs.size(); ++ai) {
    if (probs[ai] <= 0.0) continue;
    const auto a = static_cast<Action>(ai);
    for (const auto& succ : problem.successors(model, s, a)) {
      h.push(a, succ.next);
      const double below = policy_value(problem, policy, model, h, budget);
      h.pop();
      value += probs[ai] * succ.probability * (problem.reward(s, a, succ.next) + below);
    }
  }
  return value;
}

struct BeliefTreeSolver {
  const BamdpProblem& problem;
  std::optional<double> gamma;
  NodeBudget budget;

  double stage(double accumulated, double reward) const {
    if (!gamma) return reward;
    return std::exp(-*gamma * accumulated) - std::exp(-*gamma * (accumulated + reward));
  }

  // `mass` holds b(i) * P_i(history); the returned value is scaled the same way.
  double action_value(State s, int depth, const std::vector<double>& mass, double accumulated, Action a) {
    double q = 0.0;
    std::vector<double> child(mass.size());
    for (State next : reachable_successors(problem, s, a)) {
      double total = 0.0;
      for (std::size_t i = 0; i < mass.size(); ++i) {
        child[i] = mass[i] * problem.model(i).probability(s, a, next);
        total += child[i];
      }
      if (total <= 0.0) continue;
      const double r = problem.reward(s, a, next);
      q += total * stage(accumulated, r) + solve(next, depth + 1, child, accumulated + r);
    }
    return q;
  }

  double solve(State s, int depth, const std::vector<double>& mass, double accumulated) {
    budget.visit();
    if (is_leaf(problem, s, depth)) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < problem.num_actions(); ++a) {
      best = std::max(best, action_value(s, depth, mass, accumulated, static_cast<Action>(a)));
    }
    return best;
  }
};

// Policy subtree below a (state, depth) node: root action plus one subtree
// per reachable successor.
struct Choice {
  Action action = 0;
  std::vector<std::pair<State, std::shared_ptr<const Choice>>> children;
};

struct Candidate {
  std::vector<double> payoff;  // per model
  std::shared_ptr<const Choice> choice;
};

constexpr double kPayoffTol = 1e-12;

bool same_payoff(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > kPayoffTol) return false;
  }
  return true;
}

// a <= b everywhere and a < b somewhere.
bool dominated_by(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i] + kPayoffTol) return false;
    if (a[i] < b[i] - kPayoffTol) strict = true;
  }
  return strict;
}

void reduce(std::vector<Candidate>& set, bool prune) {
  std::sort(set.begin(), set.end(), [](const Candidate& x, const Candidate& y) { return x.payoff < y.payoff; });
  std::vector<Candidate> unique;
  for (auto& c : set) {
    bool duplicate = false;
    for (const auto& u : unique) {
      if (same_payoff(u.payoff, c.payoff)) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) unique.push_back(std::move(c));
  }
  if (prune) {
    std::vector<Candidate> kept;
    for (std::size_t i = 0; i < unique.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < unique.size() && !dominated; ++j) {
        dominated = j != i && dominated_by(unique[i].payoff, unique[j].payoff);
      }
      if (!dominated) kept.push_back(unique[i]);
    }
    unique = std::move(kept);
  }
  set = std::move(unique);
}

struct PolicyEnumerator {
  const BamdpProblem& problem;
  const EnumerationOptions& options;
  NodeBudget budget;
  std::map<std::pair<int, State>, std::vector<Candidate>> memo;

  const std::vector<Candidate>& candidates(State s, int depth) {
    const auto key = std::make_pair(depth, s);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    budget.visit();
    const std::size_t m = problem.num_models();
    std::vector<Candidate> out;
    if (is_leaf(problem, s, depth)) {
      out.push_back({std::vector<double>(m, 0.0), nullptr});
      return memo.emplace(key, std::move(out)).first->second;
    }
    for (std::size_t ai = 0; ai < problem.num_actions(); ++ai) {
      const auto a = static_cast<Action>(ai);
      const auto nexts = reachable_successors(problem, s, a);
      std::vector<const std::vector<Candidate>*> lists;
      double combos = 1.0;
      for (State next : nexts) {
        lists.push_back(&candidates(next, depth + 1));
        combos *= static_cast<double>(lists.back()->size());
      }
      if (combos + static_cast<double>(out.size()) > static_cast<double>(options.policy_limit)) {
        throw TooLarge("policy enumeration exceeds the policy limit", combos + static_cast<double>(out.size()));
      }
      // Mixed-radix walk over one candidate per successor.
      std::vector<std::size_t> pick(nexts.size(), 0);
      while (true) {
        Candidate c{std::vector<double>(m, 0.0), nullptr};
        auto choice = std::make_shared<Choice>();
        choice->action = a;
        for (std::size_t j = 0; j < nexts.size(); ++j) {
          const Candidate& sub = (*lists[j])[pick[j]];
          const double r = problem.reward(s, a, nexts[j]);
          for (std::size_t i = 0; i < m; ++i) {
            c.payoff[i] += problem.model(i).probability(s, a, nexts[j]) * (r + sub.payoff[i]);
          }
          choice->children.emplace_back(nexts[j], sub.choice);
        }
        c.choice = std::move(choice);
        out.push_back(std::move(c));
        std::size_t j = 0;
        while (j < pick.size() && ++pick[j] == lists[j]->size()) pick[j++] = 0;
        if (j == pick.size()) break;
      }
    }
    reduce(out, options.prune_dominated);
    return memo.emplace(key, std::move(out)).first->second;
  }
};

void materialize(const Choice* choice, History& h, DeterministicHistoryPolicy& policy) {
  if (!choice) return;
  policy.set(h, choice->action);
  for (const auto& [next, sub] : choice->children) {
    h.push(choice->action, next);
    materialize(sub.get(), h, policy);
    h.pop();
  }
}

}  // namespace

double exact_policy_value(const BamdpProblem& problem, const HistoryPolicy& policy, std::size_t model_index,
                          std::size_t node_limit) {
  problem.check_model(model_index);
  NodeBudget budget(node_limit, "policy evaluation tree exceeds the node limit");
  History h(problem.initial_state());
  return policy_value(problem, policy, model_index, h, budget);
}

BayesSolution solve_belief_tree(const BamdpProblem& problem, const Belief& belief, std::optional<double> utility_gamma,
                                std::size_t node_limit) {
  if (belief.size() != problem.num_models()) throw InvalidArgument("belief size does not match the model count");
  if (utility_gamma && !(*utility_gamma > 0.0)) throw InvalidArgument("utility gamma must be positive");
  BeliefTreeSolver solver{problem, utility_gamma, NodeBudget(node_limit, "belief tree exceeds the node limit")};
  const State s0 = problem.initial_state();
  BayesSolution out;
  if (is_leaf(problem, s0, 0)) return out;
  const std::vector<double>& mass = belief.weights();
  out.root_q.resize(problem.num_actions());
  out.value = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < problem.num_actions(); ++a) {
    out.root_q[a] = solver.action_value(s0, 0, mass, 0.0, static_cast<Action>(a));
    out.value = std::max(out.value, out.root_q[a]);
  }
  return out;
}

double bayes_optimal_value(const BamdpProblem& problem, const Belief& belief, std::size_t node_limit) {
  return solve_belief_tree(problem, belief, std::nullopt, node_limit).value;
}

PayoffMatrix enumerate_policies(const BamdpProblem& problem, const EnumerationOptions& options) {
  PolicyEnumerator e{problem, options, NodeBudget(options.node_limit, "policy enumeration exceeds the node limit"), {}};
  const auto& roots = e.candidates(problem.initial_state(), 0);
  PayoffMatrix out;
  for (const auto& c : roots) {
    out.values.push_back(c.payoff);
    DeterministicHistoryPolicy policy(problem.num_actions());
    History h(problem.initial_state());
    materialize(c.choice.get(), h, policy);
    out.policies.push_back(std::move(policy));
  }
  return out;
}

NashSolution exact_nash_value(const BamdpProblem& problem, const RiskEnvelope& envelope,
                              const EnumerationOptions& options) {
  if (envelope.size() != problem.num_models()) throw InvalidArgument("envelope size does not match the model count");
  NashSolution out;
  out.payoff = enumerate_policies(problem, options);
  const auto vertices = envelope.belief_vertices();
  const std::size_t p = out.payoff.rows();
  const std::size_t v = vertices.size();

  // g[vi][j]: value of policy j against vertex belief vi.
  std::vector<std::vector<double>> g(v, std::vector<double>(p, 0.0));
  double lowest = 0.0;
  for (std::size_t vi = 0; vi < v; ++vi) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t i = 0; i < problem.num_models(); ++i) g[vi][j] += vertices[vi][i] * out.payoff.values[j][i];
      lowest = std::min(lowest, g[vi][j]);
    }
  }
  // Shift payoffs positive so the free game-value variable can be taken >= 0.
  const double shift = 1.0 - lowest;

  // Agent: max t  s.t.  sum_j g'[vi][j] x_j >= t for all vi,  sum_j x_j = 1.
  LinearProgram agent;
  agent.objective.assign(p + 1, 0.0);
  agent.objective[p] = -1.0;
  for (std::size_t vi = 0; vi < v; ++vi) {
    std::vector<double> row(p + 1, 0.0);
    for (std::size_t j = 0; j < p; ++j) row[j] = g[vi][j] + shift;
    row[p] = -1.0;
    agent.add_row(std::move(row), Relation::GreaterEqual, 0.0);
  }
  {
    std::vector<double> row(p + 1, 1.0);
    row[p] = 0.0;
    agent.add_row(std::move(row), Relation::Equal, 1.0);
  }
  const LpSolution agent_sol = simplex_solve(agent);
  out.value = agent_sol.x[p] - shift;
  out.mixture.assign(agent_sol.x.begin(), agent_sol.x.begin() + static_cast<std::ptrdiff_t>(p));

  // Adversary: min u  s.t.  sum_vi g'[vi][j] y_vi <= u for all j,  sum y = 1.
  LinearProgram adversary;
  adversary.objective.assign(v + 1, 0.0);
  adversary.objective[v] = 1.0;
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> row(v + 1, 0.0);
    for (std::size_t vi = 0; vi < v; ++vi) row[vi] = g[vi][j] + shift;
    row[v] = -1.0;
    adversary.add_row(std::move(row), Relation::LessEqual, 0.0);
  }
  {
    std::vector<double> row(v + 1, 1.0);
    row[v] = 0.0;
    adversary.add_row(std::move(row), Relation::Equal, 1.0);
  }
  const LpSolution adv_sol = simplex_solve(adversary);
  out.adversary_value = adv_sol.x[v] - shift;
  std::vector<double> b(problem.num_models(), 0.0);
  double total = 0.0;
  for (std::size_t vi = 0; vi < v; ++vi) {
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += adv_sol.x[vi] * vertices[vi][i];
  }
  for (double x : b) total += x;
  for (double& x : b) x /= total;
  out.b_adv = Belief(std::move(b));
  return out;
}

}  // namespace ramcp
