#include "ramcp/ramcp.hpp"

#include <cmath>
#include <ostream>

#include "ramcp/errors.hpp"
#include "ramcp/format.hpp"

namespace ramcp {

double game_value(const GameState& state) {
  if (state.k == 0) throw InvalidArgument("game value needs at least one iteration");
  return risk_value(state.envelope, state.v_hat);
}

double prior_expected_value(const GameState& state) {
  return state.envelope.base_belief().expectation(state.v_hat);
}

std::string ConvergenceTrace::csv_header() const {
  std::string h = "k";
  for (const char* group : {"b_adv", "b_avg", "v_hat"}) {
    for (std::size_t i = 0; i < num_models_; ++i) h += "," + std::string(group) + "_" + std::to_string(i);
  }
  h += ",game_value";
  return h;
}

void ConvergenceTrace::write_csv(std::ostream& out) const {
  out << csv_header() << '\n';
  for (const auto& row : rows_) {
    out << row.k;
    for (const auto* group : {&row.b_adv, &row.b_avg, &row.v_hat}) {
      for (double v : *group) out << ',' << format_number(v);
    }
    out << ',' << format_number(row.game_value) << '\n';
  }
}

MixedPolicy::MixedPolicy(std::shared_ptr<const SearchTree> tree, Fallback fallback)
    : tree_(std::move(tree)), fallback_(fallback) {
  if (!tree_) throw InvalidArgument("mixed policy needs a tree");
}

std::vector<double> MixedPolicy::action_probabilities(const History& h) const {
  try {
    return tree_->average_strategy(h);
  } catch (const PolicyUndefined&) {
    if (fallback_ == Fallback::Error) throw;
    ++fallbacks_;
    const std::size_t n = tree_->problem().num_actions();
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
  }
}

std::vector<double> GreedyTreePolicy::action_probabilities(const History& h) const {
  std::vector<double> p(tree_.problem().num_actions(), 0.0);
  const auto id = tree_.find(h);
  Action a = 0;
  if (id && !tree_.node(*id).leaf) a = tree_.greedy_action(*id);
  p[static_cast<std::size_t>(a)] = 1.0;
  return p;
}

SearchResult search(std::shared_ptr<const BamdpProblem> problem, const RiskEnvelope& envelope,
                    const SearchOptions& options, Rng& rng, SearchObserver* observer) {
  if (!problem) throw InvalidArgument("search needs a problem");
  if (options.budget < 1) throw InvalidArgument("search budget must be at least 1 iteration");
  const std::size_t m = problem->num_models();
  if (envelope.size() != m) throw InvalidArgument("risk envelope size does not match the number of models");

  TreeOptions tree_options{options.mode, options.keying, options.utility_gamma};
  auto tree = std::make_shared<SearchTree>(problem, tree_options);
  GameState state{0, std::vector<double>(m, 0.0), envelope.base_belief(), std::vector<double>(m, 0.0), envelope};
  ConvergenceTrace trace(m);

  const double scale = static_cast<double>(m);
  for (std::uint64_t k = 1; k <= options.budget; ++k) {
    state.k = k;
    if (observer) observer->on_iteration_start(k, *tree);
    const double step = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < m; ++i) {
      const double w = scale * state.b_adv[i];
      const double v_br = tree->simulate(i, w, rng);
      state.v_hat[i] += step * (v_br - state.v_hat[i]);
      if (observer) observer->on_simulation(k, i, w, v_br);
    }
    if (options.mode == UpdateMode::Full) tree->compute_q_values();

    AdversarialResponse response = adversary_best_response(envelope, state.v_hat);
    state.b_adv = std::move(response.b_adv);
    for (std::size_t i = 0; i < m; ++i) state.b_avg[i] += step * (state.b_adv[i] - state.b_avg[i]);

    if (ConvergenceTrace::records(k, options.budget)) {
      trace.append({k, state.b_adv.weights(), state.b_avg, state.v_hat, response.objective_value});
    }
    if (observer) observer->on_iteration_end(state, *tree);
  }
  return {std::move(tree), std::move(state), std::move(trace)};
}

Evaluation evaluate_policy(const BamdpProblem& problem, const HistoryPolicy& policy, std::size_t model_index,
                           std::size_t n_rollouts, Rng& rng) {
  if (n_rollouts < 2) throw InvalidArgument("policy evaluation needs at least 2 rollouts");
  problem.check_model(model_index);
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t n = 1; n <= n_rollouts; ++n) {
    const double x = trajectory_reward(rollout_policy(problem, model_index, policy, rng));
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  Evaluation e;
  e.mean = mean;
  e.stddev = std::sqrt(m2 / static_cast<double>(n_rollouts - 1));
  e.ci90 = 1.645 * e.stddev / std::sqrt(static_cast<double>(n_rollouts));
  e.rollouts = n_rollouts;
  return e;
}

double EstimatorCheck::pooled_stderr() const {
  return std::sqrt(weighted_stderr * weighted_stderr + direct_stderr * direct_stderr);
}

namespace {

struct SampleStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  double tree_q = 0.0;
};

SampleStats run_estimator(const std::shared_ptr<const BamdpProblem>& problem, const Belief& sampling,
                          const std::vector<double>& weights, std::size_t n, Action action, Rng& rng) {
  SearchTree tree(problem, {UpdateMode::Incremental, NodeKeying::History, std::nullopt});
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t model = rng.categorical(sampling.weights());
    tree.simulate(model, weights[model], rng);
    const double x = weights[model] * tree.last_samples(0)[static_cast<std::size_t>(action)];
    const double delta = x - mean;
    mean += delta / static_cast<double>(j);
    m2 += delta * (x - mean);
  }
  SampleStats s;
  s.mean = mean;
  s.stderr_ = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  s.tree_q = tree.node(tree.root()).actions[static_cast<std::size_t>(action)].q;
  return s;
}

}  // namespace

EstimatorCheck weighted_value_estimator_check(std::shared_ptr<const BamdpProblem> problem, const Belief& target,
                                              const Belief& proposal, std::size_t n_samples, Action action,
                                              Rng& rng) {
  if (!problem) throw InvalidArgument("estimator check needs a problem");
  const std::size_t m = problem->num_models();
  if (target.size() != m || proposal.size() != m) throw InvalidArgument("belief size does not match the model count");
  if (n_samples < 2) throw InvalidArgument("estimator check needs at least 2 samples");
  problem->check_action(action);
  if (problem->horizon() < 1 || problem->is_terminal(problem->initial_state())) {
    throw InvalidArgument("root must be a decision node");
  }
  std::vector<double> ratio(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (target[i] > 0.0 && !(proposal[i] > 0.0)) {
      throw InvalidArgument("target is not absolutely continuous w.r.t. the proposal at model " + std::to_string(i));
    }
    if (proposal[i] > 0.0) ratio[i] = target[i] / proposal[i];
  }
  Rng weighted_rng = rng.split(1);
  Rng direct_rng = rng.split(2);
  const SampleStats w = run_estimator(problem, proposal, ratio, n_samples, action, weighted_rng);
  const SampleStats d = run_estimator(problem, target, std::vector<double>(m, 1.0), n_samples, action, direct_rng);
  return {w.mean, d.mean, w.stderr_, d.stderr_, w.tree_q, d.tree_q};
}

}  // namespace ramcp
