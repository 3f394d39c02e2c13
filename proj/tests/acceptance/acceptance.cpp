// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
//
//   acceptance            run every criterion
//   acceptance C3 C7      run the named criteria only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ramcp/baselines.hpp"
#include "ramcp/environments.hpp"
#include "ramcp/experiments.hpp"
#include "ramcp/format.hpp"
#include "ramcp/oracle.hpp"
#include "ramcp/ramcp.hpp"
#include "support.hpp"

using namespace ramcp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<Outcome()> run;
};

std::string fmt(double x) { return format_number(std::round(x * 1e6) / 1e6); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const BamdpProblem> bandit() {
  static const auto p = std::make_shared<const BamdpProblem>(build_bandit());
  return p;
}

constexpr std::uint64_t kSeed = 1;
constexpr std::uint64_t kBudget = 10000;

/// Bandit search at the reference budget and seed, memoized by (alpha, mode).
const SearchResult& bandit_run(double alpha, UpdateMode mode) {
  static std::map<std::pair<double, UpdateMode>, SearchResult> cache;
  const auto key = std::make_pair(alpha, mode);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  Rng rng(kSeed);
  auto result = search(bandit(), RiskEnvelope::cvar(bandit()->prior(), alpha), {.mode = mode, .budget = kBudget}, rng);
  return cache.emplace(key, std::move(result)).first->second;
}

double nash_value(double alpha) {
  return exact_nash_value(*bandit(), RiskEnvelope::cvar(bandit()->prior(), alpha)).value;
}

// ------------------------------------------------------------------ criteria

Outcome risk_neutral_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const double oracle = bayes_optimal_value(*bandit(), bandit()->prior());
  const double value = prior_expected_value(bandit_run(1.0, UpdateMode::Full).state);
  const double elapsed = seconds_since(t0);
  const double gap = std::abs(value - oracle);
  return {gap <= 0.02 && elapsed < 10.0, "prior-expected " + fmt(value) + " vs Bayes-optimal " + fmt(oracle) +
                                             ", gap " + fmt(gap) + " <= 0.02, " + fmt(elapsed) + " s"};
}

Outcome risk_sensitive_oracle() {
  bool ok = true;
  std::string detail;
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double oracle = nash_value(alpha);
    const double value = game_value(bandit_run(alpha, UpdateMode::Full).state);
    const double elapsed = seconds_since(t0);
    const double gap = std::abs(value - oracle);
    ok = ok && gap <= 0.03 && elapsed < 30.0;
    detail += "alpha " + fmt(alpha) + ": " + fmt(value) + " vs " + fmt(oracle) + " (gap " + fmt(gap) + ", " +
              fmt(elapsed) + " s); ";
  }
  return {ok, detail + "tolerance 0.03"};
}

Outcome full_incremental_agreement() {
  bool ok = true;
  std::string detail;
  for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
    const double f = prior_expected_value(bandit_run(alpha, UpdateMode::Full).state);
    const double i = prior_expected_value(bandit_run(alpha, UpdateMode::Incremental).state);
    ok = ok && std::abs(f - i) <= 0.05;
    detail += "alpha " + fmt(alpha) + ": F " + fmt(f) + " I " + fmt(i) + "; ";
  }
  return {ok, detail + "tolerance 0.05"};
}

/// Failing (p, q) pairs out of 20 at 5e4 samples each.
std::size_t estimator_failures(std::uint64_t base, std::string& worst) {
  constexpr std::size_t kPairs = 20;
  std::vector<double> z(kPairs);
  parallel_for(kPairs, 0, [&](std::size_t k) {
    Rng draw(mix_seed(base, k));
    const double p = draw.uniform();
    const double q = 0.1 + 0.8 * draw.uniform();
    const auto action = static_cast<Action>(k % 4);
    Rng rng = draw.split(k);
    const auto r = weighted_value_estimator_check(bandit(), Belief({p, 1.0 - p}), Belief({q, 1.0 - q}), 50000,
                                                  action, rng);
    z[k] = std::abs(r.weighted - r.direct) / r.pooled_stderr();
  });
  worst = fmt(*std::max_element(z.begin(), z.end()));
  return static_cast<std::size_t>(std::count_if(z.begin(), z.end(), [](double x) { return x > 3.0; }));
}

Outcome weighted_estimator() {
  std::string worst;
  const std::size_t first = estimator_failures(0xe571, worst);
  std::string detail = "20 pairs at n=50000: " + std::to_string(first) + " beyond 3 sigma (max z " + worst + ")";
  if (first <= 1) return {true, detail};
  const std::size_t second = estimator_failures(0xe572, worst);
  detail += "; retry: " + std::to_string(second) + " beyond 3 sigma (max z " + worst + ")";
  return {second <= 1, detail};
}

Outcome cvar_closed_form() {
  Rng rng(0xc0a5);
  double objective_gap = 0.0;
  double belief_gap = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t M = 1 + rng.uniform_index(10);
    std::vector<double> w(M), v(M);
    double total = 0.0;
    for (double& x : w) total += (x = rng.uniform() + 1e-3);
    for (double& x : w) x /= total;
    for (double& x : v) x = rng.normal(0.0, 2.0);
    const auto env = RiskEnvelope::cvar(Belief(w), 0.01 + 0.99 * rng.uniform());
    const auto closed = adversary_best_response(env, v);
    const auto lp = adversary_best_response_lp(env, v);
    objective_gap = std::max(objective_gap, std::abs(closed.objective_value - lp.objective_value));
    const auto a = testing::canonical_ties(closed.b_adv.weights(), v);
    const auto b = testing::canonical_ties(lp.b_adv.weights(), v);
    for (std::size_t i = 0; i < M; ++i) belief_gap = std::max(belief_gap, std::abs(a[i] - b[i]));
  }
  std::ostringstream d;
  d << "1000 instances: max objective gap " << objective_gap << " <= 1e-9, max belief gap " << belief_gap
    << " <= 1e-7";
  return {objective_gap <= 1e-9 && belief_gap <= 1e-7, d.str()};
}

/// Exact value of the greedy policy played at each iteration, per model.
class GreedyValueLog : public SearchObserver {
 public:
  explicit GreedyValueLog(const BamdpProblem& p) : problem_(p), sums_(p.num_models(), 0.0) {}
  void on_iteration_start(std::uint64_t, const SearchTree& tree) override {
    const GreedyTreePolicy greedy(tree);
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += exact_policy_value(problem_, greedy, i);
    ++count_;
  }
  double mean(std::size_t i) const { return sums_[i] / static_cast<double>(count_); }

 private:
  const BamdpProblem& problem_;
  std::vector<double> sums_;
  std::size_t count_ = 0;
};

Outcome hoeffding_envelope() {
  constexpr std::uint64_t k = 4000;
  constexpr double delta = 0.01;
  constexpr std::size_t kReplicates = 20;
  const double bound = bandit()->value_range() * std::sqrt(std::log(2.0 / delta) / (2.0 * k));
  std::vector<double> gaps(kReplicates);
  parallel_for(kReplicates, 0, [&](std::size_t r) {
    GreedyValueLog log(*bandit());
    Rng rng(r + 1);
    const auto result = search(bandit(), RiskEnvelope::cvar(bandit()->prior(), 0.5), {.budget = k}, rng, &log);
    double gap = 0.0;
    for (std::size_t i = 0; i < bandit()->num_models(); ++i) {
      gap = std::max(gap, std::abs(result.state.v_hat[i] - log.mean(i)));
    }
    gaps[r] = gap;
  });
  const double worst = *std::max_element(gaps.begin(), gaps.end());
  return {worst < bound, "max over 20 replicates and both models " + fmt(worst) + " < bound " + fmt(bound) +
                             " (k=4000, delta=0.01)"};
}

Outcome empirical_transitions() {
  const SearchResult& run = bandit_run(0.25, UpdateMode::Full);
  const SearchTree& tree = *run.tree;
  const BamdpProblem& p = *bandit();
  const double scale = static_cast<double>(p.num_models() * run.state.k);
  double worst = 0.0;
  for (std::size_t a = 0; a < p.num_actions(); ++a) {
    const auto& rec = tree.node(tree.root()).actions[a];
    double tv = 0.0;
    for (State s = 0; s < static_cast<State>(p.num_states()); ++s) {
      double observed = 0.0;
      for (const auto& e : rec.edges) {
        if (e.next == s) observed = e.weight / scale;
      }
      double expected = 0.0;
      for (std::size_t i = 0; i < p.num_models(); ++i) {
        expected += p.model(i).probability(p.initial_state(), static_cast<Action>(a), s) * run.state.b_avg[i];
      }
      tv += 0.5 * std::abs(observed - expected);
    }
    worst = std::max(worst, tv);
  }
  return {worst <= 0.02, "alpha 0.25, k=10000: max total variation over root actions " + fmt(worst) + " <= 0.02"};
}

Outcome risk_ordering() {
  const std::vector<double> alphas{0.25, 0.5, 0.75, 1.0};
  double game_violation = 0.0;
  double worst_violation = 0.0;
  std::string detail;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    const GameState& s = bandit_run(alphas[j], UpdateMode::Full).state;
    const double g = game_value(s);
    const double w = *std::min_element(s.v_hat.begin(), s.v_hat.end());
    detail += "alpha " + fmt(alphas[j]) + ": game " + fmt(g) + " worst-model " + fmt(w) + "; ";
    if (j == 0) continue;
    const GameState& prev = bandit_run(alphas[j - 1], UpdateMode::Full).state;
    game_violation = std::max(game_violation, game_value(prev) - g);
    worst_violation = std::max(worst_violation, w - *std::min_element(prev.v_hat.begin(), prev.v_hat.end()));
  }
  return {game_violation <= 0.02 && worst_violation <= 0.02,
          detail + "largest violations " + fmt(std::max(0.0, game_violation)) + " / " +
              fmt(std::max(0.0, worst_violation)) + " <= 0.02"};
}

Outcome summarize(const std::vector<CheckResult>& checks, double elapsed) {
  bool ok = !checks.empty();
  std::string detail;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    detail += std::string(c.passed ? "[ok] " : "[fail] ") + c.name + ": " + c.detail + "; ";
  }
  return {ok, detail + fmt(elapsed) + " s"};
}

Outcome robustness_curves() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig c = default_config("robustness");  // alphas 0.25 and 1, seeds 1..50, F and I
  c.include_rmcp = false;
  return summarize(check_robustness(run_robustness(c)), seconds_since(t0));
}

Outcome patient_curves() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig c = default_config("patient");  // seed 12345, 12500 iterations, H=4, 50 replicates
  const auto checks = check_patient(run_patient(c));
  const double elapsed = seconds_since(t0);
  Outcome out = summarize(checks, elapsed);
  out.passed = out.passed && elapsed < 600.0;
  return out;
}

Outcome state_dependent_baseline() {
  constexpr std::size_t kReplicates = 20;
  std::vector<double> history(kReplicates), merged(kReplicates);
  const auto env = RiskEnvelope::cvar(bandit()->prior(), 1.0);
  parallel_for(kReplicates, 0, [&](std::size_t r) {
    Rng a(r + 1), b(r + 1);
    history[r] = prior_expected_value(search(bandit(), env, {.budget = kBudget}, a).state);
    merged[r] = prior_expected_value(rmcp_search(bandit(), env, UpdateMode::Full, kBudget, b).state);
  });
  const auto h = testing::sample_stats(history);
  const auto m = testing::sample_stats(merged);
  const double margin = 3.0 * std::hypot(h.stderr_, m.stderr_);
  return {h.mean - m.mean > margin, "history-keyed " + fmt(h.mean) + " vs state-keyed " + fmt(m.mean) +
                                        " over 20 replicates, difference " + fmt(h.mean - m.mean) +
                                        " vs 3-sigma margin " + fmt(margin)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "ramcp_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::string> diffs;
  std::size_t files = 0;
  const auto compare = [&](const std::string& name, const std::function<void(const fs::path&, std::size_t)>& write) {
    write(root / (name + "_a"), 1);
    write(root / (name + "_b"), 3);
    for (const auto& f : diff_directories(root / (name + "_a"), root / (name + "_b"))) diffs.push_back(name + "/" + f);
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(root / (name + "_a"))) ++files;
  };
  compare("converge", [](const fs::path& dir, std::size_t threads) {
    RunConfig c = default_config("converge");
    c.budget = 3000;
    c.seeds = {1, 2};
    c.dump_trees = true;
    c.threads = threads;
    write_convergence(run_convergence(c), dir);
  });
  compare("robustness", [](const fs::path& dir, std::size_t threads) {
    RunConfig c = default_config("robustness");
    c.budget = 1000;
    c.seeds = {1, 2, 3};
    c.rollouts = 200;
    c.utility_gammas = {1.0};
    c.threads = threads;
    write_robustness(run_robustness(c), "robustness", dir);
  });
  compare("patient", [](const fs::path& dir, std::size_t threads) {
    RunConfig c = default_config("patient");
    c.budget = 300;
    c.seeds = {1, 2};
    c.rollouts = 50;
    c.threads = threads;
    write_robustness(run_patient(c), "patient", dir);
  });
  fs::remove_all(root);
  std::string detail = std::to_string(files) + " files from converge, robustness and patient runs repeated with "
                       "1 and 3 worker threads";
  for (const auto& d : diffs) detail += "; differs: " + d;
  return {diffs.empty() && files > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"C1", "risk-neutral oracle agreement", risk_neutral_oracle},
      {"C2", "risk-sensitive oracle agreement", risk_sensitive_oracle},
      {"C3", "full/incremental agreement", full_incremental_agreement},
      {"C4", "weighted-estimator consistency", weighted_estimator},
      {"C5", "CVaR closed form equals simplex", cvar_closed_form},
      {"C6", "Hoeffding envelope", hoeffding_envelope},
      {"C7", "empirical-transition convergence", empirical_transitions},
      {"C8", "risk ordering", risk_ordering},
      {"C9", "bandit robustness curves", robustness_curves},
      {"C10", "patient robustness curves", patient_curves},
      {"C11", "state-dependent baseline inferiority", state_dependent_baseline},
      {"C12", "determinism", determinism},
  };
  const std::set<std::string> only(argv + 1, argv + argc);
  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.passed ? "PASS " : "FAIL ") << c.id << ' ' << c.title << ": " << o.detail << std::endl;
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
