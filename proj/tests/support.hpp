#pragma once

// Small hand-built problems shared by the unit tests.

#include <cmath>
#include <filesystem>
#include <memory>
#include <vector>

#include "ramcp/problem.hpp"

namespace ramcp::testing {

inline const std::filesystem::path kFixtureDir = RAMCP_FIXTURE_DIR;

/// Dense [s][a][s'] table with a single nonzero successor per (s, a).
inline std::vector<double> deterministic_table(std::size_t S, std::size_t A,
                                               const std::vector<std::vector<State>>& next) {
  std::vector<double> t(S * A * S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) t[(s * A + a) * S + static_cast<std::size_t>(next[s][a])] = 1.0;
  }
  return t;
}

/// One state, one action, reward r per step, horizon H, M identical models.
inline std::shared_ptr<const BamdpProblem> constant_problem(double r, int horizon, std::size_t models = 1) {
  BamdpProblem::Definition def;
  def.num_states = 1;
  def.num_actions = 1;
  def.horizon = horizon;
  def.reward = {r};
  for (std::size_t i = 0; i < models; ++i) def.models.emplace_back(1, 1, std::vector<double>{1.0});
  def.prior = Belief::uniform(models);
  return std::make_shared<const BamdpProblem>(std::move(def));
}

/// Root state 0 with one action; model i moves deterministically to state
/// i + 1, entering it with reward rewards[i]. Horizon 1.
inline std::shared_ptr<const BamdpProblem> fork_problem(const std::vector<double>& rewards) {
  const std::size_t M = rewards.size();
  const std::size_t S = M + 1;
  BamdpProblem::Definition def;
  def.num_states = S;
  def.num_actions = 1;
  def.horizon = 1;
  def.reward.assign(S * S, 0.0);
  for (std::size_t i = 0; i < M; ++i) def.reward[i + 1] = rewards[i];
  for (std::size_t i = 0; i < M; ++i) {
    std::vector<std::vector<State>> next(S, std::vector<State>{0});
    next[0][0] = static_cast<State>(i + 1);
    def.models.emplace_back(S, 1, deterministic_table(S, 1, next));
  }
  def.prior = Belief::uniform(M);
  return std::make_shared<const BamdpProblem>(std::move(def));
}

/// Sample mean and standard error.
struct SampleStats {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

/// Moves the mass of tied models onto the lowest index of each tie group, so
/// two optimal adversary beliefs that differ only among ties compare equal.
inline std::vector<double> canonical_ties(const std::vector<double>& b, const std::vector<double>& values,
                                          double tol = 1e-12) {
  std::vector<double> out(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::size_t head = i;
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(values[j] - values[i]) <= tol) {
        head = j;
        break;
      }
    }
    out[head] += b[i];
  }
  return out;
}

}  // namespace ramcp::testing
