#include "ramcp/environments.hpp"

#include <algorithm>
#include <string>

#include "ramcp/errors.hpp"

namespace ramcp {

namespace bandit {
const double kRewardProbabilities[2][4][6] = {
    // model 1
    {{0.0, 0.0, 1.0, 0.0, 0.0, 0.0},
     {0.0, 0.0, 0.0, 0.0, 1.0, 0.0},
     {0.2, 0.0, 0.0, 0.0, 0.0, 0.8},
     {0.8, 0.0, 0.0, 0.0, 0.0, 0.2}},
    // model 2
    {{0.0, 0.0, 0.0, 1.0, 0.0, 0.0},
     {0.0, 1.0, 0.0, 0.0, 0.0, 0.0},
     {0.8, 0.0, 0.0, 0.0, 0.0, 0.2},
     {0.2, 0.0, 0.0, 0.0, 0.0, 0.8}},
};
}  // namespace bandit

BamdpProblem build_bandit() {
  constexpr std::size_t S = 1 + bandit::kRewards.size();
  constexpr std::size_t A = 4;
  BamdpProblem::Definition def;
  def.name = "bandit";
  def.num_states = S;
  def.num_actions = A;
  def.horizon = bandit::kHorizon;
  def.initial_state = bandit::kDecisionState;
  def.prior = Belief({0.6, 0.4});

  def.reward.assign(S * A * S, 0.0);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t j = 0; j < bandit::kRewards.size(); ++j) {
      def.reward[(0 * A + a) * S + static_cast<std::size_t>(bandit::reward_state(j))] = bandit::kRewards[j];
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<double> t(S * A * S, 0.0);
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t j = 0; j < bandit::kRewards.size(); ++j) {
        t[(0 * A + a) * S + static_cast<std::size_t>(bandit::reward_state(j))] = bandit::kRewardProbabilities[i][a][j];
      }
    }
    for (std::size_t s = 1; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) t[(s * A + a) * S + 0] = 1.0;
    }
    def.models.emplace_back(S, A, std::move(t));
  }
  return BamdpProblem(std::move(def));
}

PatientProfiles generate_patient_profiles(std::uint64_t seed) {
  Rng rng(seed);
  PatientProfiles profiles(patient::kNumProfiles);
  for (auto& profile : profiles) {
    for (auto& row : profile) {
      const std::size_t hot = rng.uniform_index(patient::kNumShifts);
      double total = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        const double base = j == hot ? 1.0 : 0.0;
        row[j] = std::max(0.0, base + rng.normal(0.0, 0.1));
        total += row[j];
      }
      // Every entry clamped: keep the identity row.
      if (!(total > 0.0)) {
        row.fill(0.0);
        row[hot] = 1.0;
        total = 1.0;
      }
      for (double& x : row) x /= total;
    }
  }
  return profiles;
}

double patient_reward(State next) {
  return static_cast<double>(next) / 20.0 - (next == 0 ? 2.0 : 0.0);
}

Belief patient_prior() {
  std::vector<double> prior(patient::kNumProfiles, 0.75 / static_cast<double>(patient::kNumProfiles - 1));
  prior[0] = 0.25;
  return Belief(std::move(prior));
}

BamdpProblem build_patient(const PatientProfiles& profiles, int horizon) {
  if (profiles.empty()) throw InvalidArgument("patient environment needs at least one profile");
  constexpr std::size_t S = patient::kNumStates;
  constexpr std::size_t A = patient::kNumActions;
  BamdpProblem::Definition def;
  def.name = "patient";
  def.num_states = S;
  def.num_actions = A;
  def.horizon = horizon;
  def.initial_state = patient::kStartState;
  def.terminal_states = {0};
  if (profiles.size() == static_cast<std::size_t>(patient::kNumProfiles)) {
    def.prior = patient_prior();
  } else {
    def.prior = Belief::uniform(profiles.size());
  }

  def.reward.assign(S * A * S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t n = 0; n < S; ++n) def.reward[(s * A + a) * S + n] = patient_reward(static_cast<State>(n));
    }
  }
  for (const auto& profile : profiles) {
    std::vector<double> t(S * A * S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        if (s == 0) {
          t[(s * A + a) * S + 0] = 1.0;  // absorbing
          continue;
        }
        for (int d = -3; d <= 3; ++d) {
          const int next = std::clamp(static_cast<int>(s) + d, 0, static_cast<int>(S) - 1);
          t[(s * A + a) * S + static_cast<std::size_t>(next)] += profile[a][static_cast<std::size_t>(d + 3)];
        }
        // Clipping merges shift masses; renormalize against rounding drift.
        double total = 0.0;
        for (std::size_t n = 0; n < S; ++n) total += t[(s * A + a) * S + n];
        for (std::size_t n = 0; n < S; ++n) t[(s * A + a) * S + n] /= total;
      }
    }
    def.models.emplace_back(S, A, std::move(t));
  }
  return BamdpProblem(std::move(def));
}

BamdpProblem build_patient(std::uint64_t seed, int horizon) {
  return build_patient(generate_patient_profiles(seed), horizon);
}

}  // namespace ramcp
