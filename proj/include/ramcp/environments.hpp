#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ramcp/problem.hpp"

namespace ramcp {

/// Two-model, four-action bandit with two pulls per episode.
///
/// State 0 is the decision state; states 1..6 are reward states whose entry
/// reward is -1, -0.5, -0.1, 0, 0.5, 1 respectively. A pull moves to a reward
/// state, any action there returns to state 0 with reward 0, so an episode
/// is pull, return, pull (horizon 3). Prior (0.6, 0.4).
namespace bandit {
inline constexpr std::array<double, 6> kRewards{-1.0, -0.5, -0.1, 0.0, 0.5, 1.0};
inline constexpr int kDecisionState = 0;
inline constexpr int kHorizon = 3;
/// P(reward index | action, model), indexed [model][action][reward index].
extern const double kRewardProbabilities[2][4][6];
/// Reward state entered on reward index j.
inline constexpr State reward_state(std::size_t j) { return static_cast<State>(j) + 1; }
}  // namespace bandit

BamdpProblem build_bandit();

/// Patient treatment: health 0..19 with 0 absorbing (death), start 3, three
/// treatments, each shifting health by -3..3 (clipped).
namespace patient {
inline constexpr int kNumStates = 20;
inline constexpr int kNumActions = 3;
inline constexpr int kNumShifts = 7;  // -3..3
inline constexpr int kNumProfiles = 15;
inline constexpr int kStartState = 3;
inline constexpr int kHorizon = 4;
inline constexpr std::uint64_t kDefaultSeed = 12345;
}  // namespace patient

/// Shift distribution per profile and action: [profile][action][shift + 3].
using PatientProfiles = std::vector<std::array<std::array<double, patient::kNumShifts>, patient::kNumActions>>;

/// Each row is a uniformly chosen identity row (with replacement across
/// actions) plus N(0, 0.1) noise, negatives clamped to 0, renormalized.
PatientProfiles generate_patient_profiles(std::uint64_t seed);

BamdpProblem build_patient(const PatientProfiles& profiles, int horizon = patient::kHorizon);
BamdpProblem build_patient(std::uint64_t seed = patient::kDefaultSeed, int horizon = patient::kHorizon);

/// 0.25 on the first profile, the rest split evenly.
Belief patient_prior();

/// R(s, a, s') = s'/20 - 2 [s' = 0].
double patient_reward(State next);

}  // namespace ramcp
