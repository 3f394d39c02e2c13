#include <doctest.h>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ramcp/environments.hpp"
#include "support.hpp"

using namespace ramcp;

namespace {

double reward_probability(const BamdpProblem& p, std::size_t model, Action a, double reward) {
  for (std::size_t j = 0; j < bandit::kRewards.size(); ++j) {
    if (bandit::kRewards[j] == reward) return p.model(model).probability(0, a, bandit::reward_state(j));
  }
  return 0.0;
}

double expected_pull(const BamdpProblem& p, std::size_t model, Action a) {
  double e = 0.0;
  for (const auto& s : p.successors(model, 0, a)) e += s.probability * p.reward(0, a, s.next);
  return e;
}

}  // namespace

TEST_CASE("bandit table entries") {
  const BamdpProblem p = build_bandit();
  CHECK(reward_probability(p, 0, 1, 0.5) == 1.0);
  CHECK(reward_probability(p, 1, 3, 1.0) == 0.8);
  CHECK(reward_probability(p, 0, 0, -0.1) == 1.0);
  CHECK(reward_probability(p, 1, 0, 0.0) == 1.0);
  CHECK(p.horizon() == 3);
  CHECK(p.prior().weights() == std::vector<double>{0.6, 0.4});
}

TEST_CASE("bandit reward states return to the decision state") {
  const BamdpProblem p = build_bandit();
  for (std::size_t i = 0; i < 2; ++i) {
    for (State s = 1; s <= 6; ++s) {
      for (Action a = 0; a < 4; ++a) {
        CHECK(p.model(i).probability(s, a, bandit::kDecisionState) == 1.0);
        CHECK(p.reward(s, a, bandit::kDecisionState) == 0.0);
      }
    }
  }
}

TEST_CASE("a1 and a2 reveal the model") {
  const BamdpProblem p = build_bandit();
  for (Action a : {0, 1}) {
    for (const auto& s0 : p.successors(0, 0, a)) {
      for (const auto& s1 : p.successors(1, 0, a)) CHECK(s0.next != s1.next);
    }
  }
}

TEST_CASE("a3 and a4 expected rewards mirror each other") {
  const BamdpProblem p = build_bandit();
  CHECK(expected_pull(p, 0, 2) == doctest::Approx(0.6));
  CHECK(expected_pull(p, 0, 3) == doctest::Approx(-0.6));
  CHECK(expected_pull(p, 1, 2) == doctest::Approx(-0.6));
  CHECK(expected_pull(p, 1, 3) == doctest::Approx(0.6));
}

TEST_CASE("patient rewards") {
  CHECK(patient_reward(19) == doctest::Approx(0.95));
  CHECK(patient_reward(0) == -2.0);
  CHECK(patient_reward(4) == doctest::Approx(0.2));
}

TEST_CASE("patient prior") {
  const Belief prior = patient_prior();
  CHECK(prior.size() == 15);
  CHECK(prior[0] == 0.25);
  CHECK(prior[14] == doctest::Approx(0.75 / 14));
  double total = 0.0;
  for (double x : prior.weights()) total += x;
  CHECK(std::abs(total - 1.0) <= 1e-15);
}

TEST_CASE("patient generator is deterministic per seed") {
  CHECK(generate_patient_profiles(7) == generate_patient_profiles(7));
  CHECK(generate_patient_profiles(7) != generate_patient_profiles(8));
  const BamdpProblem a = build_patient(7), b = build_patient(7);
  for (std::size_t i = 0; i < a.num_models(); ++i) CHECK(a.model(i).data() == b.model(i).data());
}

TEST_CASE("patient profile rows are noisy identity rows") {
  for (std::uint64_t seed : {1ull, 2ull, 12345ull}) {
    for (const auto& profile : generate_patient_profiles(seed)) {
      for (const auto& row : profile) {
        double total = 0.0;
        double nearest = 1.0;  // total variation to the closest identity row
        for (double x : row) {
          CHECK(x >= 0.0);
          total += x;
          nearest = std::min(nearest, 1.0 - x);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(nearest < 1.0);
      }
    }
  }
}

TEST_CASE("patient transitions clip health and absorb at zero") {
  const auto profiles = generate_patient_profiles(patient::kDefaultSeed);
  const BamdpProblem p = build_patient(profiles);
  CHECK(p.is_terminal(0));
  CHECK(p.initial_state() == 3);
  for (std::size_t i = 0; i < p.num_models(); ++i) {
    for (Action a = 0; a < 3; ++a) {
      CHECK(p.model(i).probability(0, a, 0) == 1.0);
      const auto& shift = profiles[i][static_cast<std::size_t>(a)];
      // from health 1, shifts -3..-1 all land at 0
      CHECK(p.model(i).probability(1, a, 0) == doctest::Approx(shift[0] + shift[1] + shift[2]));
      CHECK(p.model(i).probability(1, a, 3) == doctest::Approx(shift[5]));
      // from health 18, shifts +1..+3 stop at 19
      CHECK(p.model(i).probability(18, a, 19) == doctest::Approx(shift[4] + shift[5] + shift[6]));
      CHECK(p.model(i).probability(10, a, 7) == doctest::Approx(shift[0]));
    }
  }
}

TEST_CASE("checked-in patient profiles match the generator") {
  std::ifstream in(testing::kFixtureDir / "patient_profiles.json");
  const auto fx = nlohmann::json::parse(in);
  CHECK(fx["seed"] == patient::kDefaultSeed);
  const auto profiles = generate_patient_profiles(patient::kDefaultSeed);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t j = 0; j < 7; ++j) CHECK(fx["profiles"][i][a][j].get<double>() == profiles[i][a][j]);
    }
  }
}

TEST_CASE("fewer profiles fall back to a uniform prior") {
  auto profiles = generate_patient_profiles(3);
  profiles.resize(4);
  const BamdpProblem p = build_patient(profiles, 2);
  CHECK(p.num_models() == 4);
  CHECK(p.prior()[0] == 0.25);
  CHECK(p.horizon() == 2);
}
