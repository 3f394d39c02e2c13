#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

namespace ramcp {

/// Exact bandit constants: Bayes-optimal value and root Q values, plus the
/// equilibrium value, adversary belief and policy support for each CVaR
/// alpha and the worst-case envelope.
nlohmann::json bandit_oracle_fixture();

/// Generated patient response profiles and prior for `seed`.
nlohmann::json patient_profiles_fixture(std::uint64_t seed);

/// Writes bandit_oracle.json, patient_profiles.json and patient_problem.json
/// into `dir`.
void write_oracle_fixtures(const std::filesystem::path& dir, std::uint64_t patient_seed);

}  // namespace ramcp
