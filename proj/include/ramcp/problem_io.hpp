#pragma once

#include <filesystem>
#include <json.hpp>

#include "ramcp/problem.hpp"

namespace ramcp {

/// Problem document layout (see docs/problem_schema.md):
///
///   { "name": str, "num_states": S, "num_actions": A, "horizon": H,
///     "initial_state": s0, "terminal_states": [..], "prior": [M reals],
///     "models": [ M x S x A x S nested arrays ],
///     "reward": S x A x S nested array  |  "reward_by_next_state": [S reals] }
nlohmann::json problem_to_json(const BamdpProblem& problem);
BamdpProblem problem_from_json(const nlohmann::json& doc);

BamdpProblem load_problem(const std::filesystem::path& path);
void save_problem(const BamdpProblem& problem, const std::filesystem::path& path);

}  // namespace ramcp
