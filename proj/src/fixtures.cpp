#include "ramcp/fixtures.hpp"

#include <fstream>

#include "ramcp/environments.hpp"
#include "ramcp/errors.hpp"
#include "ramcp/oracle.hpp"
#include "ramcp/problem_io.hpp"

namespace ramcp {

using nlohmann::json;

namespace {

json nash_entry(const NashSolution& nash) {
  json support = json::array();
  for (std::size_t j = 0; j < nash.mixture.size(); ++j) {
    if (nash.mixture[j] <= 1e-12) continue;
    support.push_back({{"weight", nash.mixture[j]}, {"model_values", nash.payoff.values[j]}});
  }
  return {{"value", nash.value}, {"b_adv", nash.b_adv.weights()}, {"support", std::move(support)}};
}

void write(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace

json bandit_oracle_fixture() {
  const BamdpProblem problem = build_bandit();
  const BayesSolution bayes = solve_belief_tree(problem, problem.prior());
  json doc;
  doc["environment"] = "bandit";
  doc["seed"] = nullptr;  // exact computation, no sampling
  doc["prior"] = problem.prior().weights();
  doc["bayes_optimal_value"] = bayes.value;
  doc["bayes_root_q"] = bayes.root_q;
  doc["policy_count"] = enumerate_policies(problem, {.prune_dominated = false}).rows();
  doc["undominated_policy_count"] = enumerate_policies(problem).rows();
  json cvar = json::array();
  for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
    json entry = nash_entry(exact_nash_value(problem, RiskEnvelope::cvar(problem.prior(), alpha)));
    entry["alpha"] = alpha;
    cvar.push_back(std::move(entry));
  }
  doc["cvar"] = std::move(cvar);
  doc["worst_case"] = nash_entry(exact_nash_value(problem, RiskEnvelope::worst_case(problem.prior())));
  doc["tolerances"] = {{"risk_neutral_search", 0.02}, {"risk_sensitive_search", 0.03}, {"recompute", 1e-9}};
  return doc;
}

json patient_profiles_fixture(std::uint64_t seed) {
  const PatientProfiles profiles = generate_patient_profiles(seed);
  json rows = json::array();
  for (const auto& profile : profiles) {
    json p = json::array();
    for (const auto& row : profile) p.push_back(std::vector<double>(row.begin(), row.end()));
    rows.push_back(std::move(p));
  }
  return {{"environment", "patient"},
          {"seed", seed},
          {"shifts", {-3, -2, -1, 0, 1, 2, 3}},
          {"profiles", std::move(rows)},
          {"prior", patient_prior().weights()}};
}

void write_oracle_fixtures(const std::filesystem::path& dir, std::uint64_t patient_seed) {
  std::filesystem::create_directories(dir);
  write(dir / "bandit_oracle.json", bandit_oracle_fixture());
  write(dir / "patient_profiles.json", patient_profiles_fixture(patient_seed));
  write(dir / "patient_problem.json", problem_to_json(build_patient(patient_seed)));
}

}  // namespace ramcp
