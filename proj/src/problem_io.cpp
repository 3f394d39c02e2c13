#include "ramcp/problem_io.hpp"

#include <fstream>
#include <iomanip>

#include "ramcp/errors.hpp"

namespace ramcp {

using nlohmann::json;

namespace {

std::size_t require_count(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("problem document missing '") + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("'") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> flatten_table(const json& table, std::size_t S, std::size_t A, const std::string& what) {
  std::vector<double> out;
  out.reserve(S * A * S);
  if (!table.is_array() || table.size() != S) throw ConfigError(what + ": expected " + std::to_string(S) + " state rows");
  for (std::size_t s = 0; s < S; ++s) {
    const auto& by_action = table[s];
    if (!by_action.is_array() || by_action.size() != A) {
      throw ConfigError(what + ": state " + std::to_string(s) + " needs " + std::to_string(A) + " action rows");
    }
    for (std::size_t a = 0; a < A; ++a) {
      const auto& row = by_action[a];
      if (!row.is_array() || row.size() != S) {
        throw ConfigError(what + ": row (" + std::to_string(s) + ", " + std::to_string(a) + ") needs " +
                          std::to_string(S) + " entries");
      }
      for (const auto& x : row) out.push_back(x.get<double>());
    }
  }
  return out;
}

json nest_table(const std::vector<double>& flat, std::size_t S, std::size_t A) {
  json table = json::array();
  for (std::size_t s = 0; s < S; ++s) {
    json by_action = json::array();
    for (std::size_t a = 0; a < A; ++a) {
      const auto begin = flat.begin() + static_cast<std::ptrdiff_t>((s * A + a) * S);
      by_action.push_back(std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(S)));
    }
    table.push_back(std::move(by_action));
  }
  return table;
}

}  // namespace

json problem_to_json(const BamdpProblem& problem) {
  const auto& def = problem.definition();
  json doc;
  doc["name"] = def.name;
  doc["num_states"] = def.num_states;
  doc["num_actions"] = def.num_actions;
  doc["horizon"] = def.horizon;
  doc["initial_state"] = def.initial_state;
  doc["terminal_states"] = def.terminal_states;
  doc["prior"] = def.prior.weights();
  json models = json::array();
  for (const auto& m : def.models) models.push_back(nest_table(m.data(), def.num_states, def.num_actions));
  doc["models"] = std::move(models);
  doc["reward"] = nest_table(def.reward, def.num_states, def.num_actions);
  return doc;
}

BamdpProblem problem_from_json(const json& doc) {
  try {
    BamdpProblem::Definition def;
    def.name = doc.value("name", std::string("unnamed"));
    def.num_states = require_count(doc, "num_states");
    def.num_actions = require_count(doc, "num_actions");
    def.horizon = static_cast<int>(require_count(doc, "horizon"));
    def.initial_state = doc.value("initial_state", 0);
    def.terminal_states = doc.value("terminal_states", std::vector<State>{});
    if (!doc.contains("prior")) throw ConfigError("problem document missing 'prior'");
    def.prior = Belief(doc.at("prior").get<std::vector<double>>());
    if (!doc.contains("models") || !doc.at("models").is_array()) throw ConfigError("problem document missing 'models'");
    const auto S = def.num_states;
    const auto A = def.num_actions;
    for (std::size_t i = 0; i < doc.at("models").size(); ++i) {
      def.models.emplace_back(S, A, flatten_table(doc.at("models")[i], S, A, "models[" + std::to_string(i) + "]"));
    }
    if (doc.contains("reward")) {
      def.reward = flatten_table(doc.at("reward"), S, A, "reward");
    } else if (doc.contains("reward_by_next_state")) {
      const auto by_next = doc.at("reward_by_next_state").get<std::vector<double>>();
      if (by_next.size() != S) throw ConfigError("reward_by_next_state needs one entry per state");
      def.reward.resize(S * A * S);
      for (std::size_t k = 0; k < def.reward.size(); ++k) def.reward[k] = by_next[k % S];
    } else {
      throw ConfigError("problem document needs 'reward' or 'reward_by_next_state'");
    }
    return BamdpProblem(std::move(def));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed problem document: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid problem: ") + e.what());
  }
}

BamdpProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return problem_from_json(doc);
}

void save_problem(const BamdpProblem& problem, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setw(1) << problem_to_json(problem) << '\n';
}

}  // namespace ramcp
