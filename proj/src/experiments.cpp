#include "ramcp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ramcp/baselines.hpp"
#include "ramcp/environments.hpp"
#include "ramcp/errors.hpp"
#include "ramcp/format.hpp"
#include "ramcp/oracle.hpp"
#include "ramcp/problem_io.hpp"

namespace ramcp {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- envelopes

std::vector<RiskEnvelope> EnvelopeSpec::envelopes(const Belief& prior) const {
  switch (metric) {
    case Metric::CVaR: {
      std::vector<RiskEnvelope> out;
      for (double a : alphas) out.push_back(RiskEnvelope::cvar(prior, a));
      return out;
    }
    case Metric::Expectation:
      return {RiskEnvelope::expectation(prior)};
    case Metric::WorstCase:
      return {RiskEnvelope::worst_case(prior)};
    case Metric::Polytope:
      return {RiskEnvelope::polytope(prior, constraints)};
  }
  return {};
}

std::vector<std::string> EnvelopeSpec::labels() const {
  switch (metric) {
    case Metric::CVaR: {
      std::vector<std::string> out;
      for (double a : alphas) out.push_back(format_number(a));
      return out;
    }
    case Metric::Expectation:
      return {"expectation"};
    case Metric::WorstCase:
      return {"worst_case"};
    case Metric::Polytope:
      return {"polytope"};
  }
  return {};
}

namespace {

const char* metric_name(EnvelopeSpec::Metric m) {
  switch (m) {
    case EnvelopeSpec::Metric::CVaR: return "cvar";
    case EnvelopeSpec::Metric::Expectation: return "expectation";
    case EnvelopeSpec::Metric::WorstCase: return "worst_case";
    case EnvelopeSpec::Metric::Polytope: return "polytope";
  }
  return "?";
}

}  // namespace

// ------------------------------------------------------------------- config

json RunConfig::to_json() const {
  json j;
  j["environment"] = environment;
  if (environment == "file") j["problem_file"] = problem_file.generic_string();
  if (environment == "patient") {
    j["patient_seed"] = patient_seed;
    j["patient_horizon"] = patient_horizon;
  }
  json env{{"metric", metric_name(envelope.metric)}};
  if (envelope.metric == EnvelopeSpec::Metric::CVaR) env["alphas"] = envelope.alphas;
  if (envelope.metric == EnvelopeSpec::Metric::Polytope) {
    json cs = json::array();
    for (const auto& c : envelope.constraints) cs.push_back({{"coeffs", c.coeffs}, {"bound", c.bound}});
    env["constraints"] = std::move(cs);
  }
  j["envelope"] = std::move(env);
  json modes_json = json::array();
  for (auto m : modes) modes_json.push_back(to_string(m));
  j["modes"] = std::move(modes_json);
  j["budget"] = budget;
  j["seeds"] = seeds;
  j["rollouts"] = rollouts;
  j["beta_grid"] = beta_grid;
  j["utility_gammas"] = utility_gammas;
  j["include_rmcp"] = include_rmcp;
  j["dump_trees"] = dump_trees;
  j["bootstrap_samples"] = bootstrap_samples;
  // threads and output_dir do not affect results and are not echoed.
  return j;
}

namespace {

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = base + i;
  return out;
}

}  // namespace

RunConfig default_config(const std::string& command) {
  RunConfig c;
  if (command == "converge") {
    c.modes = {UpdateMode::Full, UpdateMode::Incremental};
  } else if (command == "robustness") {
    c.envelope.alphas = {0.25, 1.0};
    c.modes = {UpdateMode::Full, UpdateMode::Incremental};
    c.seeds = seed_range(1, 50);
    c.include_rmcp = true;
  } else if (command == "patient") {
    c.environment = "patient";
    c.envelope.alphas = {0.2, 1.0};
    c.modes = {UpdateMode::Incremental};
    c.budget = 12500;
    c.seeds = seed_range(1, 50);
    c.rollouts = 1000;
    c.utility_gammas = {1.0};
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return c;
}

namespace {

// 1-based line of the first occurrence of "key" in the document, or 0.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const std::size_t line = line_of_key(text_, key);
    std::string where = line ? "config line " + std::to_string(line) + ": " : "config: ";
    throw ConfigError(where + "'" + key + "' " + message);
  }

  double number(const json& v, const std::string& key) const {
    if (!v.is_number()) fail(key, "must be a number");
    return v.get<double>();
  }

  std::uint64_t count(const json& v, const std::string& key) const {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(key, "must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::vector<double> numbers(const json& v, const std::string& key) const {
    if (!v.is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(number(x, key));
    return out;
  }

  std::string string(const json& v, const std::string& key) const {
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

 private:
  const std::string& text_;
};

UpdateMode mode_from(const ConfigReader& r, const json& v) {
  const std::string s = r.string(v, "modes");
  try {
    return parse_update_mode(s);
  } catch (const InvalidArgument&) {
    r.fail("modes", "entries must be \"F\" or \"I\", got \"" + s + "\"");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig c) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ConfigReader r(text);

  std::optional<std::size_t> replicates;
  std::uint64_t base_seed = 1;
  for (const auto& [key, v] : doc.items()) {
    if (key == "schema_version") {
      if (r.count(v, key) != static_cast<std::uint64_t>(kRecordSchemaVersion)) r.fail(key, "is not supported");
    } else if (key == "environment") {
      c.environment = r.string(v, key);
    } else if (key == "problem_file") {
      c.problem_file = r.string(v, key);
      c.environment = "file";
    } else if (key == "patient_seed") {
      c.patient_seed = r.count(v, key);
    } else if (key == "patient_horizon") {
      c.patient_horizon = static_cast<int>(r.count(v, key));
    } else if (key == "envelope") {
      if (!v.is_object()) r.fail(key, "must be an object");
      for (const auto& [ek, ev] : v.items()) {
        if (ek == "metric") {
          const std::string m = r.string(ev, ek);
          if (m == "cvar") c.envelope.metric = EnvelopeSpec::Metric::CVaR;
          else if (m == "expectation") c.envelope.metric = EnvelopeSpec::Metric::Expectation;
          else if (m == "worst_case") c.envelope.metric = EnvelopeSpec::Metric::WorstCase;
          else if (m == "polytope") c.envelope.metric = EnvelopeSpec::Metric::Polytope;
          else r.fail(ek, "must be one of cvar, expectation, worst_case, polytope");
        } else if (ek == "alphas" || ek == "alpha") {
          c.envelope.alphas = ev.is_array() ? r.numbers(ev, ek) : std::vector<double>{r.number(ev, ek)};
          for (double a : c.envelope.alphas) {
            if (!(a > 0.0 && a <= 1.0)) r.fail(ek, "entries must lie in (0, 1]");
          }
        } else if (ek == "constraints") {
          if (!ev.is_array()) r.fail(ek, "must be an array of {coeffs, bound}");
          c.envelope.constraints.clear();
          for (const auto& cj : ev) {
            if (!cj.is_object() || !cj.contains("coeffs") || !cj.contains("bound")) {
              r.fail(ek, "entries need coeffs and bound");
            }
            c.envelope.constraints.push_back({r.numbers(cj["coeffs"], "coeffs"), r.number(cj["bound"], "bound")});
          }
        } else {
          r.fail(ek, "is not a known envelope key");
        }
      }
    } else if (key == "modes" || key == "mode") {
      c.modes.clear();
      if (v.is_array()) {
        for (const auto& m : v) c.modes.push_back(mode_from(r, m));
      } else {
        c.modes.push_back(mode_from(r, v));
      }
    } else if (key == "budget") {
      c.budget = r.count(v, key);
      if (c.budget < 1) r.fail(key, "must be >= 1");
    } else if (key == "seeds") {
      if (!v.is_array()) r.fail(key, "must be an array of integers");
      c.seeds.clear();
      for (const auto& s : v) c.seeds.push_back(r.count(s, key));
    } else if (key == "replicates") {
      replicates = r.count(v, key);
    } else if (key == "base_seed") {
      base_seed = r.count(v, key);
    } else if (key == "rollouts") {
      c.rollouts = r.count(v, key);
      if (c.rollouts < 2) r.fail(key, "must be >= 2");
    } else if (key == "beta_grid") {
      c.beta_grid = r.numbers(v, key);
      for (double b : c.beta_grid) {
        if (!(b > 0.0 && b <= 1.0)) r.fail(key, "entries must lie in (0, 1]");
      }
    } else if (key == "utility_gammas") {
      c.utility_gammas = r.numbers(v, key);
    } else if (key == "include_rmcp") {
      if (!v.is_boolean()) r.fail(key, "must be true or false");
      c.include_rmcp = v.get<bool>();
    } else if (key == "dump_trees") {
      if (!v.is_boolean()) r.fail(key, "must be true or false");
      c.dump_trees = v.get<bool>();
    } else if (key == "bootstrap_samples") {
      c.bootstrap_samples = r.count(v, key);
    } else if (key == "threads") {
      c.threads = r.count(v, key);
    } else if (key == "output_dir") {
      c.output_dir = r.string(v, key);
    } else {
      r.fail(key, "is not a known config key");
    }
  }
  if (replicates) {
    if (doc.contains("seeds")) r.fail("replicates", "cannot be combined with seeds");
    c.seeds = seed_range(base_seed, *replicates);
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const fs::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void validate_config(const RunConfig& c) {
  if (c.environment != "bandit" && c.environment != "patient" && c.environment != "file") {
    throw ConfigError("environment must be bandit, patient or file, got '" + c.environment + "'");
  }
  if (c.environment == "file") {
    if (c.problem_file.empty()) throw ConfigError("environment 'file' needs problem_file");
    if (!fs::exists(c.problem_file)) throw ConfigError("problem_file " + c.problem_file.string() + " does not exist");
  }
  if (c.patient_horizon < 1) throw ConfigError("patient_horizon must be >= 1");
  if (c.envelope.metric == EnvelopeSpec::Metric::CVaR) {
    if (c.envelope.alphas.empty()) throw ConfigError("envelope.alphas must not be empty");
    for (double a : c.envelope.alphas) {
      if (!(a > 0.0 && a <= 1.0)) throw ConfigError("envelope alpha " + format_number(a) + " is outside (0, 1]");
    }
  }
  if (c.envelope.metric == EnvelopeSpec::Metric::Polytope && c.envelope.constraints.empty()) {
    throw ConfigError("polytope envelope needs constraints");
  }
  if (c.modes.empty()) throw ConfigError("modes must not be empty");
  if (c.budget < 1) throw ConfigError("budget must be >= 1");
  if (c.seeds.empty()) throw ConfigError("at least one seed is required");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (c.rollouts < 2) throw ConfigError("rollouts must be >= 2");
  if (c.beta_grid.empty()) throw ConfigError("beta_grid must not be empty");
  for (double b : c.beta_grid) {
    if (!(b > 0.0 && b <= 1.0)) throw ConfigError("beta " + format_number(b) + " is outside (0, 1]");
  }
  for (double g : c.utility_gammas) {
    if (!(g > 0.0)) throw ConfigError("utility gamma " + format_number(g) + " must be > 0");
  }
  if (c.bootstrap_samples < 1) throw ConfigError("bootstrap_samples must be >= 1");
}

std::shared_ptr<const BamdpProblem> make_problem(const RunConfig& c) {
  if (c.environment == "bandit") return std::make_shared<const BamdpProblem>(build_bandit());
  if (c.environment == "patient") {
    return std::make_shared<const BamdpProblem>(build_patient(c.patient_seed, c.patient_horizon));
  }
  return std::make_shared<const BamdpProblem>(load_problem(c.problem_file));
}

fs::path output_root() {
  if (const char* env = std::getenv("RAMCP_OUTPUT_ROOT"); env && *env) return fs::path(env);
  return fs::path("runs");
}

fs::path resolve_output_dir(const RunConfig& c, const std::string& command) {
  if (c.output_dir.empty()) return output_root() / command;
  if (c.output_dir.is_absolute()) return c.output_dir;
  return output_root() / c.output_dir;
}

// ---------------------------------------------------------------- execution

void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = jobs;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

Interval bootstrap_mean_ci90(const std::vector<double>& samples, std::size_t resamples, std::uint64_t seed) {
  if (samples.empty()) throw InvalidArgument("bootstrap needs samples");
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double total = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) total += samples[rng.uniform_index(samples.size())];
    m = total / static_cast<double>(samples.size());
  }
  std::sort(means.begin(), means.end());
  const auto at = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, means.size() - 1);
    return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
  };
  return {at(0.05), at(0.95)};
}

ConvergenceReport run_convergence(const RunConfig& config) {
  validate_config(config);
  const auto problem = make_problem(config);
  const auto envelopes = config.envelope.envelopes(problem->prior());
  const auto labels = config.envelope.labels();

  struct Job {
    std::size_t envelope;
    UpdateMode mode;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t e = 0; e < envelopes.size(); ++e) {
    for (auto mode : config.modes) {
      for (auto seed : config.seeds) jobs.push_back({e, mode, seed});
    }
  }
  std::vector<std::optional<ConvergenceRun>> results(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    Rng rng(job.seed);
    SearchResult r = search(problem, envelopes[job.envelope], {.mode = job.mode, .budget = config.budget}, rng);
    std::optional<json> tree;
    if (config.dump_trees) tree = r.tree->to_json();
    results[i] = ConvergenceRun{labels[job.envelope], job.mode, job.seed, std::move(r.state), std::move(r.trace),
                                std::move(tree)};
  });
  ConvergenceReport report{config, {}};
  for (auto& r : results) report.runs.push_back(std::move(*r));
  return report;
}

double shifted_value(const Belief& prior, const std::vector<double>& model_values, double beta) {
  return risk_value(RiskEnvelope::cvar(prior, beta), model_values);
}

namespace {

constexpr std::uint64_t kEvaluationStream = 0x5eed0000;

struct PolicyJob {
  std::string method;
  std::string label;
  std::optional<RiskEnvelope> envelope;
  std::optional<double> gamma;
  UpdateMode mode;
  std::uint64_t seed;
};

TrainedPolicy train_and_evaluate(const std::shared_ptr<const BamdpProblem>& problem, const PolicyJob& job,
                                 const RunConfig& config) {
  Rng rng(job.seed);
  SearchResult r = job.method == "exp-utility"
                       ? exponential_utility_search(problem, *job.gamma, job.mode, config.budget, rng)
                       : job.method == "rmcp" ? rmcp_search(problem, *job.envelope, job.mode, config.budget, rng)
                                              : search(problem, *job.envelope, {.mode = job.mode, .budget = config.budget}, rng);
  const MixedPolicy policy = r.policy(MixedPolicy::Fallback::Uniform);
  TrainedPolicy out{job.method, job.label, job.mode, job.seed, {}, {}, 0};
  for (std::size_t i = 0; i < problem->num_models(); ++i) {
    Rng eval_rng(mix_seed(job.seed, kEvaluationStream + i));
    const Evaluation e = evaluate_policy(*problem, policy, i, config.rollouts, eval_rng);
    out.model_values.push_back(e.mean);
    out.model_ci90.push_back(e.ci90);
  }
  out.fallbacks = policy.fallback_count();
  return out;
}

}  // namespace


RobustnessReport run_robustness(const RunConfig& config) {
  validate_config(config);
  const auto problem = make_problem(config);
  const auto envelopes = config.envelope.envelopes(problem->prior());
  const auto labels = config.envelope.labels();

  std::vector<PolicyJob> jobs;
  for (auto mode : config.modes) {
    for (std::size_t e = 0; e < envelopes.size(); ++e) {
      for (auto seed : config.seeds) jobs.push_back({"ramcp", labels[e], envelopes[e], std::nullopt, mode, seed});
    }
    for (double g : config.utility_gammas) {
      for (auto seed : config.seeds) jobs.push_back({"exp-utility", format_number(g), std::nullopt, g, mode, seed});
    }
    if (config.include_rmcp) {
      for (std::size_t e = 0; e < envelopes.size(); ++e) {
        for (auto seed : config.seeds) jobs.push_back({"rmcp", labels[e], envelopes[e], std::nullopt, mode, seed});
      }
    }
  }
  std::vector<std::optional<TrainedPolicy>> results(jobs.size());
  parallel_for(jobs.size(), config.threads,
               [&](std::size_t i) { results[i] = train_and_evaluate(problem, jobs[i], config); });

  RobustnessReport report{config, problem->prior(), {}, {}};
  for (auto& r : results) report.policies.push_back(std::move(*r));

  // Groups in job order; replicates in seed order.
  std::vector<std::tuple<std::string, std::string, UpdateMode>> groups;
  for (const auto& p : report.policies) {
    const auto g = std::make_tuple(p.method, p.label, p.mode);
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  std::uint64_t stream = 0;
  for (const auto& [method, label, mode] : groups) {
    for (double beta : config.beta_grid) {
      std::vector<double> values;
      for (const auto& p : report.policies) {
        if (p.method == method && p.label == label && p.mode == mode) {
          values.push_back(shifted_value(problem->prior(), p.model_values, beta));
        }
      }
      CurvePoint pt{method, label, mode, beta, 0.0, 0.0, {}, values.size()};
      double m2 = 0.0;
      for (std::size_t n = 0; n < values.size(); ++n) {
        const double delta = values[n] - pt.mean;
        pt.mean += delta / static_cast<double>(n + 1);
        m2 += delta * (values[n] - pt.mean);
      }
      pt.stderr_ = values.size() > 1
                       ? std::sqrt(m2 / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()))
                       : 0.0;
      pt.ci90 = bootstrap_mean_ci90(values, config.bootstrap_samples, mix_seed(config.seeds.front(), ++stream));
      report.curve.push_back(std::move(pt));
    }
  }
  return report;
}

RobustnessReport run_patient(const RunConfig& config) {
  if (config.environment != "patient") throw ConfigError("the patient command needs environment 'patient'");
  return run_robustness(config);
}

// ------------------------------------------------------------------ writers

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string file_label(const std::string& label) {
  std::string out;
  for (char ch : label) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-') ? ch : '_';
  return out;
}

json record_header(const RunConfig& config, const std::string& command, const BamdpProblem& problem) {
  return {{"schema_version", kRecordSchemaVersion},
          {"command", command},
          {"config", config.to_json()},
          {"problem", {{"name", problem.name()}, {"num_models", problem.num_models()}, {"horizon", problem.horizon()},
                       {"prior", problem.prior().weights()}}},
          {"note", "replicate counts, budgets, rollout counts and seeds are defaults of this tool, not values "
                   "prescribed by the method"}};
}

}  // namespace

void write_convergence(const ConvergenceReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  const auto problem = make_problem(report.config);
  const std::size_t m = problem->num_models();

  std::ostringstream summary;
  summary << "label,mode,seed,iterations,game_value,prior_expected_value";
  for (std::size_t i = 0; i < m; ++i) summary << ",v_hat_" << i;
  for (std::size_t i = 0; i < m; ++i) summary << ",b_avg_" << i;
  summary << '\n';

  json runs = json::array();
  for (const auto& run : report.runs) {
    const std::string name = "trace_" + file_label(run.label) + "_" + to_string(run.mode) + "_seed" +
                             std::to_string(run.seed) + ".csv";
    std::ostringstream trace;
    run.trace.write_csv(trace);
    write_text(dir / name, trace.str());
    if (run.tree) {
      write_json(dir / ("tree_" + file_label(run.label) + "_" + to_string(run.mode) + "_seed" +
                        std::to_string(run.seed) + ".json"),
                 *run.tree);
    }

    const double gv = game_value(run.state);
    const double pe = prior_expected_value(run.state);
    summary << run.label << ',' << to_string(run.mode) << ',' << run.seed << ',' << run.state.k << ','
            << format_number(gv) << ',' << format_number(pe);
    for (double v : run.state.v_hat) summary << ',' << format_number(v);
    for (double v : run.state.b_avg) summary << ',' << format_number(v);
    summary << '\n';

    runs.push_back({{"label", run.label}, {"mode", to_string(run.mode)}, {"seed", run.seed},
                    {"iterations", run.state.k}, {"game_value", gv}, {"prior_expected_value", pe},
                    {"v_hat", run.state.v_hat}, {"b_avg", run.state.b_avg}, {"b_adv", run.state.b_adv.weights()},
                    {"trace", name}});
  }
  write_text(dir / "summary.csv", summary.str());
  json record = record_header(report.config, "converge", *problem);
  record["runs"] = std::move(runs);
  write_json(dir / "record.json", record);
}

void write_robustness(const RobustnessReport& report, const std::string& command, const fs::path& dir) {
  fs::create_directories(dir);
  const auto problem = make_problem(report.config);
  const std::size_t m = problem->num_models();

  std::ostringstream policies;
  policies << "method,label,mode,seed,fallbacks";
  for (std::size_t i = 0; i < m; ++i) policies << ",value_" << i;
  for (std::size_t i = 0; i < m; ++i) policies << ",ci90_" << i;
  policies << '\n';
  for (const auto& p : report.policies) {
    policies << p.method << ',' << p.label << ',' << to_string(p.mode) << ',' << p.seed << ',' << p.fallbacks;
    for (double v : p.model_values) policies << ',' << format_number(v);
    for (double v : p.model_ci90) policies << ',' << format_number(v);
    policies << '\n';
  }
  write_text(dir / "policies.csv", policies.str());

  std::ostringstream curves;
  curves << "method,label,mode,beta,mean,stderr,ci90_low,ci90_high,replicates\n";
  json curve_json = json::array();
  for (const auto& pt : report.curve) {
    curves << pt.method << ',' << pt.label << ',' << to_string(pt.mode) << ',' << format_number(pt.beta) << ','
           << format_number(pt.mean) << ',' << format_number(pt.stderr_) << ',' << format_number(pt.ci90.low) << ','
           << format_number(pt.ci90.high) << ',' << pt.replicates << '\n';
    curve_json.push_back({{"method", pt.method}, {"label", pt.label}, {"mode", to_string(pt.mode)},
                          {"beta", pt.beta}, {"mean", pt.mean}, {"stderr", pt.stderr_},
                          {"ci90", {pt.ci90.low, pt.ci90.high}}, {"replicates", pt.replicates}});
  }
  write_text(dir / "curves.csv", curves.str());

  json record = record_header(report.config, command, *problem);
  record["curves"] = std::move(curve_json);
  record["files"] = {"policies.csv", "curves.csv"};
  write_json(dir / "record.json", record);
}

std::vector<std::string> diff_directories(const fs::path& a, const fs::path& b) {
  const auto list = [](const fs::path& root) {
    std::set<std::string> out;
    if (!fs::exists(root)) return out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) out.insert(fs::relative(e.path(), root).generic_string());
    }
    return out;
  };
  const auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const auto la = list(a);
  const auto lb = list(b);
  std::set<std::string> all(la.begin(), la.end());
  all.insert(lb.begin(), lb.end());
  std::vector<std::string> out;
  for (const auto& f : all) {
    if (!la.count(f) || !lb.count(f) || read(a / f) != read(b / f)) out.push_back(f);
  }
  return out;
}

// ------------------------------------------------------------------- checks

namespace {

struct GroupStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

GroupStats stats_of(const std::vector<double>& xs) {
  GroupStats g;
  g.n = xs.size();
  if (xs.empty()) return g;
  for (double x : xs) g.mean += x;
  g.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - g.mean) * (x - g.mean);
    g.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return g;
}

// a ahead of b by more than three standard errors of the difference.
CheckResult ahead(const std::string& name, const GroupStats& a, const GroupStats& b) {
  const double margin = 3.0 * std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
  const double diff = a.mean - b.mean;
  std::ostringstream d;
  d << "difference " << format_number(diff) << " vs 3-sigma margin " << format_number(margin) << " ("
    << format_number(a.mean) << " vs " << format_number(b.mean) << ", n=" << a.n << "/" << b.n << ")";
  return {name, a.n > 1 && b.n > 1 && diff > margin, d.str()};
}

std::pair<std::string, std::string> alpha_extremes(const RunConfig& c) {
  const auto& alphas = c.envelope.alphas;
  const auto [lo, hi] = std::minmax_element(alphas.begin(), alphas.end());
  return {format_number(*lo), format_number(*hi)};
}

}  // namespace

std::vector<double> RobustnessReport::replicate_values(const std::string& method, const std::string& label,
                                                       UpdateMode mode, double beta) const {
  std::vector<double> out;
  for (const auto& p : policies) {
    if (p.method == method && p.label == label && p.mode == mode) out.push_back(shifted_value(prior, p.model_values, beta));
  }
  return out;
}

std::vector<CheckResult> check_convergence(const ConvergenceReport& report) {
  std::vector<CheckResult> out;
  if (report.config.environment != "bandit") return out;
  const auto problem = make_problem(report.config);
  const auto envelopes = report.config.envelope.envelopes(problem->prior());
  const auto labels = report.config.envelope.labels();
  for (std::size_t e = 0; e < envelopes.size(); ++e) {
    const double exact = exact_nash_value(*problem, envelopes[e]).value;
    for (const auto& run : report.runs) {
      if (run.label != labels[e] || run.mode != UpdateMode::Full) continue;
      const double gv = game_value(run.state);
      out.push_back({"oracle agreement " + labels[e] + " seed " + std::to_string(run.seed),
                     std::abs(gv - exact) <= 0.03,
                     "game value " + format_number(gv) + ", exact " + format_number(exact) + ", tolerance 0.03"});
      for (const auto& other : report.runs) {
        if (other.label != run.label || other.seed != run.seed || other.mode != UpdateMode::Incremental) continue;
        const double f = prior_expected_value(run.state);
        const double i = prior_expected_value(other.state);
        out.push_back({"F/I agreement " + labels[e] + " seed " + std::to_string(run.seed),
                       std::abs(f - i) <= 0.05,
                       "F " + format_number(f) + ", I " + format_number(i) + ", tolerance 0.05"});
      }
    }
  }
  return out;
}

std::vector<CheckResult> check_robustness(const RobustnessReport& report) {
  std::vector<CheckResult> out;
  const auto& c = report.config;
  if (c.envelope.metric != EnvelopeSpec::Metric::CVaR || c.envelope.alphas.size() < 2) return out;
  const auto [lo, hi] = alpha_extremes(c);
  const double beta_lo = *std::min_element(c.beta_grid.begin(), c.beta_grid.end());
  const double beta_hi = *std::max_element(c.beta_grid.begin(), c.beta_grid.end());
  for (auto mode : c.modes) {
    const std::string tag = std::string(" (") + to_string(mode) + ")";
    out.push_back(ahead("alpha " + hi + " ahead at beta " + format_number(beta_hi) + tag,
                        stats_of(report.replicate_values("ramcp", hi, mode, beta_hi)),
                        stats_of(report.replicate_values("ramcp", lo, mode, beta_hi))));
    out.push_back(ahead("alpha " + lo + " ahead at beta " + format_number(beta_lo) + tag,
                        stats_of(report.replicate_values("ramcp", lo, mode, beta_lo)),
                        stats_of(report.replicate_values("ramcp", hi, mode, beta_lo))));
  }
  return out;
}

std::vector<CheckResult> check_patient(const RobustnessReport& report) {
  std::vector<CheckResult> out;
  const auto& c = report.config;
  if (c.envelope.metric != EnvelopeSpec::Metric::CVaR || c.envelope.alphas.size() < 2) return out;
  const auto [lo, hi] = alpha_extremes(c);
  const double beta_lo = *std::min_element(c.beta_grid.begin(), c.beta_grid.end());
  const double beta_hi = *std::max_element(c.beta_grid.begin(), c.beta_grid.end());
  const auto drop = [&](const std::string& label, UpdateMode mode) {
    const auto top = report.replicate_values("ramcp", label, mode, beta_hi);
    const auto bottom = report.replicate_values("ramcp", label, mode, beta_lo);
    std::vector<double> d(top.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = top[i] - bottom[i];
    return stats_of(d);
  };
  for (auto mode : c.modes) {
    const std::string tag = std::string(" (") + to_string(mode) + ")";
    out.push_back(ahead("alpha " + lo + " flatter than alpha " + hi + tag, drop(hi, mode), drop(lo, mode)));
    for (double g : c.utility_gammas) {
      out.push_back(ahead("exp-utility gamma " + format_number(g) + " below alpha " + hi + " at beta " +
                              format_number(beta_hi) + tag,
                          stats_of(report.replicate_values("ramcp", hi, mode, beta_hi)),
                          stats_of(report.replicate_values("exp-utility", format_number(g), mode, beta_hi))));
    }
  }
  return out;
}

}  // namespace ramcp
