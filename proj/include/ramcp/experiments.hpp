#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ramcp/ramcp.hpp"

namespace ramcp {

inline constexpr int kRecordSchemaVersion = 1;

/// Risk envelope family selected by a run configuration.
struct EnvelopeSpec {
  enum class Metric { CVaR, Expectation, WorstCase, Polytope };
  Metric metric = Metric::CVaR;
  std::vector<double> alphas{0.25, 0.5, 0.75, 1.0};  // CVaR only
  std::vector<LinearConstraint> constraints;         // Polytope only

  /// One envelope per grid point (a single one for non-CVaR metrics).
  std::vector<RiskEnvelope> envelopes(const Belief& prior) const;
  /// Grid label per envelope ("0.25", "expectation", ...).
  std::vector<std::string> labels() const;
};

struct RunConfig {
  std::string environment = "bandit";  // bandit | patient | file
  std::filesystem::path problem_file;  // environment == file
  std::uint64_t patient_seed = 12345;
  int patient_horizon = 4;
  EnvelopeSpec envelope;
  std::vector<UpdateMode> modes{UpdateMode::Full};
  std::uint64_t budget = 10000;
  std::vector<std::uint64_t> seeds{1};
  std::size_t rollouts = 2000;  // per model, per trained policy
  std::vector<double> beta_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> utility_gammas;  // exponential-utility baseline runs
  bool include_rmcp = false;           // state-dependent baseline runs
  bool dump_trees = false;             // converge: write each final tree as JSON
  std::size_t bootstrap_samples = 1000;
  std::size_t threads = 0;             // 0: hardware concurrency
  std::filesystem::path output_dir;    // relative paths resolve under the output root

  nlohmann::json to_json() const;
};

/// Defaults per subcommand: converge (bandit, all CVaR alphas, F and I),
/// robustness (bandit, alphas 0.25 and 1, 50 replicates), patient (patient
/// env, alphas 0.2 and 1, mode I, 12500 iterations, 50 replicates, gamma 1).
RunConfig default_config(const std::string& command);

/// Applies a JSON document over `base`. Unknown keys and invalid values
/// throw ConfigError naming the offending key and its line in `text`.
RunConfig parse_config(const std::string& text, RunConfig base);
RunConfig load_config(const std::filesystem::path& path, RunConfig base);
void validate_config(const RunConfig& config);

std::shared_ptr<const BamdpProblem> make_problem(const RunConfig& config);

/// Output root: $RAMCP_OUTPUT_ROOT if set, else ./runs.
std::filesystem::path output_root();
std::filesystem::path resolve_output_dir(const RunConfig& config, const std::string& command);

/// Runs `jobs` tasks on up to `threads` workers. Task i writes only slot i,
/// so results are independent of scheduling.
void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& task);

/// Percentile-bootstrap 90% interval of the mean.
struct Interval {
  double low = 0.0;
  double high = 0.0;
};
Interval bootstrap_mean_ci90(const std::vector<double>& samples, std::size_t resamples, std::uint64_t seed);

struct ConvergenceRun {
  std::string label;  // envelope grid label
  UpdateMode mode = UpdateMode::Full;
  std::uint64_t seed = 0;
  GameState state;
  ConvergenceTrace trace;
  std::optional<nlohmann::json> tree;  // when dump_trees is set
};

struct ConvergenceReport {
  RunConfig config;
  std::vector<ConvergenceRun> runs;
};

ConvergenceReport run_convergence(const RunConfig& config);

/// One trained policy with its per-model evaluation.
struct TrainedPolicy {
  std::string method;  // ramcp | exp-utility | rmcp
  std::string label;   // alpha label or gamma
  UpdateMode mode = UpdateMode::Full;
  std::uint64_t seed = 0;
  std::vector<double> model_values;  // rollout means per model
  std::vector<double> model_ci90;
  std::size_t fallbacks = 0;         // histories answered by the uniform fallback
};

struct CurvePoint {
  std::string method;
  std::string label;
  UpdateMode mode = UpdateMode::Full;
  double beta = 1.0;
  double mean = 0.0;
  double stderr_ = 0.0;  // across replicates
  Interval ci90;
  std::size_t replicates = 0;
};

struct RobustnessReport {
  RunConfig config;
  Belief prior;
  std::vector<TrainedPolicy> policies;
  std::vector<CurvePoint> curve;

  /// Per-replicate CVaR_beta evaluation of one policy group, seed order.
  std::vector<double> replicate_values(const std::string& method, const std::string& label, UpdateMode mode,
                                       double beta) const;
};

/// Trains every (method, grid point, mode, seed), evaluates each policy on
/// every model by rollouts and reports the CVaR_beta-over-prior curve.
RobustnessReport run_robustness(const RunConfig& config);
RobustnessReport run_patient(const RunConfig& config);

/// CVaR_beta under the prior of per-model values.
double shifted_value(const Belief& prior, const std::vector<double>& model_values, double beta);

// File writers. Byte-identical for identical inputs.
void write_convergence(const ConvergenceReport& report, const std::filesystem::path& dir);
void write_robustness(const RobustnessReport& report, const std::string& command,
                      const std::filesystem::path& dir);

/// Outcome of a qualitative or oracle check on a finished run.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Oracle agreement (bandit only): Full-mode game value against the exact
/// equilibrium value per grid point, and Incremental against Full.
std::vector<CheckResult> check_convergence(const ConvergenceReport& report);

/// Cross-ordering of the largest and smallest training alpha: the larger
/// one is ahead at beta = 1, the smaller one at the smallest beta (3 sigma).
std::vector<CheckResult> check_robustness(const RobustnessReport& report);

/// The smallest alpha loses less from the largest to the smallest beta than
/// the largest alpha, and every exponential-utility curve is below the
/// largest-alpha curve at the largest beta (3 sigma).
std::vector<CheckResult> check_patient(const RobustnessReport& report);

/// Lists the files under `a` and `b` that differ or exist on one side only.
std::vector<std::string> diff_directories(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace ramcp
