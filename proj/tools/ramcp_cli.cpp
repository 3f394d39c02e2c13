// Command-line front end for the planner experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error,
// 4 failed check (--check) or reproducibility mismatch (--verify, verify).

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ramcp/errors.hpp"
#include "ramcp/experiments.hpp"
#include "ramcp/fixtures.hpp"
#include "ramcp/format.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ramcp;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitCheck = 4;

struct Overrides {
  std::string config_file;
  std::optional<std::uint64_t> budget;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> replicates;
  std::uint64_t base_seed = 1;
  std::vector<double> alphas;
  std::vector<std::string> modes;
  std::optional<std::size_t> rollouts;
  std::vector<double> gammas;
  std::optional<std::size_t> threads;
  std::string output;
  bool check = false;
  bool verify = false;
  bool dump_tree = false;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_file, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--budget", o.budget, "Fictitious-play iterations per search");
  cmd->add_option("--seeds", o.seeds, "Explicit replicate seeds")->delimiter(',');
  cmd->add_option("--replicates", o.replicates, "Number of replicate seeds (base-seed, base-seed+1, ...)");
  cmd->add_option("--base-seed", o.base_seed, "First seed used with --replicates");
  cmd->add_option("--alphas", o.alphas, "CVaR alpha grid")->delimiter(',');
  cmd->add_option("--modes", o.modes, "Update modes (F, I)")->delimiter(',');
  cmd->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  cmd->add_option("-o,--output", o.output, "Output directory (relative paths resolve under $RAMCP_OUTPUT_ROOT)");
  cmd->add_flag("--check", o.check, "Run the built-in checks on the results; exit 4 on failure");
  cmd->add_flag("--verify", o.verify, "Re-run into a scratch directory and diff the outputs; exit 4 on mismatch");
}

RunConfig build_config(const std::string& command, const Overrides& o) {
  RunConfig c = default_config(command);
  if (!o.config_file.empty()) c = load_config(o.config_file, c);
  if (o.budget) c.budget = *o.budget;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.replicates) {
    if (!o.seeds.empty()) throw ConfigError("--replicates cannot be combined with --seeds");
    c.seeds.clear();
    for (std::size_t i = 0; i < *o.replicates; ++i) c.seeds.push_back(o.base_seed + i);
  }
  if (!o.alphas.empty()) {
    c.envelope.metric = EnvelopeSpec::Metric::CVaR;
    c.envelope.alphas = o.alphas;
  }
  if (!o.modes.empty()) {
    c.modes.clear();
    for (const auto& m : o.modes) {
      try {
        c.modes.push_back(parse_update_mode(m));
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("--modes: ") + e.what());
      }
    }
  }
  if (o.rollouts) c.rollouts = *o.rollouts;
  if (!o.gammas.empty()) c.utility_gammas = o.gammas;
  if (o.threads) c.threads = *o.threads;
  if (!o.output.empty()) c.output_dir = o.output;
  if (o.dump_tree) c.dump_trees = true;
  validate_config(c);
  return c;
}

std::vector<CheckResult> execute(const std::string& command, const RunConfig& config, const fs::path& dir,
                                 bool quiet) {
  if (command == "converge") {
    const ConvergenceReport report = run_convergence(config);
    write_convergence(report, dir);
    if (!quiet) {
      for (const auto& run : report.runs) {
        std::cout << "alpha " << run.label << " mode " << to_string(run.mode) << " seed " << run.seed
                  << ": game value " << format_number(game_value(run.state)) << ", prior-expected "
                  << format_number(prior_expected_value(run.state)) << '\n';
      }
    }
    return check_convergence(report);
  }
  const RobustnessReport report = command == "patient" ? run_patient(config) : run_robustness(config);
  write_robustness(report, command, dir);
  if (!quiet) {
    for (const auto& pt : report.curve) {
      std::cout << pt.method << ' ' << pt.label << ' ' << to_string(pt.mode) << " beta " << format_number(pt.beta)
                << ": " << format_number(pt.mean) << " [" << format_number(pt.ci90.low) << ", "
                << format_number(pt.ci90.high) << "]\n";
    }
  }
  return command == "patient" ? check_patient(report) : check_robustness(report);
}

fs::path scratch_dir() {
  std::random_device rd;
  const fs::path p = fs::temp_directory_path() / ("ramcp-verify-" + std::to_string(rd()) + std::to_string(rd()));
  fs::create_directories(p);
  return p;
}

void write_fixture_record(const fs::path& dir, std::uint64_t patient_seed) {
  std::ofstream out(dir / "record.json", std::ios::binary | std::ios::trunc);
  out << json{{"schema_version", kRecordSchemaVersion},
              {"command", "oracle-fixtures"},
              {"config", {{"patient_seed", patient_seed}}}}
             .dump(2)
      << '\n';
}

// Regenerates `dir` into a scratch directory and reports differences.
int verify_against(const std::string& command, const RunConfig* config, std::uint64_t patient_seed,
                   const fs::path& dir) {
  const fs::path scratch = scratch_dir();
  if (command == "oracle-fixtures") {
    write_oracle_fixtures(scratch, patient_seed);
    write_fixture_record(scratch, patient_seed);
  } else {
    execute(command, *config, scratch, true);
  }
  const auto diffs = diff_directories(dir, scratch);
  fs::remove_all(scratch);
  if (diffs.empty()) {
    std::cout << "verify: " << dir.string() << " reproduced byte for byte\n";
    return 0;
  }
  for (const auto& f : diffs) std::cout << "verify: differs: " << f << '\n';
  return kExitCheck;
}

int report_checks(const std::vector<CheckResult>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  if (checks.empty()) std::cout << "no checks apply to this configuration\n";
  return ok ? 0 : kExitCheck;
}

int run_verify_command(const fs::path& dir) {
  std::ifstream in(dir / "record.json");
  if (!in) throw ConfigError("no record.json in " + dir.string());
  json record;
  try {
    record = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("record.json is not valid JSON: " + std::string(e.what()));
  }
  if (!record.contains("command") || !record.contains("config")) throw ConfigError("record.json lacks command/config");
  const std::string command = record["command"].get<std::string>();
  if (command == "oracle-fixtures") {
    return verify_against(command, nullptr, record["config"].value("patient_seed", std::uint64_t{12345}), dir);
  }
  const RunConfig config = parse_config(record["config"].dump(), default_config(command));
  return verify_against(command, &config, 0, dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-averse Bayes-adaptive planning experiments"};
  app.require_subcommand(1);

  Overrides converge_opts, robustness_opts, patient_opts;
  auto* converge = app.add_subcommand("converge", "Convergence traces over an alpha grid (bandit by default)");
  add_run_options(converge, converge_opts);
  converge->add_flag("--dump-tree", converge_opts.dump_tree, "Also write each final search tree as JSON");

  auto* robustness = app.add_subcommand("robustness", "Robustness curves under a shifted prior (bandit by default)");
  add_run_options(robustness, robustness_opts);
  robustness->add_option("--rollouts", robustness_opts.rollouts, "Evaluation rollouts per model");
  robustness->add_option("--gammas", robustness_opts.gammas, "Exponential-utility baseline gammas")->delimiter(',');

  auto* patient = app.add_subcommand("patient", "Robustness curves on the patient-treatment environment");
  add_run_options(patient, patient_opts);
  patient->add_option("--rollouts", patient_opts.rollouts, "Evaluation rollouts per model");
  patient->add_option("--gammas", patient_opts.gammas, "Exponential-utility baseline gammas")->delimiter(',');

  std::string fixtures_out;
  std::uint64_t fixtures_seed = 12345;
  bool fixtures_verify = false;
  auto* fixtures = app.add_subcommand("oracle-fixtures", "Write exact oracle constants and the patient fixture");
  fixtures->add_option("-o,--output", fixtures_out, "Output directory");
  fixtures->add_option("--patient-seed", fixtures_seed, "Patient generator seed");
  fixtures->add_flag("--verify", fixtures_verify, "Diff an existing fixture directory against a fresh build");

  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "Re-run a recorded run directory and diff every output file");
  verify->add_option("run_dir", verify_dir, "Directory containing record.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    for (auto [cmd, opts] : {std::pair{converge, &converge_opts}, std::pair{robustness, &robustness_opts},
                             std::pair{patient, &patient_opts}}) {
      if (!cmd->parsed()) continue;
      const std::string command = cmd->get_name();
      const RunConfig config = build_config(command, *opts);
      const fs::path dir = resolve_output_dir(config, command);
      const auto t0 = std::chrono::steady_clock::now();
      const auto checks = execute(command, config, dir, false);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << "wrote " << dir.string() << " in " << format_number(std::round(seconds * 10) / 10) << " s\n";
      int code = 0;
      if (opts->check) code = report_checks(checks);
      if (opts->verify && verify_against(command, &config, 0, dir) != 0) code = kExitCheck;
      return code;
    }
    if (fixtures->parsed()) {
      const fs::path dir = fixtures_out.empty() ? output_root() / "fixtures" : fs::path(fixtures_out);
      if (fixtures_verify) return verify_against("oracle-fixtures", nullptr, fixtures_seed, dir);
      write_oracle_fixtures(dir, fixtures_seed);
      write_fixture_record(dir, fixtures_seed);
      std::cout << "wrote " << dir.string() << '\n';
      return 0;
    }
    if (verify->parsed()) return run_verify_command(verify_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
