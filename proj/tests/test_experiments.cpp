#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ramcp/errors.hpp"
#include "ramcp/experiments.hpp"
#include "ramcp/fixtures.hpp"
#include "support.hpp"

using namespace ramcp;
namespace fs = std::filesystem;

namespace {

std::string first_line(const fs::path& file) {
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, default_config("converge"));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ramcp_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig small_robustness() {
  RunConfig c = default_config("robustness");
  c.budget = 200;
  c.seeds = {1, 2, 3};
  c.rollouts = 40;
  c.beta_grid = {0.5, 1.0};
  c.utility_gammas = {1.0};
  c.bootstrap_samples = 50;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("subcommand defaults") {
  CHECK(default_config("converge").envelope.alphas == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  const RunConfig r = default_config("robustness");
  CHECK(r.seeds.size() == 50);
  CHECK(r.include_rmcp);
  const RunConfig p = default_config("patient");
  CHECK(p.environment == "patient");
  CHECK(p.budget == 12500);
  CHECK(p.envelope.alphas == std::vector<double>{0.2, 1.0});
  CHECK(p.modes == std::vector<UpdateMode>{UpdateMode::Incremental});
  CHECK_THROWS_AS(default_config("plot"), ConfigError);
}

TEST_CASE("config documents apply over the defaults") {
  const RunConfig c = parse_config(R"({
    "schema_version": 1,
    "envelope": {"metric": "cvar", "alphas": [0.3, 0.9]},
    "modes": ["I"],
    "budget": 250,
    "replicates": 3, "base_seed": 10,
    "rollouts": 20,
    "beta_grid": [0.5, 1.0],
    "output_dir": "x"
  })", default_config("converge"));
  CHECK(c.envelope.alphas == std::vector<double>{0.3, 0.9});
  CHECK(c.modes == std::vector<UpdateMode>{UpdateMode::Incremental});
  CHECK(c.budget == 250);
  CHECK(c.seeds == std::vector<std::uint64_t>{10, 11, 12});
  CHECK(c.output_dir == "x");
  const RunConfig single = parse_config(R"({"envelope": {"alpha": 0.4}, "mode": "F"})", default_config("converge"));
  CHECK(single.envelope.alphas == std::vector<double>{0.4});
}

TEST_CASE("config errors name the key and its line") {
  CHECK(error_of("{\n  \"budget\": 10,\n  \"bugdet\": 3\n}") == "config line 3: 'bugdet' is not a known config key");
  CHECK(error_of("{\n\"envelope\": {\n  \"alphas\": [0.5, 1.5]\n}}") ==
        "config line 3: 'alphas' entries must lie in (0, 1]");
  CHECK(error_of("{\"budget\": 0}") == "config line 1: 'budget' must be >= 1");
  CHECK(error_of("{\"budget\": -4}") == "config line 1: 'budget' must be a nonnegative integer");
  CHECK(error_of("{\"modes\": [\"X\"]}").find("'modes'") != std::string::npos);
  CHECK(error_of("{\"seeds\": [1], \"replicates\": 4}").find("'replicates'") != std::string::npos);
  CHECK(error_of("{\"schema_version\": 9}").find("not supported") != std::string::npos);
  CHECK(error_of("{\"budget\": ").find("not valid JSON") != std::string::npos);
  CHECK(error_of("[1, 2]") == "config must be a JSON object");
  CHECK(error_of("{\"environment\": \"file\"}") == "environment 'file' needs problem_file");
  CHECK(error_of("{\"problem_file\": \"/nonexistent/p.json\"}").find("does not exist") != std::string::npos);
  CHECK(error_of("{\"seeds\": [2, 2]}") == "seeds must be distinct");
  CHECK(error_of("{\"envelope\": {\"metric\": \"polytope\"}}") == "polytope envelope needs constraints");
}

TEST_CASE("config echo round trips") {
  RunConfig c = small_robustness();
  c.envelope.metric = EnvelopeSpec::Metric::Polytope;
  c.envelope.constraints = {{{1.0, 0.0}, 1.5}};
  const RunConfig back = parse_config(c.to_json().dump(), default_config("robustness"));
  CHECK(back.to_json() == c.to_json());
}

TEST_CASE("envelope labels") {
  EnvelopeSpec s;
  s.alphas = {0.25, 1.0};
  CHECK(s.labels() == std::vector<std::string>{"0.25", "1"});
  CHECK(s.envelopes(Belief({0.6, 0.4})).size() == 2);
  s.metric = EnvelopeSpec::Metric::WorstCase;
  CHECK(s.labels() == std::vector<std::string>{"worst_case"});
}

TEST_CASE("problem selection") {
  RunConfig c = default_config("converge");
  CHECK(make_problem(c)->name() == "bandit");
  c.environment = "patient";
  c.patient_horizon = 2;
  CHECK(make_problem(c)->horizon() == 2);
  c.environment = "file";
  c.problem_file = testing::kFixtureDir / "patient_problem.json";
  CHECK(make_problem(c)->num_models() == 15);
}

TEST_CASE("output root follows the environment variable") {
  const char* saved = std::getenv("RAMCP_OUTPUT_ROOT");
  const std::string keep = saved ? saved : "";
  ::setenv("RAMCP_OUTPUT_ROOT", "/tmp/elsewhere", 1);
  CHECK(output_root() == fs::path("/tmp/elsewhere"));
  RunConfig c = default_config("converge");
  c.output_dir = "mine";
  CHECK(resolve_output_dir(c, "converge") == fs::path("/tmp/elsewhere/mine"));
  c.output_dir = "/abs/dir";
  CHECK(resolve_output_dir(c, "converge") == fs::path("/abs/dir"));
  ::unsetenv("RAMCP_OUTPUT_ROOT");
  CHECK(output_root() == fs::path("runs"));
  if (saved) ::setenv("RAMCP_OUTPUT_ROOT", keep.c_str(), 1);
}

TEST_CASE("parallel for covers every job once") {
  for (std::size_t threads : {1u, 3u, 16u}) {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no jobs expected"); });
}

TEST_CASE("bootstrap interval brackets the mean and is seeded") {
  Rng rng(1);
  std::vector<double> xs(200);
  for (double& x : xs) x = rng.normal(1.0, 0.5);
  const auto a = bootstrap_mean_ci90(xs, 500, 7);
  const auto b = bootstrap_mean_ci90(xs, 500, 7);
  const double mean = testing::sample_stats(xs).mean;
  CHECK(a.low < mean);
  CHECK(a.high > mean);
  CHECK(a.low == b.low);
  CHECK(a.high == b.high);
}

TEST_CASE("shifted value endpoints") {
  const Belief prior({0.6, 0.4});
  CHECK(shifted_value(prior, {2.0, 1.0}, 1.0) == doctest::Approx(1.6));
  CHECK(shifted_value(prior, {2.0, 1.0}, 0.4) == doctest::Approx(1.0));
  CHECK(shifted_value(prior, {2.0, 1.0}, 0.5) == doctest::Approx(1.2));
}

TEST_CASE("convergence run files") {
  RunConfig c = default_config("converge");
  c.envelope.alphas = {0.5, 1.0};
  c.budget = 300;
  c.seeds = {4};
  c.dump_trees = true;
  const ConvergenceReport report = run_convergence(c);
  CHECK(report.runs.size() == 4);
  const fs::path dir = scratch("converge");
  write_convergence(report, dir);
  CHECK(first_line(dir / "trace_0.5_F_seed4.csv") == "k,b_adv_0,b_adv_1,b_avg_0,b_avg_1,v_hat_0,v_hat_1,game_value");
  CHECK(first_line(dir / "summary.csv") ==
        "label,mode,seed,iterations,game_value,prior_expected_value,v_hat_0,v_hat_1,b_avg_0,b_avg_1");
  CHECK(fs::exists(dir / "tree_1_I_seed4.json"));
  std::ifstream in(dir / "record.json");
  const auto record = nlohmann::json::parse(in);
  CHECK(record["schema_version"] == kRecordSchemaVersion);
  CHECK(record["command"] == "converge");
  CHECK(record["config"] == c.to_json());

  const fs::path again = scratch("converge_again");
  write_convergence(run_convergence(c), again);
  CHECK(diff_directories(dir, again).empty());
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("robustness run is independent of thread count") {
  RunConfig c = small_robustness();
  const RobustnessReport one = run_robustness(c);
  c.threads = 3;
  const RobustnessReport three = run_robustness(c);
  const fs::path a = scratch("robust_a"), b = scratch("robust_b");
  write_robustness(one, "robustness", a);
  write_robustness(three, "robustness", b);
  CHECK(diff_directories(a, b).empty());
  CHECK(first_line(a / "policies.csv") == "method,label,mode,seed,fallbacks,value_0,value_1,ci90_0,ci90_1");
  CHECK(first_line(a / "curves.csv") == "method,label,mode,beta,mean,stderr,ci90_low,ci90_high,replicates");
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("robustness curve points") {
  const RobustnessReport r = run_robustness(small_robustness());
  // 2 modes x (2 alphas + 1 gamma + rmcp per alpha) x 3 seeds
  CHECK(r.policies.size() == 2 * (2 + 1 + 2) * 3);
  for (const auto& pt : r.curve) {
    CHECK(pt.replicates == 3);
    CHECK(pt.ci90.low <= pt.mean + 1e-12);
    CHECK(pt.ci90.high >= pt.mean - 1e-12);
    if (pt.beta != 1.0) continue;
    // the beta = 1 point is the prior-expected evaluated value
    const auto values = r.replicate_values(pt.method, pt.label, pt.mode, 1.0);
    double mean = 0.0;
    for (double v : values) mean += v / static_cast<double>(values.size());
    CHECK(pt.mean == doctest::Approx(mean));
  }
  const auto checks = check_robustness(r);
  CHECK(checks.size() == 4);
}

TEST_CASE("patient command requires the patient environment") {
  CHECK_THROWS_AS(run_patient(small_robustness()), ConfigError);
}

TEST_CASE("directory diff") {
  const fs::path a = scratch("diff_a"), b = scratch("diff_b");
  fs::create_directories(a);
  fs::create_directories(b);
  std::ofstream(a / "same.txt") << "x";
  std::ofstream(b / "same.txt") << "x";
  std::ofstream(a / "changed.txt") << "1";
  std::ofstream(b / "changed.txt") << "2";
  std::ofstream(a / "only_a.txt") << "";
  const auto diffs = diff_directories(a, b);
  CHECK(diffs == std::vector<std::string>{"changed.txt", "only_a.txt"});
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("oracle fixtures regenerate byte for byte") {
  const fs::path dir = scratch("fixtures");
  write_oracle_fixtures(dir, 12345);
  for (const char* name : {"bandit_oracle.json", "patient_profiles.json", "patient_problem.json"}) {
    std::ifstream x(dir / name), y(testing::kFixtureDir / name);
    std::stringstream sx, sy;
    sx << x.rdbuf();
    sy << y.rdbuf();
    CHECK_MESSAGE(sx.str() == sy.str(), name);
  }
  fs::remove_all(dir);
}
