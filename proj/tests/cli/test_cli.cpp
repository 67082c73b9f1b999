#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "cli/commands.hpp"
#include "support/fixtures.hpp"

using namespace varsched;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string err;
};

CliResult run_cli(const fixtures::TempDir& dir, const std::string& args) {
  const auto err_path = dir / "stderr.txt";
  const std::string cmd =
      std::string(VARSCHED_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = fixtures::read_file(err_path);
  return r;
}

json read_json(const std::filesystem::path& p) { return json::parse(fixtures::read_file(p)); }

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string flat_profile_csv(int gpus, int gpn) {
  std::string s = "gpu_id,node_id,class,normalized_time\n";
  for (const char* cls : {"A", "B", "C"}) {
    for (int g = 0; g < gpus; ++g) s += std::to_string(g) + "," + std::to_string(g / gpn) + "," + cls + ",1.0\n";
  }
  return s;
}

std::string single_class_profile(const std::vector<double>& values) {
  std::string s = "gpu_id,node_id,class,normalized_time\n";
  for (std::size_t g = 0; g < values.size(); ++g) {
    std::ostringstream v;
    v << values[g];
    s += std::to_string(g) + "," + std::to_string(g / 4) + ",A," + v.str() + "\n";
  }
  return s;
}

}  // namespace

TEST(Cli, HandComputedTwoJobRun) {
  fixtures::TempDir dir;
  dir.write("profile.csv", flat_profile_csv(2, 2));
  dir.write("trace.csv",
            "job_id,arrival_time_s,gpu_demand,class,total_iterations,base_iter_time_s\n"
            "0,0,2,A,100,6\n"
            "1,0,2,A,50,6\n");
  const auto r = run_cli(dir, "run --trace " + (dir / "trace.csv").string() + " --profile " +
                                  (dir / "profile.csv").string() + " --nodes 1 --gpus-per-node 2 --out " +
                                  (dir / "out").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = read_json(dir / "out" / "summary.json");
  const auto& all = s["metrics"]["all"];
  EXPECT_EQ(all["jobs"], 2);
  EXPECT_DOUBLE_EQ(all["avg_jct_s"].get<double>(), 750.0);
  EXPECT_NEAR(all["geomean_jct_s"].get<double>(), std::sqrt(600.0 * 900.0), 1e-9);
  EXPECT_DOUBLE_EQ(all["p99_jct_s"].get<double>(), 900.0);
  EXPECT_DOUBLE_EQ(all["avg_wait_s"].get<double>(), 300.0);
  EXPECT_DOUBLE_EQ(s["metrics"]["makespan_s"].get<double>(), 900.0);
  EXPECT_EQ(s["config"]["nodes"], 1);

  const auto jobs = fixtures::read_file(dir / "out" / "jobs.csv");
  EXPECT_EQ(count_lines(jobs), 3u);
  EXPECT_EQ(jobs.rfind("job_id,gpu_demand,class,arrival_s,start_s,finish_s,jct_s,wait_s", 0), 0u);
  EXPECT_EQ(count_lines(fixtures::read_file(dir / "out" / "rounds.csv")), 4u);
}

TEST(Cli, MissingProfileIsAnInputError) {
  fixtures::TempDir dir;
  const auto r = run_cli(dir, "run --trace-spec sia-like --profile " + (dir / "nope.csv").string() + " --out " +
                                  (dir / "out").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nope.csv"), std::string::npos) << r.err;
}

TEST(Cli, UnknownFlagAndBadValuesExitOne) {
  fixtures::TempDir dir;
  EXPECT_EQ(run_cli(dir, "run --bogus").code, 1);
  EXPECT_EQ(run_cli(dir, "").code, 1);
  EXPECT_EQ(run_cli(dir, "--help").code, 0);
  dir.write("profile.csv", flat_profile_csv(4, 4));
  const auto base = "run --trace-spec sia-like --profile " + (dir / "profile.csv").string() + " --nodes 1 --out " +
                    (dir / "out").string();
  EXPECT_EQ(run_cli(dir, base + " --placement nearest").code, 1);
  EXPECT_EQ(run_cli(dir, base + " --l-across 0.5").code, 1);
  // 48-GPU jobs cannot fit four GPUs.
  EXPECT_EQ(run_cli(dir, base).code, 1);
}

TEST(Cli, SameSeedGivesIdenticalOutputs) {
  fixtures::TempDir dir;
  ASSERT_EQ(run_cli(dir, "gen-profile --gpus 64 --seed 7 --out " + (dir / "profile.csv").string()).code, 0);
  const auto base = "run --trace-spec sia-like --profile " + (dir / "profile.csv").string() + " --seed 7 --out ";
  ASSERT_EQ(run_cli(dir, base + (dir / "a").string()).code, 0);
  ASSERT_EQ(run_cli(dir, base + (dir / "b").string()).code, 0);
  for (const char* f : {"summary.json", "jobs.csv", "rounds.csv"}) {
    EXPECT_EQ(fixtures::read_file(dir / "a" / f), fixtures::read_file(dir / "b" / f)) << f;
  }
}

TEST(Cli, SweepCoversEveryCell) {
  fixtures::TempDir dir;
  ASSERT_EQ(run_cli(dir, "gen-profile --gpus 64 --seed 1 --out " + (dir / "profile.csv").string()).code, 0);
  const auto r = run_cli(dir, "sweep --trace-spec sia-like --profile " + (dir / "profile.csv").string() +
                                  " --sweep-axis l_across placement --sweep-values 1.0,1.5,2.0,2.5,3.0 all"
                                  " --jobs 2 --out " + (dir / "sweep").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = fixtures::read_file(dir / "sweep" / "sweep.csv");
  EXPECT_EQ(count_lines(csv), 31u);
  EXPECT_TRUE(std::filesystem::exists(dir / "sweep" / "cells" / "cell-0029" / "summary.json"));
}

TEST(Cli, SingleCellSweepMatchesRun) {
  fixtures::TempDir dir;
  ASSERT_EQ(run_cli(dir, "gen-profile --gpus 64 --seed 2 --out " + (dir / "profile.csv").string()).code, 0);
  const auto common = "--trace-spec sia-like --profile " + (dir / "profile.csv").string() + " --seed 3 ";
  ASSERT_EQ(run_cli(dir, "run " + common + "--l-across 1.7 --out " + (dir / "run").string()).code, 0);
  ASSERT_EQ(run_cli(dir, "sweep " + common + "--sweep-axis l_across --sweep-values 1.7 --out " +
                             (dir / "sweep").string())
                .code,
            0);
  EXPECT_EQ(fixtures::read_file(dir / "run" / "summary.json"),
            fixtures::read_file(dir / "sweep" / "cells" / "cell-0000" / "summary.json"));
}

TEST(Cli, FailedSweepCellIsRecorded) {
  fixtures::TempDir dir;
  ASSERT_EQ(run_cli(dir, "gen-profile --gpus 64 --seed 2 --out " + (dir / "profile.csv").string()).code, 0);
  const auto r = run_cli(dir, "sweep --trace-spec sia-like --num-jobs 20 --profile " + (dir / "profile.csv").string() +
                                  " --sweep-axis job_load --sweep-values 10,0 --out " + (dir / "sweep").string());
  EXPECT_EQ(r.code, 1);
  const auto csv = fixtures::read_file(dir / "sweep" / "sweep.csv");
  EXPECT_EQ(count_lines(csv), 3u);
  EXPECT_NE(csv.find("\n0,ok,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\n1,failed,"), std::string::npos) << csv;
}

TEST(Cli, BinProfileReportsBinsAndOutlier) {
  fixtures::TempDir dir;
  dir.write("profile.csv", single_class_profile(fixtures::four_bin_profile()));
  ASSERT_EQ(run_cli(dir, "bin-profile --profile " + (dir / "profile.csv").string() + " --out " +
                             (dir / "bins.json").string())
                .code,
            0);
  const auto j = read_json(dir / "bins.json");
  const auto& cls = j["classes"][0];
  EXPECT_EQ(cls["class"], "A");
  EXPECT_EQ(cls["k"], 3);
  const auto centroids = cls["centroids"].get<std::vector<double>>();
  ASSERT_EQ(centroids.size(), 3u);
  EXPECT_NEAR(centroids[0], 0.89, 0.005);
  EXPECT_NEAR(centroids[1], 0.94, 0.005);
  EXPECT_NEAR(centroids[2], 1.06, 0.005);
  ASSERT_EQ(cls["outliers"].size(), 1u);
  EXPECT_EQ(cls["outliers"][0]["gpu_id"], 63);
  EXPECT_DOUBLE_EQ(cls["outliers"][0]["score"].get<double>(), 2.55);
  EXPECT_EQ(cls["gpus"].size(), 64u);
}

TEST(Cli, ConstantProfileGivesOneBin) {
  fixtures::TempDir dir;
  dir.write("profile.csv", single_class_profile(std::vector<double>(16, 1.0)));
  ASSERT_EQ(run_cli(dir, "bin-profile --profile " + (dir / "profile.csv").string() + " --out " +
                             (dir / "bins.json").string())
                .code,
            0);
  const auto j = read_json(dir / "bins.json");
  EXPECT_EQ(j["classes"][0]["k"], 1);
  EXPECT_TRUE(j["classes"][0]["outliers"].empty());
}

TEST(Cli, ConfigFileWithFlagOverride) {
  fixtures::TempDir dir;
  ASSERT_EQ(run_cli(dir, "gen-profile --gpus 64 --out " + (dir / "profile.csv").string()).code, 0);
  dir.write("config.json", json{{"trace_spec", "sia-like"},
                                {"profile", (dir / "profile.csv").string()},
                                {"l_across", 2.5},
                                {"placement", "pm-first"},
                                {"num_jobs", 30}}
                               .dump());
  ASSERT_EQ(run_cli(dir, "run --config " + (dir / "config.json").string() + " --l-across 1.2 --out " +
                             (dir / "out").string())
                .code,
            0);
  const auto s = read_json(dir / "out" / "summary.json");
  EXPECT_DOUBLE_EQ(s["config"]["l_across"].get<double>(), 1.2);
  EXPECT_EQ(s["config"]["placement"], "pm-first");
  EXPECT_EQ(s["metrics"]["all"]["jobs"], 30);

  dir.write("typo.json", R"({"l_acros": 2.0})");
  const auto r = run_cli(dir, "run --config " + (dir / "typo.json").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("l_acros"), std::string::npos) << r.err;
}

TEST(Cli, GenTraceWritesLoadableCsv) {
  fixtures::TempDir dir;
  ASSERT_EQ(run_cli(dir, "gen-trace --trace-spec synergy-like --num-jobs 50 --seed 4 --out " +
                             (dir / "t.csv").string())
                .code,
            0);
  const auto jobs = trace::load_trace(dir / "t.csv");
  EXPECT_EQ(jobs.size(), 50u);
  auto spec = trace::synergy_like_spec(10.0, 50, 4);
  EXPECT_EQ(jobs, trace::synthesize_trace(spec));
}

TEST(Cli, GuardedMapsExceptionsToExitCodes) {
  EXPECT_EQ(cli::guarded([] { return 0; }), 0);
  EXPECT_EQ(cli::guarded([]() -> int { throw InvariantViolation("boom"); }), 2);
  EXPECT_EQ(cli::guarded([]() -> int { throw std::invalid_argument("bad"); }), 1);
  EXPECT_EQ(cli::guarded([]() -> int { throw LoadError("file"); }), 1);
}

TEST(Cli, PerClassLocalityParsing) {
  EXPECT_EQ(cli::parse_per_class("A=1.7,C=1.2"), (cli::PerClass{1.7, std::nullopt, 1.2}));
  EXPECT_EQ(cli::parse_per_class("1.7,1.5"), (cli::PerClass{1.7, 1.5}));
  sim::SimConfig c;
  c.l_across = 1.4;
  c.l_across_per_class = cli::parse_per_class("A=1.7,C=1.2");
  EXPECT_DOUBLE_EQ(c.l_across_for(0), 1.7);
  EXPECT_DOUBLE_EQ(c.l_across_for(1), 1.4);
  EXPECT_DOUBLE_EQ(c.l_across_for(2), 1.2);
  EXPECT_NO_THROW(c.validate());
  const auto w = cli::parse_window("2000:3000");
  EXPECT_EQ(w.first, 2000);
  EXPECT_EQ(w.last, 3000);
  EXPECT_THROW(cli::parse_window("12"), std::invalid_argument);
}
