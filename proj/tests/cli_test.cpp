#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "run_config.hpp"
#include "test_util.hpp"
#include "vrts/trace_io.hpp"

namespace vrts::cli {
namespace {

TEST(RunConfig, DefaultsResolve) {
  const RunConfig c = resolve_config(Json::object());
  EXPECT_EQ(c.grpo.group_size, 8);
  EXPECT_EQ(c.tts.m, 5);
  EXPECT_EQ(c.filter.k, 8);
  EXPECT_EQ(c.policy.n_options, c.corpus.n_options);
}

TEST(RunConfig, OverridesWinOverFile) {
  const Json file = {{"seed", 3}, {"grpo", {{"group_size", 4}, {"learning_rate", 0.5}}}};
  const RunConfig c =
      resolve_config(file, {parse_set_flag("grpo.group_size=6"), parse_set_flag("seed=9")});
  EXPECT_EQ(c.grpo.group_size, 6);
  EXPECT_DOUBLE_EQ(c.grpo.learning_rate, 0.5);
  EXPECT_EQ(c.seed, 9u);
}

TEST(RunConfig, SetFlagParsing) {
  EXPECT_EQ(parse_set_flag("a.b=3").second, Json(3));
  EXPECT_EQ(parse_set_flag("inference=oracle").second, Json("oracle"));
  EXPECT_EQ(parse_set_flag("x=[1,2]").second, Json::array({1, 2}));
  EXPECT_THROW(parse_set_flag("novalue"), ConfigError);
}

TEST(RunConfig, ReportsEveryIssue) {
  const Json file = {{"grpo", {{"group_size", 1}, {"bogus", true}}},
                     {"tts", {{"m", "five"}}},
                     {"typo_key", 1}};
  try {
    resolve_config(file, {parse_set_flag("backend.timeout_ms=0")});
    FAIL();
  } catch (const ConfigError& e) {
    const auto& issues = e.issues();
    auto mentions = [&](const std::string& s) {
      return std::any_of(issues.begin(), issues.end(),
                         [&](const std::string& i) { return i.find(s) != std::string::npos; });
    };
    EXPECT_TRUE(mentions("grpo.group_size"));
    EXPECT_TRUE(mentions("grpo.bogus"));
    EXPECT_TRUE(mentions("tts.m"));
    EXPECT_TRUE(mentions("typo_key"));
    EXPECT_TRUE(mentions("timeout"));
  }
}

TEST(RunConfig, EchoHasNoSecretAndHashIsStable) {
  ::setenv("VRTS_API_KEY", "sk-hidden", 1);
  const RunConfig c = resolve_config(Json::object());
  ::unsetenv("VRTS_API_KEY");
  EXPECT_EQ(c.backend.api_key, "sk-hidden");
  EXPECT_EQ(to_json(c).dump().find("sk-hidden"), std::string::npos);
  EXPECT_EQ(config_hash(c), config_hash(resolve_config(Json::object())));
  EXPECT_EQ(config_hash(c).size(), 16u);
  EXPECT_NE(config_hash(c), config_hash(resolve_config({{"seed", 1}})));
  // The echo is itself a valid config file.
  EXPECT_EQ(to_json(resolve_config(to_json(c))), to_json(c));
}

RunConfig small_config(const std::filesystem::path& out) {
  return resolve_config({{"seed", 5},
                         {"out_dir", out.string()},
                         {"corpus", {{"n_samples", 120}, {"n_eval", 60}}},
                         {"filter", {{"target_size", 80}}},
                         {"grpo", {{"max_steps", 6}, {"batch_size", 8}}},
                         {"jobs", 2}});
}

std::map<std::string, std::string> primary_outputs(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.ends_with(".meta.json")) continue;
    out[name] = read_file(e.path());
  }
  return out;
}

void run_pipeline(const RunConfig& config) {
  std::ostringstream log;
  const auto data = cmd_gen_data(config, log);
  const auto filtered = cmd_filter(config, data.train, std::nullopt, log);
  const auto trained = cmd_train(config, filtered.filtered, std::nullopt, log);
  const auto tts = cmd_infer(config, data.heldout, trained.checkpoint, std::nullopt, log);
  RunConfig fixed = config;
  fixed.infer.mode = "fixed";
  const auto sparse = cmd_infer(fixed, data.heldout, trained.checkpoint, std::nullopt, log);
  cmd_eval(config, tts.traces, data.heldout, log);
  cmd_compare(config, sparse.traces, tts.traces, log);
  cmd_report(config, trained.metrics, {sparse.traces, tts.traces}, log);
}

TEST(Pipeline, EndToEndIsReproducible) {
  testing::TempDir a;
  testing::TempDir b;
  run_pipeline(small_config(a.path()));
  run_pipeline(small_config(b.path()));
  const auto out_a = primary_outputs(a.path());
  const auto out_b = primary_outputs(b.path());
  for (const char* name :
       {"train.jsonl", "heldout.jsonl", "filtered.jsonl", "difficulty.jsonl", "metrics.jsonl",
        "traces_tts.jsonl", "traces_fixed_n32_m5.jsonl", "report.txt", "training_curve.tsv"}) {
    ASSERT_TRUE(out_a.count(name)) << name;
    EXPECT_FALSE(out_a.at(name).empty()) << name;
    EXPECT_TRUE(std::filesystem::exists(a.path() / (std::string(name) + ".meta.json"))) << name;
  }
  // The checkpoint echoes out_dir, which differs between the two runs.
  for (const auto& [name, contents] : out_a) {
    if (name == "checkpoint.json") continue;
    EXPECT_EQ(contents, out_b.at(name)) << name;
  }
  EXPECT_EQ(load_metrics(a.path() / "metrics.jsonl").size(), 6u);
  const Json meta = Json::parse(read_file(a.path() / "train.jsonl.meta.json"));
  EXPECT_EQ(meta["config_hash"], config_hash(small_config(a.path())));
  EXPECT_TRUE(meta.contains("created_at"));
}

TEST(Pipeline, RerunIntoSameDirectoryIsByteIdentical) {
  testing::TempDir dir;
  const RunConfig config = small_config(dir.path());
  run_pipeline(config);
  const auto first = primary_outputs(dir.path());
  run_pipeline(config);
  EXPECT_EQ(primary_outputs(dir.path()), first);
}

TEST(Pipeline, EvalRejectsMismatchedDataset) {
  testing::TempDir dir;
  RunConfig config = small_config(dir.path());
  config.inference = "oracle";
  std::ostringstream log;
  const auto data = cmd_gen_data(config, log);
  const auto run = cmd_infer(config, data.heldout, std::nullopt, std::nullopt, log);
  EXPECT_THROW(cmd_eval(config, run.traces, data.train, log), Error);
  EXPECT_DOUBLE_EQ(cmd_eval(config, run.traces, data.heldout, log).overall.accuracy, 1.0);
}

int run_binary(const std::string& args, std::string* output = nullptr) {
  testing::TempDir dir;
  const std::string capture = (dir / "out.txt").string();
  const std::string cmd = std::string(VRTS_CLI_PATH) + " " + args + " > " + capture + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) *output = read_file(capture);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Binary, ExitCodes) {
  std::string out;
  EXPECT_EQ(run_binary("show-config --set tts.m=3", &out), kExitOk);
  EXPECT_NE(out.find("\"m\": 3"), std::string::npos);
  EXPECT_EQ(run_binary("show-config --set grpo.group_size=1 --set nope=2", &out), kExitConfig);
  EXPECT_NE(out.find("grpo.group_size"), std::string::npos);
  EXPECT_NE(out.find("nope"), std::string::npos);
  EXPECT_EQ(run_binary("eval -t /nonexistent/traces.jsonl"), kExitInput);
}

TEST(Binary, TransportFailureExitCode) {
  testing::TempDir dir;
  std::ostringstream log;
  RunConfig config = small_config(dir.path());
  cmd_gen_data(config, log);
  const std::string args = "infer -d " + (dir / "heldout.jsonl").string() + " -o " +
                           dir.path().string() +
                           " --inference backend --set backend.base_url=\\\"http://127.0.0.1:1/v1\\\""
                           " --set backend.max_retries=0 --set backend.timeout_ms=200";
  EXPECT_EQ(run_binary(args), kExitTransport);
}

}  // namespace
}  // namespace vrts::cli
