#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "commands.hpp"
#include "vrts/version.hpp"

namespace {

using vrts::cli::Json;
using vrts::cli::Override;

// Flags bound to config paths; only flags the user actually passed override.
class FlagTable {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& path,
                   const std::string& help) {
    auto holder = std::make_shared<std::optional<T>>();
    holders_.push_back([holder, path](std::vector<Override>& out) {
      if (*holder) out.emplace_back(path, Json(**holder));
    });
    return app->add_option(name, *holder, help + " [" + path + "]");
  }

  void collect(std::vector<Override>& out) const {
    for (const auto& h : holders_) h(out);
  }

 private:
  std::vector<std::function<void(std::vector<Override>&)>> holders_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reinforced video reasoning with sparse-to-dense test-time scaling"};
  app.set_version_flag("--version", std::string(vrts::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  std::string log_level = "info";
  FlagTable flags;
  app.add_option("-c,--config", config_path, "JSON config file (flags win over it)");
  app.add_option("--set", sets, "Override any config field: path=value (repeatable)");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");
  flags.add<std::uint64_t>(&app, "--seed", "seed", "Master seed");
  flags.add<std::string>(&app, "-o,--out", "out_dir", "Output directory");
  flags.add<int>(&app, "-j,--jobs", "jobs", "Parallel workers");

  std::optional<std::string> dataset, checkpoint, init, output, metrics, traces_a, traces_b;
  std::vector<std::string> traces;

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic training and held-out sets");
  flags.add<int>(gen, "--n-samples", "corpus.n_samples", "Training samples");
  flags.add<int>(gen, "--n-eval", "corpus.n_eval", "Held-out samples");
  flags.add<double>(gen, "--hard-fraction", "corpus.hard_fraction", "Share of hard samples");

  auto* filter = app.add_subcommand("filter", "Drop samples the base model always or never solves");
  filter->add_option("-d,--dataset", dataset, "Dataset to filter")->required();
  filter->add_option("--checkpoint", checkpoint, "Policy checkpoint (default: base model)");
  flags.add<std::string>(filter, "--inference", "inference", "toy, backend, oracle or uniform");
  flags.add<int>(filter, "--rollouts", "filter.k", "Rollouts per sample");
  flags.add<int>(filter, "--target", "filter.target_size", "Balanced subsample size (0 = all)");

  auto* train = app.add_subcommand("train", "GRPO training of the toy policy");
  train->add_option("-d,--dataset", dataset, "Training dataset")->required();
  train->add_option("--init", init, "Start from this checkpoint");
  flags.add<int>(train, "--steps", "grpo.max_steps", "Step cap (0 = all batches)");
  flags.add<int>(train, "--epochs", "grpo.epochs", "Passes over the dataset");
  flags.add<double>(train, "--lr", "grpo.learning_rate", "Learning rate");

  auto* infer = app.add_subcommand("infer", "Run inference and write traces");
  infer->add_option("-d,--dataset", dataset, "Dataset to answer")->required();
  infer->add_option("--checkpoint", checkpoint, "Policy checkpoint");
  infer->add_option("--output", output, "Trace file (default: <out>/traces_<mode>.jsonl)");
  flags.add<std::string>(infer, "--inference", "inference", "toy, backend, oracle or uniform");
  flags.add<std::string>(infer, "--mode", "infer.mode", "tts or fixed");
  flags.add<int>(infer, "--frames", "infer.frames", "Frame budget in fixed mode");
  std::optional<int> votes;
  infer->add_option("--votes", votes, "Samples per round [infer.votes, tts.m]");
  flags.add<int>(infer, "--n-init", "tts.n_init", "Initial TTS frame budget");
  flags.add<int>(infer, "--n-max", "tts.n_max", "Maximum TTS frame budget");

  auto* eval = app.add_subcommand("eval", "Score a trace file");
  std::string eval_traces;
  eval->add_option("-t,--traces", eval_traces, "Trace file")->required();
  eval->add_option("-d,--dataset", dataset, "Dataset to check the traces against");

  auto* compare = app.add_subcommand("compare", "Delta table between two trace files");
  compare->add_option("a", traces_a, "Baseline traces")->required();
  compare->add_option("b", traces_b, "Compared traces")->required();

  auto* report = app.add_subcommand("report", "Text report and plot series");
  report->add_option("--metrics", metrics, "Training metrics file");
  report->add_option("-t,--traces", traces, "Trace files (repeatable)");

  auto* show = app.add_subcommand("show-config", "Print the resolved configuration");

  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::from_str(log_level));
  try {
    std::vector<Override> overrides;
    for (const auto& s : sets) overrides.push_back(vrts::cli::parse_set_flag(s));
    flags.collect(overrides);
    if (votes) {
      overrides.emplace_back("infer.votes", *votes);
      overrides.emplace_back("tts.m", *votes);
    }
    const Json file = config_path.empty() ? Json::object()
                                          : vrts::cli::load_config_file(config_path);
    const auto config = vrts::cli::resolve_config(file, overrides);

    namespace cli = vrts::cli;
    if (gen->parsed()) {
      cli::cmd_gen_data(config, std::cout);
    } else if (filter->parsed()) {
      cli::cmd_filter(config, *dataset, checkpoint, std::cout);
    } else if (train->parsed()) {
      cli::cmd_train(config, *dataset, init, std::cout);
    } else if (infer->parsed()) {
      std::optional<cli::fs::path> out;
      if (output) out = *output;
      std::optional<cli::fs::path> ckpt;
      if (checkpoint) ckpt = *checkpoint;
      cli::cmd_infer(config, *dataset, ckpt, out, std::cout);
    } else if (eval->parsed()) {
      std::optional<cli::fs::path> ds;
      if (dataset) ds = *dataset;
      cli::cmd_eval(config, eval_traces, ds, std::cout);
    } else if (compare->parsed()) {
      cli::cmd_compare(config, *traces_a, *traces_b, std::cout);
    } else if (report->parsed()) {
      std::optional<cli::fs::path> m;
      if (metrics) m = *metrics;
      cli::cmd_report(config, m, {traces.begin(), traces.end()}, std::cout);
    } else if (show->parsed()) {
      std::cout << cli::to_json(config).dump(2) << "\n";
    }
  } catch (...) {
    return vrts::cli::report_current_exception(std::cerr);
  }
  return vrts::cli::kExitOk;
}
