#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "vrts/inference.hpp"
#include "vrts/report.hpp"
#include "vrts/simenv.hpp"
#include "vrts/toy_policy.hpp"

namespace vrts::cli {

namespace fs = std::filesystem;

// Exit statuses; each error category maps to one.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitInput = 3,
  kExitTransport = 4,
};

// Maps the exception currently being handled to an exit code and prints a
// one-line diagnosis (every issue, for configuration errors).
int report_current_exception(std::ostream& err);

// Writes `contents` atomically and a `<path>.meta.json` sidecar recording
// the resolved config, its hash, the seed, the code version and the inputs.
// The timestamp lives only in the sidecar so primary outputs stay
// byte-identical across reruns.
void write_artifact(const fs::path& path, const std::string& contents, const RunConfig& config,
                    const std::string& command, const std::vector<fs::path>& inputs = {});

// The base model: seeded random initialization.
ToyPolicy initial_policy(const RunConfig& config);
ToyPolicy load_checkpoint(const fs::path& path);

struct InferenceHandle {
  std::unique_ptr<ToyPolicy> policy;
  std::unique_ptr<InferenceInterface> inference;
};

// Builds the configured inference. For "toy", `checkpoint` selects the
// weights; without one the base model is used.
InferenceHandle make_inference(const RunConfig& config,
                               const std::optional<fs::path>& checkpoint);

ContextBuilder training_context(const RunConfig& config);

struct GenDataOutputs {
  fs::path train;
  fs::path heldout;
};
GenDataOutputs cmd_gen_data(const RunConfig& config, std::ostream& log);

struct FilterOutputs {
  fs::path filtered;
  fs::path difficulty;
  std::size_t kept = 0;
};
FilterOutputs cmd_filter(const RunConfig& config, const fs::path& dataset,
                         const std::optional<fs::path>& checkpoint, std::ostream& log);

struct TrainOutputs {
  fs::path checkpoint;
  fs::path metrics;
  TrainingReport report;
};
TrainOutputs cmd_train(const RunConfig& config, const fs::path& dataset,
                       const std::optional<fs::path>& init, std::ostream& log);

struct InferOutputs {
  fs::path traces;
  EvalReport report;
};
InferOutputs cmd_infer(const RunConfig& config, const fs::path& dataset,
                       const std::optional<fs::path>& checkpoint,
                       const std::optional<fs::path>& output, std::ostream& log);

// Scores a trace file. When `dataset` is given, traces are checked against
// it (ids and ground truth must match).
EvalReport cmd_eval(const RunConfig& config, const fs::path& traces,
                    const std::optional<fs::path>& dataset, std::ostream& out);

TraceComparison cmd_compare(const RunConfig& config, const fs::path& traces_a,
                            const fs::path& traces_b, std::ostream& out);

// Collects training metrics and any number of trace files into a text
// report plus plot-ready series files.
void cmd_report(const RunConfig& config, const std::optional<fs::path>& metrics,
                const std::vector<fs::path>& traces, std::ostream& out);

}  // namespace vrts::cli
