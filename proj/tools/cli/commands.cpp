#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "vrts/backend.hpp"
#include "vrts/datafilter.hpp"
#include "vrts/dataset.hpp"
#include "vrts/frames.hpp"
#include "vrts/parallel.hpp"
#include "vrts/seed.hpp"
#include "vrts/trace_io.hpp"
#include "vrts/version.hpp"

namespace vrts::cli {
namespace {

class MissingInput : public Error {
 public:
  using Error::Error;
};

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw MissingInput(std::string(what) + " not found: " + path.string());
  }
}

std::string hex64(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

fs::path in_out_dir(const RunConfig& config, const std::string& name) {
  return fs::path(config.out_dir) / name;
}

std::vector<McqaSample> load_checked(const fs::path& path) {
  require_file(path, "dataset");
  auto samples = load_dataset(path);
  if (samples.empty()) throw MissingInput("dataset is empty: " + path.string());
  return samples;
}

std::vector<TtsTrace> load_trace_file(const fs::path& path) {
  require_file(path, "trace file");
  auto traces = load_traces(path);
  if (traces.empty()) throw MissingInput("trace file is empty: " + path.string());
  return traces;
}

std::string mode_label(const RunConfig& config) {
  if (config.infer.mode == "tts") return "tts";
  return "fixed_n" + std::to_string(config.infer.frames) + "_m" +
         std::to_string(config.infer.votes);
}

}  // namespace

int report_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "configuration error:\n";
    for (const auto& issue : e.issues()) err << "  " << issue << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const MissingInput& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const EndpointConfigError& e) {
    err << "endpoint error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const fs::filesystem_error& e) {
    err << "filesystem error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

void write_artifact(const fs::path& path, const std::string& contents, const RunConfig& config,
                    const std::string& command, const std::vector<fs::path>& inputs) {
  write_file_atomic(path, contents);
  Json meta;
  meta["artifact"] = path.filename().string();
  meta["command"] = command;
  meta["config"] = to_json(config);
  meta["config_hash"] = config_hash(config);
  meta["seed"] = config.seed;
  meta["code_version"] = std::string(kVersion);
  meta["content_hash"] = hex64(fnv1a64(contents));
  Json in = Json::object();
  for (const auto& input : inputs) in[input.string()] = hex64(fnv1a64(read_file(input)));
  meta["inputs"] = std::move(in);
  meta["created_at"] = utc_now();
  fs::path meta_path = path;
  meta_path += ".meta.json";
  write_file_atomic(meta_path, meta.dump(2) + "\n");
}

ToyPolicy initial_policy(const RunConfig& config) {
  return ToyPolicy::random(config.policy, derive_seed(config.seed, "init"), config.init_stddev);
}

ToyPolicy load_checkpoint(const fs::path& path) {
  require_file(path, "checkpoint");
  return parse_toy_checkpoint(read_file(path));
}

InferenceHandle make_inference(const RunConfig& config,
                               const std::optional<fs::path>& checkpoint) {
  InferenceHandle handle;
  if (config.inference == "toy") {
    handle.policy = std::make_unique<ToyPolicy>(checkpoint ? load_checkpoint(*checkpoint)
                                                           : initial_policy(config));
    handle.inference = std::make_unique<PolicyInference>(*handle.policy);
  } else if (config.inference == "backend") {
    handle.inference = std::make_unique<BackendInference>(config.backend);
  } else if (config.inference == "oracle") {
    handle.inference = std::make_unique<OracleInference>();
  } else {
    handle.inference = std::make_unique<UniformInference>();
  }
  return handle;
}

ContextBuilder training_context(const RunConfig& config) {
  const int frames = config.train_frames;
  const FrameSelection selection = config.frame_selection;
  return [frames, selection](const McqaSample& sample) {
    return PolicyContext{&sample, frame_indices(total_frames(sample.video), frames, selection)};
  };
}

GenDataOutputs cmd_gen_data(const RunConfig& config, std::ostream& log) {
  CorpusConfig train_cfg = config.corpus;
  train_cfg.id_prefix = "train";
  CorpusConfig eval_cfg = config.corpus;
  eval_cfg.id_prefix = "eval";
  eval_cfg.n_samples = config.n_eval;
  const auto train = generate_corpus(train_cfg, derive_seed(config.seed, "corpus.train"));
  const auto heldout = generate_corpus(eval_cfg, derive_seed(config.seed, "corpus.heldout"));

  GenDataOutputs out{in_out_dir(config, "train.jsonl"), in_out_dir(config, "heldout.jsonl")};
  write_artifact(out.train, serialize_dataset(train), config, "gen-data");
  write_artifact(out.heldout, serialize_dataset(heldout), config, "gen-data");
  log << "wrote " << train.size() << " training samples to " << out.train.string() << "\n"
      << "wrote " << heldout.size() << " held-out samples to " << out.heldout.string() << "\n";
  return out;
}

FilterOutputs cmd_filter(const RunConfig& config, const fs::path& dataset,
                         const std::optional<fs::path>& checkpoint, std::ostream& log) {
  const auto samples = load_checked(dataset);
  const InferenceHandle handle = make_inference(config, checkpoint);
  std::vector<DifficultyRecord> records(samples.size());
  const std::uint64_t seed = derive_seed(config.seed, "filter");
  parallel_for(samples.size(), config.jobs, [&](std::size_t i) {
    records[i] = estimate_difficulty(*handle.inference, samples[i], config.filter, seed);
  });
  auto kept = filter_dataset(records, samples);
  const std::size_t solvable = kept.size();
  const auto target = static_cast<std::size_t>(config.filter_target);
  if (target > 0 && kept.size() > target) {
    kept = balanced_subsample(kept, target, derive_seed(config.seed, "subsample"));
  }

  std::string difficulty;
  for (const auto& record : records) difficulty += difficulty_line(record) + "\n";
  std::vector<fs::path> inputs{dataset};
  if (checkpoint) inputs.push_back(*checkpoint);

  FilterOutputs out{in_out_dir(config, "filtered.jsonl"), in_out_dir(config, "difficulty.jsonl"),
                    kept.size()};
  write_artifact(out.filtered, serialize_dataset(kept), config, "filter", inputs);
  write_artifact(out.difficulty, difficulty, config, "filter", inputs);
  log << "kept " << solvable << " of " << samples.size()
      << " samples with rollout accuracy strictly between 0 and 1";
  if (kept.size() != solvable) log << "; subsampled to " << kept.size();
  log << "\nwrote " << out.filtered.string() << "\n";
  return out;
}

TrainOutputs cmd_train(const RunConfig& config, const fs::path& dataset,
                       const std::optional<fs::path>& init, std::ostream& log) {
  const auto samples = load_checked(dataset);
  ToyPolicy policy = init ? load_checkpoint(*init) : initial_policy(config);
  GrpoConfig grpo = config.grpo;
  grpo.jobs = config.jobs;

  TrainOutputs out;
  out.report = train(policy, samples, grpo, config.rewards, training_context(config),
                     derive_seed(config.seed, "train"),
                     [&log](const StepMetrics& m, const TrainablePolicy&) {
                       if (m.step % 10 == 0) {
                         log << "step " << m.step << "  reward " << m.mean_reward << "  acc "
                             << m.mean_accuracy_reward << "  kl " << m.mean_kl << "\n";
                       }
                     });

  std::string metrics;
  for (const auto& m : out.report.steps) metrics += metrics_line(m) + "\n";
  std::vector<fs::path> inputs{dataset};
  if (init) inputs.push_back(*init);
  out.checkpoint = in_out_dir(config, "checkpoint.json");
  out.metrics = in_out_dir(config, "metrics.jsonl");
  write_artifact(out.checkpoint, toy_checkpoint_json(policy, to_json(config).dump()), config,
                 "train", inputs);
  write_artifact(out.metrics, metrics, config, "train", inputs);
  log << "trained " << out.report.steps.size() << " steps; wrote " << out.checkpoint.string()
      << "\n";
  return out;
}

InferOutputs cmd_infer(const RunConfig& config, const fs::path& dataset,
                       const std::optional<fs::path>& checkpoint,
                       const std::optional<fs::path>& output, std::ostream& log) {
  const auto samples = load_checked(dataset);
  if (config.inference == "toy" && !checkpoint) {
    spdlog::warn("infer: no checkpoint given, using the untrained base model");
  }
  const InferenceHandle handle = make_inference(config, checkpoint);
  const EvalMode mode =
      config.infer.mode == "tts"
          ? EvalMode::adaptive(config.tts)
          : EvalMode::fixed(config.infer.frames, config.infer.votes, config.tts.schedule,
                            config.frame_selection);
  const EvalRun run =
      evaluate(*handle.inference, samples, mode, derive_seed(config.seed, "infer"), config.jobs);

  std::string text;
  for (const auto& trace : run.traces) text += trace_line(trace) + "\n";
  std::vector<fs::path> inputs{dataset};
  if (checkpoint) inputs.push_back(*checkpoint);
  InferOutputs out{output ? *output : in_out_dir(config, "traces_" + mode_label(config) + ".jsonl"),
                   run.report};
  write_artifact(out.traces, text, config, "infer", inputs);
  log << format_report_table(run.report, mode_label(config));
  log << "wrote " << out.traces.string() << "\n";
  if (run.report.n_errors > 0) {
    const auto failed = std::find_if(run.traces.begin(), run.traces.end(),
                                     [](const TtsTrace& t) { return !t.error.empty(); });
    if (static_cast<std::size_t>(run.report.n_errors) == run.traces.size()) {
      throw TransportError("every sample failed; first error: " + failed->error, 0);
    }
    spdlog::warn("infer: {} of {} samples failed; first error: {}", run.report.n_errors,
                 run.traces.size(), failed->error);
  }
  return out;
}

EvalReport cmd_eval(const RunConfig& config, const fs::path& traces_path,
                    const std::optional<fs::path>& dataset, std::ostream& out) {
  auto traces = load_trace_file(traces_path);
  std::vector<fs::path> inputs{traces_path};
  if (dataset) {
    const auto samples = load_checked(*dataset);
    std::map<std::string, const McqaSample*> by_id;
    for (const auto& s : samples) by_id[s.id] = &s;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto it = by_id.find(traces[i].sample_id);
      if (it == by_id.end()) {
        throw FormatError("trace for unknown sample '" + traces[i].sample_id + "'", i + 1,
                          "sample_id");
      }
      if (it->second->gt_answer != traces[i].gt_answer) {
        throw FormatError("trace ground truth disagrees with the dataset for '" +
                              traces[i].sample_id + "'",
                          i + 1, "gt_answer");
      }
      traces[i].difficulty = it->second->difficulty;
    }
    inputs.push_back(*dataset);
  }
  const EvalReport report = summarize(traces);
  out << format_report_table(report, traces_path.filename().string());
  const fs::path series =
      in_out_dir(config, "eval_" + traces_path.stem().string() + ".tsv");
  write_artifact(series, report_series(report), config, "eval", inputs);
  out << "wrote " << series.string() << "\n";
  return report;
}

TraceComparison cmd_compare(const RunConfig& config, const fs::path& traces_a,
                            const fs::path& traces_b, std::ostream& out) {
  const auto a = load_trace_file(traces_a);
  const auto b = load_trace_file(traces_b);
  const TraceComparison comparison = compare_traces(a, b);
  const std::string label_a = traces_a.stem().string();
  const std::string label_b = traces_b.stem().string();
  out << format_comparison_table(comparison, label_a, label_b);
  const fs::path series = in_out_dir(config, "compare_" + label_a + "_vs_" + label_b + ".tsv");
  write_artifact(series, comparison_series(comparison, label_a, label_b), config, "compare",
                 {traces_a, traces_b});
  out << "wrote " << series.string() << "\n";
  return comparison;
}

void cmd_report(const RunConfig& config, const std::optional<fs::path>& metrics,
                const std::vector<fs::path>& traces, std::ostream& out) {
  if (!metrics && traces.empty()) {
    throw ConfigError({"report: pass --metrics and/or at least one --traces file"});
  }
  std::ostringstream text;
  std::vector<fs::path> inputs;
  if (metrics) {
    require_file(*metrics, "metrics file");
    const auto steps = load_metrics(*metrics);
    std::ostringstream curve;
    curve << "step\tmean_reward\tmean_accuracy_reward\tmean_format_reward\tobjective\tmean_kl\t"
             "clip_fraction\tgrad_norm\tn_degenerate\n";
    for (const auto& m : steps) {
      curve << m.step << '\t' << m.mean_reward << '\t' << m.mean_accuracy_reward << '\t'
            << m.mean_format_reward << '\t' << m.objective << '\t' << m.mean_kl << '\t'
            << m.clip_fraction << '\t' << m.grad_norm << '\t' << m.n_degenerate << '\n';
    }
    write_artifact(in_out_dir(config, "training_curve.tsv"), curve.str(), config, "report",
                   {*metrics});
    text << "training: " << steps.size() << " steps";
    if (!steps.empty()) {
      text << ", accuracy reward " << steps.front().mean_accuracy_reward << " -> "
           << steps.back().mean_accuracy_reward;
    }
    text << "\n\n";
    inputs.push_back(*metrics);
  }

  std::ostringstream budget;
  budget << "run\tcount\taccuracy\tmean_frames\tmean_generations\n";
  std::ostringstream rounds;
  rounds << "run\tround\tbudget\tsamples_decided\n";
  for (const auto& path : traces) {
    const auto loaded = load_trace_file(path);
    const EvalReport report = summarize(loaded);
    const std::string label = path.stem().string();
    text << format_report_table(report, label) << "\n";
    budget << label << '\t' << report.overall.count << '\t' << report.overall.accuracy << '\t'
           << report.overall.mean_frames << '\t' << report.overall.mean_generations << '\n';
    std::map<std::size_t, std::pair<int, int>> decided;  // round -> (budget, count)
    for (const auto& trace : loaded) {
      if (trace.rounds.empty()) continue;
      auto& slot = decided[trace.rounds.size() - 1];
      slot.first = trace.rounds.back().budget;
      ++slot.second;
    }
    for (const auto& [round, entry] : decided) {
      rounds << label << '\t' << round << '\t' << entry.first << '\t' << entry.second << '\n';
    }
    inputs.push_back(path);
  }
  if (!traces.empty()) {
    write_artifact(in_out_dir(config, "accuracy_vs_frames.tsv"), budget.str(), config, "report",
                   inputs);
    write_artifact(in_out_dir(config, "rounds.tsv"), rounds.str(), config, "report", inputs);
  }
  write_artifact(in_out_dir(config, "report.txt"), text.str(), config, "report", inputs);
  out << text.str();
}

}  // namespace vrts::cli
