// dsp: dataset generation, single-image contour completion and experiments.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsp/dataset.hpp"
#include "dsp/engine.hpp"
#include "dsp/errors.hpp"
#include "dsp/harness.hpp"
#include "dsp/image.hpp"
#include "dsp/metrics.hpp"
#include "dsp/run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw dsp::ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw dsp::ConfigError(path.string() + ": " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw dsp::ConfigError("config: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw dsp::ConfigError("config: unknown key '" + key + "'");
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw dsp::ConfigError(std::string("config: ") + key + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

dsp::RunConfig preset(const std::string& name) {
  if (name == "desk") return dsp::desk_scale_config();
  if (name == "paper") return dsp::RunConfig{};
  throw dsp::ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  fs::path config;
  std::string dataset = "simple";
  long long count = 9;
  long long size = 128;
  std::uint64_t seed = 0;
  fs::path out;
};

int cmd_generate(const GenerateArgs& flags, const CLI::App& sub) {
  GenerateArgs a;
  if (!flags.config.empty()) {
    const json j = read_json_file(flags.config);
    reject_unknown(j, {"dataset", "count", "size", "seed", "out"});
    take(j, "dataset", a.dataset);
    take(j, "count", a.count);
    take(j, "size", a.size);
    take(j, "seed", a.seed);
    std::string out;
    take(j, "out", out);
    a.out = out;
  }
  if (sub.count("--dataset")) a.dataset = flags.dataset;
  if (sub.count("--count")) a.count = flags.count;
  if (sub.count("--size")) a.size = flags.size;
  if (sub.count("--seed")) a.seed = flags.seed;
  if (sub.count("--out")) a.out = flags.out;

  const auto kind = dsp::parse_dataset_kind(a.dataset);
  if (!kind) throw UsageError("--dataset must be simple or complex");
  if (a.count < 1) throw UsageError("--count must be >= 1");
  if (a.size < 32) throw UsageError("--size must be >= 32");
  if (a.out.empty()) throw UsageError("--out is required");

  const auto samples = dsp::generate_dataset(*kind, static_cast<std::size_t>(a.count),
                                             static_cast<std::size_t>(a.size), a.seed);
  dsp::write_dataset(a.out, a.dataset, samples);
  write_json(a.out / a.dataset / "config.json", {{"dataset", a.dataset},
                                                 {"count", a.count},
                                                 {"size", a.size},
                                                 {"seed", a.seed},
                                                 {"out", a.out.string()}});
  std::cout << "wrote " << samples.size() << " samples to " << (a.out / a.dataset).string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- complete

struct CompleteArgs {
  fs::path config;
  std::string preset = "desk";
  fs::path input;
  fs::path gt;
  double alpha = 0.15;
  std::string gamma = "auto";
  double gap_guess = -1.0;
  int iters = 500;
  std::uint64_t seed = 0;
  fs::path out;
  int emit_frames = 0;
};

int cmd_complete(const CompleteArgs& flags, const CLI::App& sub) {
  CompleteArgs a;
  dsp::RunConfig run = preset(sub.count("--preset") ? flags.preset : a.preset);
  if (!flags.config.empty()) {
    const json j = read_json_file(flags.config);
    reject_unknown(j, {"run", "input", "gt", "gamma", "gap_guess", "emit_frames", "out", "padding"});
    if (j.contains("run")) run = dsp::run_config_from_json(j.at("run"), run);
    std::string input, gt, out;
    take(j, "input", input);
    take(j, "gt", gt);
    take(j, "out", out);
    a.input = input;
    a.gt = gt;
    a.out = out;
    if (j.contains("gamma")) {
      const auto& g = j.at("gamma");
      a.gamma = g.is_string() ? g.get<std::string>() : g.dump();
    }
    take(j, "gap_guess", a.gap_guess);
    take(j, "emit_frames", a.emit_frames);
  }
  if (sub.count("--input")) a.input = flags.input;
  if (sub.count("--gt")) a.gt = flags.gt;
  if (sub.count("--alpha")) run.energy.alpha = flags.alpha;
  if (sub.count("--gamma")) a.gamma = flags.gamma;
  if (sub.count("--gap-guess")) a.gap_guess = flags.gap_guess;
  if (sub.count("--iters")) run.max_iterations = flags.iters;
  if (sub.count("--seed")) run.seed = flags.seed;
  if (sub.count("--out")) a.out = flags.out;
  if (sub.count("--emit-frames")) a.emit_frames = flags.emit_frames;

  if (a.input.empty()) throw UsageError("--input is required");
  if (a.out.empty()) throw UsageError("--out is required");
  if (!fs::exists(a.input)) throw UsageError("input not found: " + a.input.string());
  if (!a.gt.empty() && !fs::exists(a.gt)) throw UsageError("ground truth not found: " + a.gt.string());
  if (a.emit_frames < 0) throw UsageError("--emit-frames must be >= 0");
  if (a.gap_guess > 1.0) throw UsageError("--gap-guess must lie in [0, 1]");

  const dsp::BinaryImage input = dsp::read_png(a.input).binarized(run.scores.binarize_threshold);
  std::optional<dsp::BinaryImage> gt;
  if (!a.gt.empty()) {
    gt = dsp::read_png(a.gt).binarized(run.scores.binarize_threshold);
    if (gt->height() != input.height() || gt->width() != input.width())
      throw UsageError("ground truth size differs from the input");
  }

  std::string gamma_source = "value";
  if (a.gamma == "auto") {
    if (gt) {
      run.scores.gamma = dsp::estimate_gamma(*gt, input, run.scores);
      gamma_source = "ground_truth";
    } else if (a.gap_guess >= 0.0) {
      run.scores.gamma = dsp::estimate_gamma(a.gap_guess);
      gamma_source = "gap_guess";
    } else {
      std::cerr << "warning: --gamma auto without --gt or --gap-guess; using gamma "
                << run.scores.gamma << '\n';
      gamma_source = "config";
    }
  } else {
    try {
      std::size_t used = 0;
      run.scores.gamma = std::stod(a.gamma, &used);
      if (used != a.gamma.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw UsageError("--gamma must be a number or 'auto', got '" + a.gamma + "'");
    }
  }
  if (a.emit_frames > 0) run.snapshot_every = std::max(1, run.max_iterations / a.emit_frames);
  dsp::validate(run);

  const std::size_t multiple = run.generator.size_multiple();
  const dsp::BinaryImage padded = dsp::pad_to_multiple(input, multiple);
  std::optional<dsp::BinaryImage> padded_gt;
  if (gt) padded_gt = dsp::pad_to_multiple(*gt, multiple);

  fs::create_directories(a.out);
  json echo{{"run", dsp::to_json(run)},
            {"input", a.input.string()},
            {"gamma", a.gamma == "auto" ? json("auto") : json(run.scores.gamma)},
            {"emit_frames", a.emit_frames},
            {"out", a.out.string()},
            {"padding",
             {{"height", input.height()},
              {"width", input.width()},
              {"padded_height", padded.height()},
              {"padded_width", padded.width()}}}};
  if (gt) echo["gt"] = a.gt.string();
  if (a.gap_guess >= 0.0) echo["gap_guess"] = a.gap_guess;
  write_json(a.out / "config.json", echo);

  const auto trace = dsp::fit(padded, padded_gt ? &*padded_gt : nullptr, run);
  const dsp::BinaryImage completed = dsp::crop(trace.best_output, input.height(), input.width());
  dsp::write_png(a.out / "completed.png", completed);
  dsp::write_trace_csv(a.out / "trace.csv", trace.rows, gt.has_value());

  if (a.emit_frames > 0 && !trace.frames.empty()) {
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(a.emit_frames), trace.frames.size());
    std::vector<dsp::BinaryImage> strip;
    fs::create_directories(a.out / "frames");
    for (std::size_t i = trace.frames.size() - keep; i < trace.frames.size(); ++i) {
      const auto& f = trace.frames[i];
      auto image = dsp::crop(f.image, input.height(), input.width());
      char name[32];
      std::snprintf(name, sizeof name, "frame_%05d.png", f.iteration);
      dsp::write_png(a.out / "frames" / name, image);
      strip.push_back(std::move(image));
    }
    dsp::write_png_strip(a.out / "frames_strip.png", strip);
  }

  if (gt) {
    write_json(a.out / "eval.json", {{"mse", dsp::mse(completed, *gt)},
                                     {"iou", dsp::iou(completed, *gt)},
                                     {"raw_mse", dsp::mse(input, *gt)},
                                     {"raw_iou", dsp::iou(input, *gt)},
                                     {"best_iteration", trace.best_iteration},
                                     {"best_delta", trace.best_delta},
                                     {"gamma", run.scores.gamma},
                                     {"gamma_source", gamma_source}});
  }
  std::cout << "best iteration " << trace.best_iteration << " (delta " << trace.best_delta
            << ", gamma " << run.scores.gamma << ")\n";
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  fs::path config;
  std::string preset = "desk";
  fs::path dataset;
  std::string experiment;
  fs::path out;
  std::vector<double> alphas{0.0, 0.05, 0.15, 0.5, 0.95, 1.0};
  std::string gamma_policy = "dataset_gap";
  int iters = 0;
  long long limit = 0;
  std::size_t workers = 0;
  dsp::RfOptions rf;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

int cmd_eval(const EvalArgs& flags, const CLI::App& sub, const std::string& alphas_text) {
  EvalArgs a;
  dsp::RunConfig run = preset(sub.count("--preset") ? flags.preset : a.preset);
  if (!flags.config.empty()) {
    const json j = read_json_file(flags.config);
    reject_unknown(j, {"run", "dataset", "experiment", "out", "alphas", "gamma_policy", "limit",
                       "workers", "rf"});
    if (j.contains("run")) run = dsp::run_config_from_json(j.at("run"), run);
    std::string dataset, out;
    take(j, "dataset", dataset);
    take(j, "out", out);
    a.dataset = dataset;
    a.out = out;
    take(j, "experiment", a.experiment);
    take(j, "alphas", a.alphas);
    take(j, "gamma_policy", a.gamma_policy);
    take(j, "limit", a.limit);
    take(j, "workers", a.workers);
    if (j.contains("rf")) {
      const auto& r = j.at("rf");
      reject_unknown(r, {"kernels", "gaps", "trials", "canvas", "seed"});
      take(r, "kernels", a.rf.kernels);
      take(r, "gaps", a.rf.gap_lengths);
      take(r, "trials", a.rf.trials);
      take(r, "canvas", a.rf.canvas);
      take(r, "seed", a.rf.seed);
    }
  }
  if (sub.count("--dataset")) a.dataset = flags.dataset;
  if (sub.count("--experiment")) a.experiment = flags.experiment;
  if (sub.count("--out")) a.out = flags.out;
  if (sub.count("--alphas")) a.alphas = parse_list(alphas_text);
  if (sub.count("--gamma-policy")) a.gamma_policy = flags.gamma_policy;
  if (sub.count("--iters")) run.max_iterations = flags.iters;
  if (sub.count("--limit")) a.limit = flags.limit;
  if (sub.count("--workers")) a.workers = flags.workers;
  if (sub.count("--rf-trials")) a.rf.trials = flags.rf.trials;
  if (sub.count("--rf-canvas")) a.rf.canvas = flags.rf.canvas;

  if (a.out.empty()) throw UsageError("--out is required");
  if (a.limit < 0) throw UsageError("--limit must be >= 0");
  const auto policy = dsp::parse_gamma_policy(a.gamma_policy);
  if (!policy) throw UsageError("--gamma-policy must be dataset_gap, ground_truth or fixed");
  const bool needs_dataset = a.experiment != "rf";
  if (a.experiment != "comparison" && a.experiment != "alpha" && a.experiment != "correlation" &&
      a.experiment != "rf")
    throw UsageError("--experiment must be comparison, alpha, correlation or rf");
  dsp::validate(run);
  dsp::HarnessOptions options{*policy, dsp::worker_count(a.workers)};

  std::vector<dsp::DatasetSample> samples;
  if (needs_dataset) {
    if (a.dataset.empty()) throw UsageError("--dataset is required");
    if (!fs::exists(a.dataset / "manifest.json"))
      throw UsageError("no manifest.json in " + a.dataset.string());
    samples = dsp::load_dataset(a.dataset);
    if (a.limit > 0 && static_cast<std::size_t>(a.limit) < samples.size())
      samples.resize(static_cast<std::size_t>(a.limit));
  }

  fs::create_directories(a.out);
  write_json(a.out / "config.json",
             {{"run", dsp::to_json(run)},
              {"dataset", a.dataset.string()},
              {"experiment", a.experiment},
              {"out", a.out.string()},
              {"alphas", a.alphas},
              {"gamma_policy", a.gamma_policy},
              {"limit", a.limit},
              {"workers", options.workers},
              {"rf",
               {{"kernels", a.rf.kernels},
                {"gaps", a.rf.gap_lengths},
                {"trials", a.rf.trials},
                {"canvas", a.rf.canvas},
                {"seed", a.rf.seed}}}});

  if (a.experiment == "comparison") {
    const auto report = dsp::run_comparison(samples, run, options);
    dsp::write_comparison_csv(a.out / "comparison.csv", report.records);
    dsp::write_summary_json(a.out / "summary.json", report);
    for (const auto& s : report.summary)
      std::cout << dsp::to_string(s.method) << ": mse " << s.mse << " iou " << s.iou
                << " best_iteration " << s.best_iteration << " (n=" << s.n << ")\n";
    for (const auto& f : report.failures) std::cerr << "failed " << f.id << ": " << f.message << '\n';
    return report.failures.empty() ? 0 : kRuntimeFailure;
  }
  if (a.experiment == "alpha") {
    const auto records = dsp::sweep_alpha(samples, a.alphas, run, options);
    dsp::write_alpha_csv(a.out / "alpha_sweep.csv", records);
    for (const auto& r : records)
      std::cout << "alpha " << r.value << ": mse " << r.mse << " iou " << r.iou << '\n';
    return 0;
  }
  if (a.experiment == "correlation") {
    const auto result = dsp::gamma_gap_correlation(samples, run.scores);
    dsp::write_correlation_json(a.out / "correlation.json", result);
    std::cout << "pearson_r " << result.pearson_r << " over " << result.n << " samples; rho=100 on "
              << result.full_reconstruction << '\n';
    return 0;
  }
  const auto cells = dsp::sweep_receptive_field(a.rf, run, options);
  dsp::write_rf_csv(a.out / "rf_sweep.csv", cells);
  for (const auto& c : cells)
    std::cout << "kernel " << c.kernel << " gap " << c.gap << ": " << c.success_rate() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-image contour completion with an untrained generator prior"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a procedural shape dataset");
  generate->add_option("--config", gen.config, "JSON config");
  generate->add_option("--dataset", gen.dataset, "simple or complex");
  generate->add_option("--count", gen.count, "Number of samples");
  generate->add_option("--size", gen.size, "Canvas side in pixels");
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--out", gen.out, "Output root");

  CompleteArgs comp;
  auto* complete = app.add_subcommand("complete", "Complete the contours of one image");
  complete->add_option("--config", comp.config, "JSON config");
  complete->add_option("--preset", comp.preset, "desk (default) or paper network size");
  complete->add_option("--input", comp.input, "Incomplete image (PNG)");
  complete->add_option("--gt", comp.gt, "Ground truth (PNG), enables eval.json");
  complete->add_option("--alpha", comp.alpha, "Fill-in weight");
  complete->add_option("--gamma", comp.gamma, "Target overfit score or 'auto'");
  complete->add_option("--gap-guess", comp.gap_guess, "Estimated gap fraction for --gamma auto");
  complete->add_option("--iters", comp.iters, "Iterations");
  complete->add_option("--seed", comp.seed, "Random seed");
  complete->add_option("--out", comp.out, "Output directory");
  complete->add_option("--emit-frames", comp.emit_frames, "Write this many evenly spaced frames");

  EvalArgs ev;
  std::string alphas_text;
  auto* eval = app.add_subcommand("eval", "Run an experiment over a dataset");
  eval->add_option("--config", ev.config, "JSON config");
  eval->add_option("--preset", ev.preset, "desk (default) or paper network size");
  eval->add_option("--dataset", ev.dataset, "Dataset directory (holding manifest.json)");
  eval->add_option("--experiment", ev.experiment, "comparison, alpha, correlation or rf");
  eval->add_option("--out", ev.out, "Output directory");
  eval->add_option("--alphas", alphas_text, "Comma-separated alphas");
  eval->add_option("--gamma-policy", ev.gamma_policy, "dataset_gap, ground_truth or fixed");
  eval->add_option("--iters", ev.iters, "Iterations per run");
  eval->add_option("--limit", ev.limit, "Use only the first N samples");
  eval->add_option("--workers", ev.workers, "Worker pool size (default $DSP_WORKERS)");
  eval->add_option("--rf-trials", ev.rf.trials, "Trials per receptive-field cell");
  eval->add_option("--rf-canvas", ev.rf.canvas, "Canvas for the receptive-field study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*generate) return cmd_generate(gen, *generate);
    if (*complete) return cmd_complete(comp, *complete);
    return cmd_eval(ev, *eval, alphas_text);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const dsp::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const dsp::NonFiniteLoss& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}
