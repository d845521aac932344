#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsp/dataset.hpp"
#include "dsp/engine.hpp"

namespace dsp {

enum class Method { Raw, Dip, Dsp };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

struct EvalRecord {
  std::string id;
  Method method = Method::Raw;
  double mse = 0.0;  // 0-255 scale
  double iou = 0.0;
  int best_iteration = 0;
  double wall_time_s = 0.0;

  bool operator==(const EvalRecord&) const = default;
};

struct MethodSummary {
  Method method = Method::Raw;
  std::size_t n = 0;
  double mse = 0.0;
  double iou = 0.0;
  double best_iteration = 0.0;
  double median_best_iteration = 0.0;
  double wall_time_s = 0.0;
};

struct SampleFailure {
  std::string id;
  std::string message;
};

struct ComparisonReport {
  std::vector<EvalRecord> records;  // sample order, then RAW, DIP, DSP
  std::vector<MethodSummary> summary;
  std::vector<SampleFailure> failures;
};

/// How gamma is chosen for a DSP run in the harness.
enum class GammaPolicy {
  DatasetMeanGap,  // 100 * mean gap over the evaluated samples
  GroundTruth,     // overfit score of each sample's ground truth
  Fixed,           // config.scores.gamma as given
};

std::string_view to_string(GammaPolicy policy);
std::optional<GammaPolicy> parse_gamma_policy(std::string_view name);

struct HarnessOptions {
  GammaPolicy gamma = GammaPolicy::DatasetMeanGap;
  /// 0 picks DSP_WORKERS from the environment, else the hardware count.
  std::size_t workers = 0;
};

/// Worker-pool size: `requested` if non-zero, else $DSP_WORKERS, else the
/// number of hardware threads. Throws ConfigError for a malformed variable.
std::size_t worker_count(std::size_t requested = 0);

/// Runs fn(0..n-1) on a bounded pool. Kernels inside a worker run
/// single-threaded when more than one worker is used. The first exception
/// is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Per sample: RAW (degraded vs ground truth), DIP (self-mask energy,
/// lowest-MSE iteration) and DSP (lowest-dissimilarity iteration). A
/// failing sample is reported in `failures` and left out of the summary.
ComparisonReport run_comparison(std::span<const DatasetSample> samples, const RunConfig& config,
                                const HarnessOptions& options = {});

std::vector<MethodSummary> summarize(std::span<const EvalRecord> records);

struct SweepRecord {
  double value = 0.0;  // alpha
  double mse = 0.0;
  double iou = 0.0;
  double iterations = 0.0;  // mean best iteration
  double time = 0.0;        // mean wall time per run, seconds
  std::size_t n = 0;

  bool operator==(const SweepRecord&) const = default;
};

/// DSP runs over every (sample, alpha) pair, aggregated per alpha.
std::vector<SweepRecord> sweep_alpha(std::span<const DatasetSample> samples,
                                     std::span<const double> alphas, const RunConfig& config,
                                     const HarnessOptions& options = {});

struct CorrelationResult {
  double pearson_r = 0.0;
  std::size_t n = 0;
  /// Samples where rho(gt, degraded) is exactly 100.
  std::size_t full_reconstruction = 0;
  double min_rho = 100.0;
};

/// Pearson correlation between omega(gt, degraded) and the gap fraction.
/// Throws std::invalid_argument with fewer than two samples.
CorrelationResult gamma_gap_correlation(std::span<const DatasetSample> samples,
                                        const ScoreConfig& config = {});

double pearson(std::span<const double> x, std::span<const double> y);

struct RfOptions {
  std::vector<int> kernels{3, 5, 7};
  std::vector<int> gap_lengths{4, 8, 12};
  int trials = 10;
  std::size_t canvas = 64;
  std::uint64_t seed = 7;
};

struct RfCell {
  int kernel = 0;
  int gap = 0;
  int successes = 0;
  int trials = 0;

  double success_rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / trials; }
  bool operator==(const RfCell&) const = default;
};

/// 3x3 dilation of the dark set.
BinaryImage dilate(const BinaryImage& image, float threshold = 0.5f);

/// A completion succeeds when IoU(output, gt) >= 0.9 * IoU(gt, dilate(gt))
/// and every gap region has at least half of its pixels within
/// match_radius of an output contour point.
bool completion_succeeded(const BinaryImage& output, const BinaryImage& ground_truth,
                          std::span<const std::vector<PixelPoint>> gaps, double match_radius);

/// For every gap length, `trials` Simple shapes with one gap of that length;
/// each shape is completed with every kernel size on the main convs.
std::vector<RfCell> sweep_receptive_field(const RfOptions& rf, const RunConfig& config,
                                          const HarnessOptions& options = {});

void write_comparison_csv(const std::filesystem::path& path, std::span<const EvalRecord> records);
std::vector<EvalRecord> read_comparison_csv(const std::filesystem::path& path);
void write_summary_json(const std::filesystem::path& path, const ComparisonReport& report);

void write_alpha_csv(const std::filesystem::path& path, std::span<const SweepRecord> records);
std::vector<SweepRecord> read_alpha_csv(const std::filesystem::path& path);

void write_rf_csv(const std::filesystem::path& path, std::span<const RfCell> cells);
std::vector<RfCell> read_rf_csv(const std::filesystem::path& path);

void write_correlation_json(const std::filesystem::path& path, const CorrelationResult& result);
CorrelationResult read_correlation_json(const std::filesystem::path& path);

/// iteration,energy,rho,omega,delta[,mse_gt]; NaN cells are left empty.
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows, bool with_mse);

}  // namespace dsp
