#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dsp/energy.hpp"
#include "dsp/generator.hpp"
#include "dsp/image.hpp"
#include "dsp/scores.hpp"

namespace dsp {

struct RunConfig {
  GeneratorConfig generator;
  EnergyConfig energy;
  ScoreConfig scores;
  int max_iterations = 2500;
  double learning_rate = 0.01;
  /// Score every n-th iteration (the first and last are always scored).
  int score_every = 1;
  /// Keep a frame every n-th iteration; 0 disables.
  int snapshot_every = 0;
  std::uint64_t seed = 0;
};

void validate(const RunConfig& config);

/// One optimization step. Score columns are NaN on unscored iterations;
/// mse_gt is NaN unless a ground truth was supplied.
struct TraceRow {
  int iteration = 0;
  double energy = 0.0;
  double rho = 0.0;
  double omega = 0.0;
  double delta = 0.0;
  double mse_gt = 0.0;
};

struct Frame {
  int iteration = 0;
  BinaryImage image;
};

struct ScoreTrace {
  std::vector<TraceRow> rows;
  /// Selection by minimum dissimilarity (first minimum wins).
  int best_iteration = 0;
  double best_delta = 0.0;
  BinaryImage best_output;
  /// Selection by minimum MSE against the ground truth; only filled when a
  /// ground truth was supplied.
  std::optional<int> oracle_iteration;
  double oracle_mse = 0.0;
  BinaryImage oracle_output;
  std::vector<Frame> frames;
};

struct CompletionResult {
  BinaryImage best_output;
  ScoreTrace trace;
};

/// Fits a fresh generator to `incomplete` for cfg.max_iterations steps of
/// forward -> energy -> backward -> ADAM and returns the binarized output of
/// the iteration with the lowest dissimilarity. Throws NonFiniteLoss if the
/// energy stops being finite and ConfigError for invalid settings or sizes
/// that are not multiples of 2^depth.
CompletionResult complete(const BinaryImage& incomplete, const RunConfig& config);

/// Same loop, but the returned output minimizes MSE against the ground
/// truth. The trace also carries the dissimilarity selection of the run.
CompletionResult complete_oracle_best(const BinaryImage& incomplete, const BinaryImage& ground_truth,
                                      const RunConfig& config);

/// Shared loop behind complete() and complete_oracle_best().
ScoreTrace fit(const BinaryImage& incomplete, const BinaryImage* ground_truth,
               const RunConfig& config);

/// gamma from an estimated gap fraction: 100 * gap.
double estimate_gamma(double gap_guess);

/// gamma when the ground truth is known: the overfit score of the ground
/// truth against the incomplete image.
double estimate_gamma(const BinaryImage& ground_truth, const BinaryImage& incomplete,
                      const ScoreConfig& config);

}  // namespace dsp
