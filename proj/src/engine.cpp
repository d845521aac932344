#include "dsp/engine.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dsp/adam.hpp"
#include "dsp/errors.hpp"
#include "dsp/metrics.hpp"
#include "dsp/random.hpp"

namespace dsp {

void validate(const RunConfig& config) {
  validate(config.generator);
  validate(config.energy);
  validate(config.scores);
  if (config.max_iterations < 1) throw ConfigError("run: max_iterations must be >= 1");
  if (!(config.learning_rate > 0.0)) throw ConfigError("run: learning_rate must be > 0");
  if (config.score_every < 1) throw ConfigError("run: score_every must be >= 1");
  if (config.snapshot_every < 0) throw ConfigError("run: snapshot_every must be >= 0");
}

ScoreTrace fit(const BinaryImage& incomplete, const BinaryImage* ground_truth,
               const RunConfig& config) {
  validate(config);
  const std::size_t multiple = config.generator.size_multiple();
  if (incomplete.empty() || incomplete.height() % multiple != 0 ||
      incomplete.width() % multiple != 0) {
    throw ConfigError("run: image " + std::to_string(incomplete.height()) + "x" +
                      std::to_string(incomplete.width()) + " is not a multiple of " +
                      std::to_string(multiple));
  }
  if (ground_truth && (ground_truth->height() != incomplete.height() ||
                       ground_truth->width() != incomplete.width())) {
    throw ConfigError("run: ground truth size differs from the input");
  }

  // Separate streams so the noise does not depend on the parameter count.
  Rng seeds(config.seed);
  auto params = init_generator<float>(config.generator, seeds.fork());
  const auto noise = make_noise<float>(static_cast<std::size_t>(config.generator.noise_channels),
                                       incomplete.height(), incomplete.width(), seeds.fork(),
                                       multiple);
  const auto target =
      to_tensor<float>(incomplete, static_cast<std::size_t>(config.generator.output_channels));
  const PointSet target_points = extract_points(incomplete, config.scores.binarize_threshold);

  auto tensors = params.tensors();
  AdamState adam;
  adam.options.learning_rate = config.learning_rate;

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  ScoreTrace trace;
  trace.rows.reserve(static_cast<std::size_t>(config.max_iterations));
  trace.best_delta = std::numeric_limits<double>::infinity();
  trace.oracle_mse = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= config.max_iterations; ++it) {
    for (auto& t : tensors) t.zero_grad();
    const auto output = forward(params, noise);
    const auto loss = energy(config.energy, output, target);
    const double value = loss.item();
    if (!std::isfinite(value)) throw NonFiniteLoss(it, value);

    TraceRow row{it, value, kNaN, kNaN, kNaN, kNaN};
    const bool scored = (it - 1) % config.score_every == 0 || it == config.max_iterations;
    const bool snapshot = config.snapshot_every > 0 && it % config.snapshot_every == 0;
    if (scored || snapshot) {
      BinaryImage image = from_tensor(output).binarized(config.scores.binarize_threshold);
      if (scored) {
        const PointSet points = extract_points(image, 0.5f);
        row.rho = reconstruction_score(points, target_points, config.scores.match_radius);
        row.omega = overfit_score(points, target_points, config.scores.match_radius);
        row.delta = dissimilarity(row.rho, row.omega, config.scores.gamma);
        if (row.delta < trace.best_delta) {
          trace.best_delta = row.delta;
          trace.best_iteration = it;
          trace.best_output = image;
        }
        if (ground_truth) {
          row.mse_gt = mse(image, *ground_truth);
          if (row.mse_gt < trace.oracle_mse) {
            trace.oracle_mse = row.mse_gt;
            trace.oracle_iteration = it;
            trace.oracle_output = image;
          }
        }
      }
      if (snapshot) trace.frames.push_back({it, std::move(image)});
    }
    trace.rows.push_back(row);

    backward(loss);
    adam_step<float>(tensors, adam);
  }
  return trace;
}

CompletionResult complete(const BinaryImage& incomplete, const RunConfig& config) {
  auto trace = fit(incomplete, nullptr, config);
  auto best = trace.best_output;
  return {std::move(best), std::move(trace)};
}

CompletionResult complete_oracle_best(const BinaryImage& incomplete, const BinaryImage& ground_truth,
                                      const RunConfig& config) {
  auto trace = fit(incomplete, &ground_truth, config);
  auto best = trace.oracle_output;
  return {std::move(best), std::move(trace)};
}

double estimate_gamma(double gap_guess) { return 100.0 * gap_guess; }

double estimate_gamma(const BinaryImage& ground_truth, const BinaryImage& incomplete,
                      const ScoreConfig& config) {
  return overfit_score(ground_truth, incomplete, config);
}

}  // namespace dsp
