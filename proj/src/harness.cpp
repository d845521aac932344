#include "dsp/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "dsp/errors.hpp"
#include "dsp/metrics.hpp"

namespace dsp {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("csv: bad number '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("csv: bad integer '" + std::string(s) + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Rows of a CSV file with the given header, split on commas.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::string_view header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw std::runtime_error(path.string() + ": expected header '" + std::string(header) + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

double mean_gap(std::span<const DatasetSample> samples) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) total += s.gap_stat.gap;
  return total / static_cast<double>(samples.size());
}

double gamma_for(const DatasetSample& sample, const RunConfig& config, const HarnessOptions& options,
                 double dataset_gap) {
  switch (options.gamma) {
    case GammaPolicy::DatasetMeanGap: return estimate_gamma(dataset_gap);
    case GammaPolicy::GroundTruth:
      return estimate_gamma(sample.ground_truth, sample.degraded, config.scores);
    case GammaPolicy::Fixed: break;
  }
  return config.scores.gamma;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Raw: return "RAW";
    case Method::Dip: return "DIP";
    case Method::Dsp: return "DSP";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::Raw, Method::Dip, Method::Dsp})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

std::string_view to_string(GammaPolicy policy) {
  switch (policy) {
    case GammaPolicy::DatasetMeanGap: return "dataset_gap";
    case GammaPolicy::GroundTruth: return "ground_truth";
    case GammaPolicy::Fixed: return "fixed";
  }
  return "?";
}

std::optional<GammaPolicy> parse_gamma_policy(std::string_view name) {
  for (auto p : {GammaPolicy::DatasetMeanGap, GammaPolicy::GroundTruth, GammaPolicy::Fixed})
    if (to_string(p) == name) return p;
  return std::nullopt;
}

std::size_t worker_count(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DSP_WORKERS"); env && *env) {
    const std::string_view s(env);
    unsigned long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v == 0)
      throw ConfigError("DSP_WORKERS must be a positive integer, got '" + std::string(s) + "'");
    return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::min(std::max<std::size_t>(workers, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      omp_set_num_threads(1);
      while (!stop) {
        const std::size_t i = next++;
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          stop = true;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

ComparisonReport run_comparison(std::span<const DatasetSample> samples, const RunConfig& config,
                                const HarnessOptions& options) {
  validate(config);
  const double dataset_gap = mean_gap(samples);
  struct Outcome {
    std::vector<EvalRecord> records;
    std::optional<std::string> error;
  };
  std::vector<Outcome> outcomes(samples.size());

  parallel_for(samples.size(), worker_count(options.workers), [&](std::size_t i) {
    const auto& s = samples[i];
    auto& out = outcomes[i];
    try {
      out.records.push_back({s.id, Method::Raw, mse(s.degraded, s.ground_truth),
                             iou(s.degraded, s.ground_truth), 0, 0.0});

      RunConfig dip = config;
      dip.energy.variant = EnergyVariant::DipSelfMask;
      auto start = Clock::now();
      const auto dip_trace = fit(s.degraded, &s.ground_truth, dip);
      out.records.push_back({s.id, Method::Dip, mse(dip_trace.oracle_output, s.ground_truth),
                             iou(dip_trace.oracle_output, s.ground_truth),
                             dip_trace.oracle_iteration.value_or(0), seconds_since(start)});

      RunConfig dsp = config;
      dsp.energy.variant = EnergyVariant::Dsp;
      dsp.scores.gamma = gamma_for(s, config, options, dataset_gap);
      start = Clock::now();
      const auto result = complete(s.degraded, dsp);
      out.records.push_back({s.id, Method::Dsp, mse(result.best_output, s.ground_truth),
                             iou(result.best_output, s.ground_truth), result.trace.best_iteration,
                             seconds_since(start)});
    } catch (const std::exception& e) {
      out.records.clear();
      out.error = e.what();
    }
  });

  ComparisonReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (outcomes[i].error) {
      report.failures.push_back({samples[i].id, *outcomes[i].error});
      continue;
    }
    for (auto& r : outcomes[i].records) report.records.push_back(std::move(r));
  }
  report.summary = summarize(report.records);
  return report;
}

std::vector<MethodSummary> summarize(std::span<const EvalRecord> records) {
  std::vector<MethodSummary> out;
  for (Method m : {Method::Raw, Method::Dip, Method::Dsp}) {
    MethodSummary s;
    s.method = m;
    std::vector<double> iterations;
    for (const auto& r : records) {
      if (r.method != m) continue;
      ++s.n;
      s.mse += r.mse;
      s.iou += r.iou;
      s.best_iteration += r.best_iteration;
      s.wall_time_s += r.wall_time_s;
      iterations.push_back(r.best_iteration);
    }
    if (s.n == 0) continue;
    const double n = static_cast<double>(s.n);
    s.mse /= n;
    s.iou /= n;
    s.best_iteration /= n;
    s.wall_time_s /= n;
    s.median_best_iteration = median(std::move(iterations));
    out.push_back(s);
  }
  return out;
}

std::vector<SweepRecord> sweep_alpha(std::span<const DatasetSample> samples,
                                     std::span<const double> alphas, const RunConfig& config,
                                     const HarnessOptions& options) {
  validate(config);
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha sweep: alpha must lie in [0, 1]");
  }
  if (samples.empty()) throw ConfigError("alpha sweep: no samples");
  const double dataset_gap = mean_gap(samples);
  struct Run {
    double mse = 0.0, iou = 0.0, iteration = 0.0, time = 0.0;
  };
  const std::size_t n = samples.size();
  std::vector<Run> runs(alphas.size() * n);

  parallel_for(runs.size(), worker_count(options.workers), [&](std::size_t k) {
    const auto& s = samples[k % n];
    RunConfig cfg = config;
    cfg.energy.variant = EnergyVariant::Dsp;
    cfg.energy.alpha = alphas[k / n];
    cfg.scores.gamma = gamma_for(s, config, options, dataset_gap);
    const auto start = Clock::now();
    const auto result = complete(s.degraded, cfg);
    runs[k] = {mse(result.best_output, s.ground_truth), iou(result.best_output, s.ground_truth),
               static_cast<double>(result.trace.best_iteration), seconds_since(start)};
  });

  std::vector<SweepRecord> out;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    SweepRecord r;
    r.value = alphas[a];
    r.n = n;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& run = runs[a * n + i];
      r.mse += run.mse;
      r.iou += run.iou;
      r.iterations += run.iteration;
      r.time += run.time;
    }
    const double dn = static_cast<double>(n);
    r.mse /= dn;
    r.iou /= dn;
    r.iterations /= dn;
    r.time /= dn;
    out.push_back(r);
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson: need two equally long series of at least 2 values");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

CorrelationResult gamma_gap_correlation(std::span<const DatasetSample> samples,
                                        const ScoreConfig& config) {
  if (samples.size() < 2) throw std::invalid_argument("correlation: need at least 2 samples");
  std::vector<double> omega, gap;
  CorrelationResult out;
  for (const auto& s : samples) {
    const PointSet gt = extract_points(s.ground_truth, config.binarize_threshold);
    const PointSet degraded = extract_points(s.degraded, config.binarize_threshold);
    omega.push_back(overfit_score(gt, degraded, config.match_radius));
    gap.push_back(s.gap_stat.gap);
    const double rho = reconstruction_score(gt, degraded, config.match_radius);
    out.min_rho = std::min(out.min_rho, rho);
    if (rho == 100.0) ++out.full_reconstruction;
  }
  out.n = samples.size();
  out.pearson_r = pearson(omega, gap);
  return out;
}

BinaryImage dilate(const BinaryImage& image, float threshold) {
  BinaryImage out(image.height(), image.width(), 1.0f);
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  const auto w = static_cast<std::ptrdiff_t>(image.width());
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      if (!(image(r, c) < threshold)) continue;
      for (std::ptrdiff_t dr = -1; dr <= 1; ++dr)
        for (std::ptrdiff_t dc = -1; dc <= 1; ++dc)
          if (r + dr >= 0 && r + dr < h && c + dc >= 0 && c + dc < w) out(r + dr, c + dc) = 0.0f;
    }
  }
  return out;
}

bool completion_succeeded(const BinaryImage& output, const BinaryImage& ground_truth,
                          std::span<const std::vector<PixelPoint>> gaps, double match_radius) {
  if (iou(output, ground_truth) < 0.9 * iou(ground_truth, dilate(ground_truth))) return false;
  const PointSet points = extract_points(output);
  for (const auto& region : gaps) {
    std::size_t covered = 0;
    for (const auto& p : region) covered += points.index().any_within(p, match_radius);
    if (2 * covered < region.size()) return false;
  }
  return true;
}

std::vector<RfCell> sweep_receptive_field(const RfOptions& rf, const RunConfig& config,
                                          const HarnessOptions& options) {
  validate(config);
  if (rf.trials < 1) throw ConfigError("rf sweep: trials must be >= 1");
  for (int k : rf.kernels) {
    if (k < 1 || k % 2 == 0) throw ConfigError("rf sweep: kernel sizes must be odd");
  }
  const auto shapes = generate_dataset(DatasetKind::Simple, static_cast<std::size_t>(rf.trials),
                                       rf.canvas, rf.seed);

  struct Trial {
    DatasetSample sample;
    std::vector<std::vector<PixelPoint>> gaps;
  };
  std::vector<std::vector<Trial>> trials(rf.gap_lengths.size());
  for (std::size_t g = 0; g < rf.gap_lengths.size(); ++g) {
    for (const auto& shape : shapes) {
      DegradationSpec spec{1, static_cast<double>(rf.gap_lengths[g]), shape.degradation.seed};
      const auto rendered = render_shape(shape.shape, rf.canvas, rf.canvas);
      Trial t{make_sample(shape.id + "_gap" + std::to_string(rf.gap_lengths[g]), shape.shape, spec,
                          rf.canvas),
              gap_regions(rendered, spec)};
      trials[g].push_back(std::move(t));
    }
  }

  const std::size_t nk = rf.kernels.size(), ng = rf.gap_lengths.size();
  const std::size_t nt = static_cast<std::size_t>(rf.trials);
  std::vector<char> success(nk * ng * nt, 0);
  parallel_for(success.size(), worker_count(options.workers), [&](std::size_t idx) {
    const std::size_t t = idx % nt, g = (idx / nt) % ng, k = idx / (nt * ng);
    const auto& trial = trials[g][t];
    RunConfig cfg = config;
    cfg.generator.main_kernel = rf.kernels[k];
    cfg.energy.variant = EnergyVariant::Dsp;
    double gap_sum = 0.0;
    for (const auto& other : trials[g]) gap_sum += other.sample.gap_stat.gap;
    cfg.scores.gamma = gamma_for(trial.sample, config, options, gap_sum / static_cast<double>(nt));
    const auto result = complete(trial.sample.degraded, cfg);
    success[idx] = completion_succeeded(result.best_output, trial.sample.ground_truth, trial.gaps,
                                        config.scores.match_radius);
  });

  std::vector<RfCell> cells;
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t g = 0; g < ng; ++g) {
      RfCell cell{rf.kernels[k], rf.gap_lengths[g], 0, rf.trials};
      for (std::size_t t = 0; t < nt; ++t) cell.successes += success[(k * ng + g) * nt + t];
      cells.push_back(cell);
    }
  }
  return cells;
}

void write_comparison_csv(const std::filesystem::path& path, std::span<const EvalRecord> records) {
  auto out = open_out(path);
  out << "id,method,mse,iou,best_iteration,wall_time_s\n";
  for (const auto& r : records) {
    out << r.id << ',' << to_string(r.method) << ',' << format_double(r.mse) << ','
        << format_double(r.iou) << ',' << r.best_iteration << ',' << format_double(r.wall_time_s)
        << '\n';
  }
}

std::vector<EvalRecord> read_comparison_csv(const std::filesystem::path& path) {
  std::vector<EvalRecord> records;
  for (const auto& row : read_csv(path, "id,method,mse,iou,best_iteration,wall_time_s")) {
    if (row.size() != 6) throw std::runtime_error(path.string() + ": expected 6 columns");
    const auto method = parse_method(row[1]);
    if (!method) throw std::runtime_error(path.string() + ": unknown method " + row[1]);
    records.push_back({row[0], *method, parse_double(row[2]), parse_double(row[3]),
                       static_cast<int>(parse_int(row[4])), parse_double(row[5])});
  }
  return records;
}

void write_summary_json(const std::filesystem::path& path, const ComparisonReport& report) {
  nlohmann::json j;
  j["methods"] = nlohmann::json::array();
  for (const auto& s : report.summary) {
    j["methods"].push_back({{"method", to_string(s.method)},
                            {"n", s.n},
                            {"mse", s.mse},
                            {"iou", s.iou},
                            {"best_iteration", s.best_iteration},
                            {"median_best_iteration", s.median_best_iteration},
                            {"wall_time_s", s.wall_time_s}});
  }
  j["failures"] = nlohmann::json::array();
  for (const auto& f : report.failures) j["failures"].push_back({{"id", f.id}, {"error", f.message}});
  open_out(path) << j.dump(2) << '\n';
}

void write_alpha_csv(const std::filesystem::path& path, std::span<const SweepRecord> records) {
  auto out = open_out(path);
  out << "alpha,mse,iou,iterations,time\n";
  for (const auto& r : records) {
    out << format_double(r.value) << ',' << format_double(r.mse) << ',' << format_double(r.iou)
        << ',' << format_double(r.iterations) << ',' << format_double(r.time) << '\n';
  }
}

std::vector<SweepRecord> read_alpha_csv(const std::filesystem::path& path) {
  std::vector<SweepRecord> records;
  for (const auto& row : read_csv(path, "alpha,mse,iou,iterations,time")) {
    if (row.size() != 5) throw std::runtime_error(path.string() + ": expected 5 columns");
    SweepRecord r;
    r.value = parse_double(row[0]);
    r.mse = parse_double(row[1]);
    r.iou = parse_double(row[2]);
    r.iterations = parse_double(row[3]);
    r.time = parse_double(row[4]);
    records.push_back(r);
  }
  return records;
}

void write_rf_csv(const std::filesystem::path& path, std::span<const RfCell> cells) {
  auto out = open_out(path);
  out << "kernel,gap,success_rate,trials\n";
  for (const auto& c : cells)
    out << c.kernel << ',' << c.gap << ',' << format_double(c.success_rate()) << ',' << c.trials
        << '\n';
}

std::vector<RfCell> read_rf_csv(const std::filesystem::path& path) {
  std::vector<RfCell> cells;
  for (const auto& row : read_csv(path, "kernel,gap,success_rate,trials")) {
    if (row.size() != 4) throw std::runtime_error(path.string() + ": expected 4 columns");
    RfCell c;
    c.kernel = static_cast<int>(parse_int(row[0]));
    c.gap = static_cast<int>(parse_int(row[1]));
    c.trials = static_cast<int>(parse_int(row[3]));
    c.successes = static_cast<int>(std::lround(parse_double(row[2]) * c.trials));
    cells.push_back(c);
  }
  return cells;
}

void write_correlation_json(const std::filesystem::path& path, const CorrelationResult& result) {
  const nlohmann::json j{{"pearson_r", result.pearson_r},
                         {"n", result.n},
                         {"full_reconstruction", result.full_reconstruction},
                         {"min_rho", result.min_rho}};
  open_out(path) << j.dump(2) << '\n';
}

CorrelationResult read_correlation_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const auto j = nlohmann::json::parse(in);
  CorrelationResult r;
  r.pearson_r = j.at("pearson_r");
  r.n = j.at("n");
  r.full_reconstruction = j.value("full_reconstruction", std::size_t{0});
  r.min_rho = j.value("min_rho", 100.0);
  return r;
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows,
                     bool with_mse) {
  auto out = open_out(path);
  out << "iteration,energy,rho,omega,delta" << (with_mse ? ",mse_gt" : "") << '\n';
  for (const auto& r : rows) {
    out << r.iteration << ',' << format_double(r.energy) << ',' << format_double(r.rho) << ','
        << format_double(r.omega) << ',' << format_double(r.delta);
    if (with_mse) out << ',' << format_double(r.mse_gt);
    out << '\n';
  }
}

}  // namespace dsp
