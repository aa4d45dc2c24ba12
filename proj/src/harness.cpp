#include "bac/harness.hpp"

#include <cmath>
#include <numeric>
#include <thread>

#include "bac/hierarchy.hpp"

namespace bac {

std::string to_string(TerminalReason r) {
  switch (r) {
    case TerminalReason::kFailureX: return "failure-x";
    case TerminalReason::kFailureTheta: return "failure-theta";
    case TerminalReason::kSuccess: return "success";
    case TerminalReason::kBudget: return "budget";
    case TerminalReason::kFault: return "fault";
  }
  return "?";
}

TerminalReason parse_terminal_reason(std::string_view text) {
  for (auto r : {TerminalReason::kFailureX, TerminalReason::kFailureTheta,
                 TerminalReason::kSuccess, TerminalReason::kBudget,
                 TerminalReason::kFault})
    if (text == to_string(r)) return r;
  throw ConfigError("unknown terminal_reason '" + std::string(text) + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  if (config.is_two_level()) return run_two_level(config, seed);
  return run_single_level(config, seed);
}

BatchResult run_batch(const ExperimentConfig& config) {
  config.validate();
  const auto seeds = config.effective_seeds();
  BatchResult batch;
  batch.experiments.resize(seeds.size());

  // Each slot is written by exactly one worker; results land in seed order
  // regardless of scheduling.
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(config.threads, seeds.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i)
      batch.experiments[i] = run_experiment(config, seeds[i]);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < seeds.size(); i += workers)
          batch.experiments[i] = run_experiment(config, seeds[i]);
      });
  }

  std::vector<SeedTrials> per_seed;
  for (const auto& e : batch.experiments) per_seed.push_back({e.seed, e.trials});
  batch.summary = summarize(config, per_seed);
  for (const auto& e : batch.experiments)
    if (e.numeric_fault) ++batch.summary.numeric_faults;
  return batch;
}

RunSummary summarize(const ExperimentConfig& config,
                     const std::vector<SeedTrials>& per_seed) {
  RunSummary s;
  s.architecture = config.architecture;
  s.servo_rate_hz = config.servo_rate_hz;
  s.ll_mode = config.ll_mode;
  s.experiments = per_seed.size();

  std::vector<double> n_values;
  std::vector<double> m_values;
  for (const auto& seed : per_seed) {
    std::size_t steps_before = 0;
    for (const auto& t : seed.trials) {
      if (t.reason == TerminalReason::kSuccess) {
        n_values.push_back(static_cast<double>(t.trial_index));
        m_values.push_back(static_cast<double>(steps_before));
        break;
      }
      steps_before += t.steps;
    }
  }
  s.successes = n_values.size();
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  auto stddev = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
  };
  if (!n_values.empty()) {
    s.n_ave = mean(n_values);
    s.m_ave = mean(m_values);
    s.n_std = stddev(n_values);
    s.m_std = stddev(m_values);
  }
  return s;
}

SmoothedSeries smooth_series(const std::vector<TrialRecord>& records,
                             std::size_t bin_size) {
  if (bin_size == 0) throw ConfigError("bin_size must be >= 1");
  SmoothedSeries series;
  series.bin_size = bin_size;
  for (std::size_t start = 0; start < records.size(); start += bin_size) {
    const std::size_t end = std::min(records.size(), start + bin_size);
    SeriesBin bin;
    bin.bin_index = series.bins.size();
    bin.count = end - start;
    bin.partial = bin.count < bin_size;
    for (std::size_t i = start; i < end; ++i) {
      bin.mean_steps += static_cast<double>(records[i].steps);
      bin.mean_delta += records[i].mean_delta_plan;
    }
    bin.mean_steps /= static_cast<double>(bin.count);
    bin.mean_delta /= static_cast<double>(bin.count);
    series.bins.push_back(bin);
  }
  return series;
}

}  // namespace bac
