#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bac/config.hpp"

namespace bac {

enum class TerminalReason { kFailureX, kFailureTheta, kSuccess, kBudget, kFault };

std::string to_string(TerminalReason r);
TerminalReason parse_terminal_reason(std::string_view text);

struct TrialRecord {
  std::size_t trial_index = 0;  // 1-based
  std::size_t steps = 0;
  TerminalReason reason = TerminalReason::kFailureTheta;
  double mean_delta_plan = 0.0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct PhaseReport {
  std::string phase;  // "I".."IV", or "model"/"control" for single-level
  std::size_t trials = 0;
  std::size_t steps = 0;
  bool converged = false;
  double final_metric = 0.0;  // phase-specific: model error, tracking error, ...
};

struct SeriesBin {
  std::size_t bin_index = 0;
  std::size_t count = 0;
  double mean_steps = 0.0;
  double mean_delta = 0.0;
  bool partial = false;
};

struct SmoothedSeries {
  std::size_t bin_size = 50;
  std::vector<SeriesBin> bins;
};

struct ExperimentResult {
  std::uint64_t seed = 0;
  bool success = false;
  std::string failure_reason;  // empty on success
  bool numeric_fault = false;
  // Trials of the final control phase; these decide success.
  std::vector<TrialRecord> trials;
  // Low-level training trials (two-level runs only).
  std::vector<TrialRecord> ll_trials;
  SmoothedSeries series;
  std::vector<PhaseReport> phases;
};

struct RunSummary {
  Architecture architecture = Architecture::kSingleIndirect;
  double servo_rate_hz = 50.0;
  LLMode ll_mode = LLMode::kExplicitRole;
  std::size_t experiments = 0;
  std::size_t successes = 0;
  std::optional<double> n_ave;  // mean 1-based index of the successful trial
  std::optional<double> m_ave;  // mean steps in the trials before it
  // Extension: spread across successful runs.
  std::optional<double> n_std;
  std::optional<double> m_std;
  std::size_t numeric_faults = 0;

  double success_ratio() const {
    return experiments ? static_cast<double>(successes) / experiments : 0.0;
  }
};

// Single- or two-level experiment for one seed; deterministic in (config, seed).
ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t seed);

// All seeds of config (in parallel when config.threads > 1).
struct BatchResult {
  RunSummary summary;
  std::vector<ExperimentResult> experiments;  // in seed-list order
};
BatchResult run_batch(const ExperimentConfig& config);

// Aggregates from per-seed final-phase trial lists.
struct SeedTrials {
  std::uint64_t seed = 0;
  std::vector<TrialRecord> trials;
};
RunSummary summarize(const ExperimentConfig& config,
                     const std::vector<SeedTrials>& per_seed);

SmoothedSeries smooth_series(const std::vector<TrialRecord>& records,
                             std::size_t bin_size);

// Single-level runner (also reachable through run_experiment).
ExperimentResult run_single_level(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace bac
