#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bac/harness.hpp"

namespace bac {

struct SeedSeries {
  std::uint64_t seed = 0;
  SmoothedSeries series;
};

// Numbers are written with std::to_chars (shortest round-trip form), so the
// output never depends on the global locale. Missing averages are "NA".
void write_trials_csv(std::ostream& out, const std::vector<SeedTrials>& trials);
void write_series_csv(std::ostream& out, const std::vector<SeedSeries>& series);
void write_summary_csv(std::ostream& out, const RunSummary& summary);

// Parsers accept exactly what the writers produce. Throws ConfigError on
// malformed rows. Bin counts are not part of series.csv and come back as 0.
std::vector<SeedTrials> read_trials_csv(std::istream& in);
std::vector<SeedSeries> read_series_csv(std::istream& in);
RunSummary read_summary_csv(std::istream& in);

void export_trials_csv(const std::string& path, const std::vector<SeedTrials>& trials);
void export_series_csv(const std::string& path, const std::vector<SeedSeries>& series);
void export_summary_csv(const std::string& path, const RunSummary& summary);
std::vector<SeedTrials> import_trials_csv(const std::string& path);
std::vector<SeedSeries> import_series_csv(const std::string& path);
RunSummary import_summary_csv(const std::string& path);

// Writes trials.csv, series.csv and summary.csv into dir (created if needed).
void export_batch(const std::string& dir, const BatchResult& batch);

std::string format_double(double v);

}  // namespace bac
