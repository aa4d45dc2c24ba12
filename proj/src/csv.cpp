#include "bac/csv.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace bac {
namespace {

constexpr const char* kTrialsHeader = "seed,trial,steps,terminal_reason,mean_delta_plan";
constexpr const char* kSeriesHeader = "seed,bin_index,mean_steps,mean_delta,partial";
constexpr const char* kSummaryHeader =
    "architecture,servo_rate_hz,ll_mode,experiments,successes,n_ave,m_ave";

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_row(std::size_t line_no, const std::string& why) {
  throw ConfigError("csv line " + std::to_string(line_no) + ": " + why);
}

template <class T>
T parse_number(std::string_view text, std::size_t line_no) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    bad_row(line_no, "bad number '" + std::string(text) + "'");
  return v;
}

std::optional<double> parse_optional(std::string_view text, std::size_t line_no) {
  if (text == "NA") return std::nullopt;
  return parse_number<double>(text, line_no);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : "NA";
}

// Reads the header, then hands every non-empty row to fn with its fields.
template <class Fn>
void for_each_row(std::istream& in, std::string_view header, std::size_t n_fields, Fn fn) {
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ConfigError("csv: expected header '" + std::string(header) + "'");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != n_fields)
      bad_row(line_no, "expected " + std::to_string(n_fields) + " fields");
    fn(fields, line_no);
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  return f;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_trials_csv(std::ostream& out, const std::vector<SeedTrials>& trials) {
  out << kTrialsHeader << '\n';
  for (const auto& s : trials)
    for (const auto& t : s.trials)
      out << s.seed << ',' << t.trial_index << ',' << t.steps << ','
          << to_string(t.reason) << ',' << format_double(t.mean_delta_plan) << '\n';
}

void write_series_csv(std::ostream& out, const std::vector<SeedSeries>& series) {
  out << kSeriesHeader << '\n';
  for (const auto& s : series)
    for (const auto& b : s.series.bins)
      out << s.seed << ',' << b.bin_index << ',' << format_double(b.mean_steps) << ','
          << format_double(b.mean_delta) << ',' << (b.partial ? 1 : 0) << '\n';
}

void write_summary_csv(std::ostream& out, const RunSummary& s) {
  out << kSummaryHeader << '\n'
      << to_string(s.architecture) << ',' << format_double(s.servo_rate_hz) << ','
      << to_string(s.ll_mode) << ',' << s.experiments << ',' << s.successes << ','
      << format_optional(s.n_ave) << ',' << format_optional(s.m_ave) << '\n';
}

std::vector<SeedTrials> read_trials_csv(std::istream& in) {
  std::vector<SeedTrials> out;
  for_each_row(in, kTrialsHeader, 5, [&](const auto& f, std::size_t ln) {
    const auto seed = parse_number<std::uint64_t>(f[0], ln);
    if (out.empty() || out.back().seed != seed) out.push_back({seed, {}});
    TrialRecord r;
    r.trial_index = parse_number<std::size_t>(f[1], ln);
    r.steps = parse_number<std::size_t>(f[2], ln);
    try {
      r.reason = parse_terminal_reason(f[3]);
    } catch (const ConfigError& e) {
      bad_row(ln, e.what());
    }
    r.mean_delta_plan = parse_number<double>(f[4], ln);
    out.back().trials.push_back(r);
  });
  return out;
}

std::vector<SeedSeries> read_series_csv(std::istream& in) {
  std::vector<SeedSeries> out;
  for_each_row(in, kSeriesHeader, 5, [&](const auto& f, std::size_t ln) {
    const auto seed = parse_number<std::uint64_t>(f[0], ln);
    if (out.empty() || out.back().seed != seed) out.push_back({seed, {}});
    SeriesBin b;
    b.bin_index = parse_number<std::size_t>(f[1], ln);
    b.mean_steps = parse_number<double>(f[2], ln);
    b.mean_delta = parse_number<double>(f[3], ln);
    if (f[4] != "0" && f[4] != "1") bad_row(ln, "partial must be 0 or 1");
    b.partial = f[4] == "1";
    out.back().series.bins.push_back(b);
  });
  return out;
}

RunSummary read_summary_csv(std::istream& in) {
  RunSummary s;
  bool seen = false;
  for_each_row(in, kSummaryHeader, 7, [&](const auto& f, std::size_t ln) {
    if (seen) bad_row(ln, "summary.csv holds a single row");
    seen = true;
    ExperimentConfig c;
    try {
      apply_setting(c, "architecture", f[0]);
      apply_setting(c, "ll_mode", f[2]);
    } catch (const ConfigError& e) {
      bad_row(ln, e.what());
    }
    s.architecture = c.architecture;
    s.ll_mode = c.ll_mode;
    s.servo_rate_hz = parse_number<double>(f[1], ln);
    s.experiments = parse_number<std::size_t>(f[3], ln);
    s.successes = parse_number<std::size_t>(f[4], ln);
    s.n_ave = parse_optional(f[5], ln);
    s.m_ave = parse_optional(f[6], ln);
  });
  if (!seen) throw ConfigError("csv: summary.csv has no data row");
  return s;
}

void export_trials_csv(const std::string& path, const std::vector<SeedTrials>& trials) {
  auto f = open_out(path);
  write_trials_csv(f, trials);
}

void export_series_csv(const std::string& path, const std::vector<SeedSeries>& series) {
  auto f = open_out(path);
  write_series_csv(f, series);
}

void export_summary_csv(const std::string& path, const RunSummary& summary) {
  auto f = open_out(path);
  write_summary_csv(f, summary);
}

std::vector<SeedTrials> import_trials_csv(const std::string& path) {
  auto f = open_in(path);
  return read_trials_csv(f);
}

std::vector<SeedSeries> import_series_csv(const std::string& path) {
  auto f = open_in(path);
  return read_series_csv(f);
}

RunSummary import_summary_csv(const std::string& path) {
  auto f = open_in(path);
  return read_summary_csv(f);
}

void export_batch(const std::string& dir, const BatchResult& batch) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path root(dir);
  std::vector<SeedTrials> trials;
  std::vector<SeedSeries> series;
  for (const auto& e : batch.experiments) {
    trials.push_back({e.seed, e.trials});
    series.push_back({e.seed, e.series});
  }
  export_trials_csv((root / "trials.csv").string(), trials);
  export_series_csv((root / "series.csv").string(), series);
  export_summary_csv((root / "summary.csv").string(), batch.summary);
}

}  // namespace bac
