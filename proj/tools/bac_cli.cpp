#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bac/config.hpp"
#include "bac/csv.hpp"
#include "bac/gradcheck.hpp"
#include "bac/harness.hpp"
#include "bac/hierarchy.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kNumericFault = 2;

struct Common {
  std::string config_path;
  std::string profile;
  std::string seeds;
  std::size_t threads = 0;
};

bac::ExperimentConfig build_config(const Common& c) {
  bac::ExperimentConfig cfg =
      c.config_path.empty() ? bac::ExperimentConfig{} : bac::load_config(c.config_path);
  if (!c.profile.empty()) bac::apply_profile(cfg, c.profile);
  if (!c.seeds.empty()) cfg.seeds = bac::parse_seed_list(c.seeds);
  if (c.threads) cfg.threads = c.threads;
  cfg.validate();
  return cfg;
}

std::string opt(const std::optional<double>& v) {
  return v ? bac::format_double(*v) : "NA";
}

void print_summary(const bac::RunSummary& s) {
  std::printf("%s %s Hz %s: SR %zu/%zu  N_ave %s  M_ave %s  (sd %s / %s)  faults %zu\n",
              bac::to_string(s.architecture).c_str(),
              bac::format_double(s.servo_rate_hz).c_str(), bac::to_string(s.ll_mode).c_str(),
              s.successes, s.experiments, opt(s.n_ave).c_str(), opt(s.m_ave).c_str(),
              opt(s.n_std).c_str(), opt(s.m_std).c_str(), s.numeric_faults);
}

int cmd_run(const Common& common, const std::string& out_dir) {
  const bac::ExperimentConfig cfg = build_config(common);
  const bac::BatchResult batch = bac::run_batch(cfg);
  for (const auto& e : batch.experiments) {
    std::printf("seed %llu: %s after %zu trials%s%s\n",
                static_cast<unsigned long long>(e.seed), e.success ? "success" : "failed",
                e.trials.size(), e.success ? "" : " - ", e.failure_reason.c_str());
    for (const auto& p : e.phases)
      std::printf("  phase %-7s trials %6zu steps %9zu converged %d metric %s\n",
                  p.phase.c_str(), p.trials, p.steps, p.converged ? 1 : 0,
                  bac::format_double(p.final_metric).c_str());
  }
  print_summary(batch.summary);
  if (!out_dir.empty()) bac::export_batch(out_dir, batch);
  return batch.summary.numeric_faults ? kNumericFault : 0;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t configs) {
  bool ok = true;
  for (const auto& r : bac::run_all_gradchecks(seed, configs)) {
    std::printf("%-17s %3zu configs  max rel err %.3e  (tol %.0e)  %s\n", r.suite.c_str(),
                r.configurations, r.max_rel_error, r.tolerance, r.passed() ? "ok" : "FAIL");
    ok = ok && r.passed();
  }
  return ok ? 0 : kNumericFault;
}

int cmd_phase(const Common& common, const std::string& only) {
  const bac::ExperimentConfig cfg = build_config(common);
  if (!cfg.is_two_level()) throw bac::ConfigError("phase: needs a two-level architecture");
  const std::optional<bac::PhaseId> target =
      only == "I"     ? std::optional(bac::PhaseId::kI)
      : only == "II"  ? std::optional(bac::PhaseId::kII)
      : only == "III" ? std::optional(bac::PhaseId::kIII)
      : only == "IV"  ? std::optional(bac::PhaseId::kIV)
                      : std::nullopt;
  if (!target) throw bac::ConfigError("phase: --only must be I, II, III or IV");
  bool fault = false;
  for (auto seed : cfg.effective_seeds()) {
    bac::TwoLevelExperiment exp(cfg, seed);
    const auto phases = exp.phases();
    if (std::find(phases.begin(), phases.end(), *target) == phases.end())
      throw bac::ConfigError("phase: " + only + " does not exist for " +
                             bac::to_string(cfg.architecture));
    try {
      // Earlier phases run first; only the requested one is reported.
      for (auto p : phases) {
        const bac::PhaseReport r = exp.run_phase(p);
        if (p != *target) continue;
        std::printf("seed %llu phase %s: trials %zu steps %zu converged %d metric %s\n",
                    static_cast<unsigned long long>(seed), r.phase.c_str(), r.trials,
                    r.steps, r.converged ? 1 : 0, bac::format_double(r.final_metric).c_str());
        break;
      }
    } catch (const bac::TrainingFault& e) {
      std::printf("seed %llu: numeric fault: %s\n", static_cast<unsigned long long>(seed),
                  e.what());
      fault = true;
    }
  }
  return fault ? kNumericFault : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backpropagated adaptive critic experiments on the cart-pole"};
  app.require_subcommand(1);

  Common common;
  std::string out_dir;
  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", common.config_path, "key = value config file");
    if (need_config) c->required();
    sub->add_option("--profile", common.profile, "desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    sub->add_option("--seeds", common.seeds, "comma list, ranges like 1-10 allowed");
    sub->add_option("--threads", common.threads, "worker threads for the seed batch");
  };

  auto* run = app.add_subcommand("run", "run every seed of a config and summarize");
  add_common(run, true);
  run->add_option("--out", out_dir, "directory for trials.csv, series.csv, summary.csv");

  std::uint64_t gc_seed = 1;
  std::size_t gc_configs = 50;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference checks of every backward pass");
  gc->add_option("--seed", gc_seed);
  gc->add_option("--configs", gc_configs, "random configurations per suite");

  std::string only;
  auto* phase = app.add_subcommand("phase", "run a two-level config up to one phase");
  add_common(phase, true);
  phase->add_option("--only", only, "I, II, III or IV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return cmd_run(common, out_dir);
    if (*gc) return cmd_gradcheck(gc_seed, gc_configs);
    if (*phase) return cmd_phase(common, only);
  } catch (const bac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const bac::TrainingFault& e) {
    std::cerr << "numeric fault: " << e.what() << "\n";
    return kNumericFault;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return 0;
}
