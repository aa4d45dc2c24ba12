#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bac/bac_core.hpp"
#include "bac/cartpole.hpp"

namespace bac {

enum class Architecture { kSingleIndirect, kSingleDirect, kTwoLevelIndirect, kTwoLevelDirect };
enum class LLMode { kExplicitRole, kSharedExternal };
enum class HlReinforcement { kSampled, kAccumulated };

// kPrinted: the published update for hidden->plan weights.
// kAnalytic: exact gradient of the influence error.
// kActionOutput: sensitivity measured at the action output (ablation only).
enum class RiRule { kPrinted, kAnalytic, kActionOutput };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct PhaseBudget {
  std::size_t trials = 0;
  std::size_t steps = 0;
};

struct ExperimentConfig {
  Architecture architecture = Architecture::kSingleIndirect;
  double servo_rate_hz = 50.0;
  LLMode ll_mode = LLMode::kExplicitRole;
  std::vector<std::uint64_t> seeds;  // empty means 1..30
  std::optional<std::size_t> trial_limit;  // default depends on architecture
  std::size_t success_steps = 20000;

  // plant
  double m_cart = 1.0;
  double m_pole = 0.1;
  double pole_len = 1.0;
  double gravity = 9.8;
  double force_scale = 10.0;
  double x_range = 2.4;
  double theta_range_deg = 12.0;
  double init_fraction = 0.5;
  ReinforcementMode reward_mode = ReinforcementMode::kDistanceCost;
  std::optional<int> reward_sign;  // default: -1 for cost, +1 failure-driven

  // learning
  std::size_t n_hidden = 7;
  double gamma = 0.95;
  double critic_lr = 0.02;
  double action_lr = 0.01;
  double momentum = 0.0;
  double sigma = 0.05;
  double init_scale = 0.3;
  double model_lr = 0.1;
  double k_m = 1.0;
  double action_limit = 1.0;  // actuator clamp in action units; 0 ignores it
  TerminalMode terminal = TerminalMode::kAbsorbing;
  std::size_t model_train_steps = 1000;  // single-level model phase

  // hierarchy
  std::size_t n_ratio = 40;
  Interval plan_range_ll{-0.3, 0.3};
  Interval plan_range_hl_model{-0.7, 0.7};
  std::optional<double> hl_gamma;  // defaults to gamma
  // High-level overrides; each defaults to its shared counterpart.
  std::optional<double> hl_action_lr;
  std::optional<double> hl_critic_lr;
  std::optional<double> hl_sigma;
  std::optional<double> hl_init_scale;
  HlReinforcement hl_reinforcement = HlReinforcement::kSampled;
  bool ll_critic_sees_plan = true;
  // Explicit-role LL sees only the pole by default; RI sees the whole state.
  std::optional<bool> ll_observes_cart;
  double ll_plan_input_scale = 1.0;  // plan is multiplied by this on LL inputs
  PhaseBudget phase1{1600, 20000};
  PhaseBudget phase2{3600, 520000};
  PhaseBudget phase3{800, 300000};
  PhaseBudget phase4{320, 2000000};
  double model_error_threshold = 0.005;    // phase I sliding-window mean |err|
  double hl_model_error_threshold = 0.2;   // phase III, per N-step transition
  std::size_t model_error_window = 1000;
  double tracking_threshold_deg = 1.5;  // phase II explicit-role convergence
  double ll_theta_limit_deg = 45.0;     // pole limit while the LL trains
  std::size_t ll_trial_steps = 200;     // LL training trial cap

  // response induction
  double k1 = 0.35;
  double k2 = 0.14;
  RiRule ri_rule = RiRule::kPrinted;
  std::size_t ri_stable_steps = 500;  // RI phase II convergence: bin mean steps

  std::size_t bin_size = 50;
  std::size_t threads = 1;

  std::size_t effective_trial_limit() const;
  std::vector<std::uint64_t> effective_seeds() const;
  int effective_reward_sign() const;
  double effective_hl_gamma() const { return hl_gamma.value_or(gamma); }
  bool effective_ll_observes_cart() const {
    return ll_observes_cart.value_or(ll_mode == LLMode::kSharedExternal);
  }
  bool is_two_level() const {
    return architecture == Architecture::kTwoLevelIndirect ||
           architecture == Architecture::kTwoLevelDirect;
  }
  bool is_indirect() const {
    return architecture == Architecture::kSingleIndirect ||
           architecture == Architecture::kTwoLevelIndirect;
  }

  PhysicsParams physics() const;
  Bounds bounds() const;
  AgentParams agent_params() const;

  void validate() const;
};

// Flat "key = value" lines, '#' starts a comment. Unknown keys are rejected.
// Throws ConfigError naming the key and line on malformed input.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
void apply_setting(ExperimentConfig& config, std::string_view key,
                   std::string_view value);

// "desk": success_steps 5000, trial_limit 400, seeds 1..10.
// "paper": full published budgets.
void apply_profile(ExperimentConfig& config, std::string_view profile);

std::string to_string(Architecture a);
std::string to_string(LLMode m);
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace bac
