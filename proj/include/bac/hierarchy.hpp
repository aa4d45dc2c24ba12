#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "bac/bac_core.hpp"
#include "bac/cartpole.hpp"
#include "bac/config.hpp"
#include "bac/harness.hpp"

namespace bac {

struct HierarchyConfig {
  std::size_t n_ratio = 40;
  std::size_t plan_dim = 1;
  Interval plan_range_ll_training{-0.3, 0.3};
  Interval plan_range_hl_model{-0.7, 0.7};

  static HierarchyConfig from(const ExperimentConfig& config);
  void validate() const;
};

// High-level action, held for n_ratio low-level steps.
struct PlanSignal {
  Vector y;
  std::size_t issued_at_step = 0;
};

enum class PhaseId { kI, kII, kIII, kIV };
std::string to_string(PhaseId p);

// Explicit-role low-level cost (Y - theta)^2 with the plan read as a pole
// angle in radians. It is a cost; learning applies sign -1.
double ll_reinforcement_explicit(const PlanSignal& plan, double theta);

// High level acts on steps 0, N, 2N, ...
bool hl_schedule(std::size_t step, const HierarchyConfig& config);

// [normalized state, Y]: the low-level action (and critic) input. The
// low-level model sees [state, action] only.
Vector ll_input(const Vector& normalized_state, const PlanSignal& plan);

// Low-level controller used while the high level is in charge. Receives the
// plant state, the held plan and the steps elapsed since it was issued.
using LowLevelPolicy =
    std::function<double(const CartPoleState&, const PlanSignal&, std::size_t)>;

struct HlTransition {
  CartPoleState start;
  CartPoleState end;
  Vector plan;
  std::size_t steps = 0;
  bool truncated = false;  // failure inside the window
  FailureKind failure = FailureKind::kNone;
  double reinforcement_sampled = 0.0;      // raw signal at the window's end
  double reinforcement_accumulated = 0.0;  // raw signal summed over the window
};

// Runs the low-level policy for up to max_steps under a fixed plan.
HlTransition hl_transition_collect(const LowLevelPolicy& ll,
                                   const CartPoleState& start,
                                   const PlanSignal& plan,
                                   const PhysicsParams& physics,
                                   const Bounds& bounds,
                                   ReinforcementMode mode,
                                   std::size_t max_steps);

// Two-level BAC with its Phase I-IV (Indirect) or I-II (Direct) schedule.
// Phase budgets come from ExperimentConfig::phase1..phase4; the Direct
// variant uses the phase2 budget for its low level and phase4 for its high
// level.
class TwoLevelExperiment {
 public:
  TwoLevelExperiment(const ExperimentConfig& config, std::uint64_t seed);

  std::vector<PhaseId> phases() const;
  // Runs one phase. Earlier phases must already be done (their nets frozen).
  PhaseReport run_phase(PhaseId phase);
  // All phases in order; stops at the first failed phase.
  ExperimentResult run_all();

  BacAgent& ll() { return ll_; }
  BacAgent& hl() { return hl_; }
  const BacAgent& ll() const { return ll_; }
  const BacAgent& hl() const { return hl_; }
  const ExperimentConfig& config() const { return cfg_; }
  const HierarchyConfig& hierarchy() const { return hcfg_; }
  const std::vector<TrialRecord>& ll_trials() const { return ll_trials_; }
  const std::vector<TrialRecord>& hl_trials() const { return hl_trials_; }

  // Noise-free low-level action for the given plant state and plan.
  double ll_clean_action(const CartPoleState& s, const PlanSignal& plan) const;
  // Plan as fed to the LL action and critic nets.
  Vector ll_plan_input(const PlanSignal& plan) const;
  // Normalized state as the LL sees it.
  Vector ll_observe(const CartPoleState& s) const;
  LowLevelPolicy frozen_ll_policy() const;

  // Holds one plan for `steps` steps from `start` with no failure checks and
  // returns mean |theta - Y| over the final `tail` steps (radians).
  double evaluate_tracking(const CartPoleState& start, double plan,
                           std::size_t steps, std::size_t tail) const;

 private:
  PhaseReport model_phase(PhaseId phase, const PhaseBudget& budget);
  PhaseReport ll_control_phase(PhaseId phase, const PhaseBudget& budget);
  PhaseReport hl_model_phase(PhaseId phase, const PhaseBudget& budget);
  PhaseReport hl_control_phase(PhaseId phase, const PhaseBudget& budget);
  double draw_plan(const Interval& range);
  // Failure limits while the low level trains (phases I and II). Network
  // inputs are always normalized by the plant bounds.
  Bounds ll_training_bounds() const;

  ExperimentConfig cfg_;
  HierarchyConfig hcfg_;
  std::uint64_t seed_;
  PhysicsParams phys_;
  Bounds bounds_;
  int sign_;
  Rng init_rng_;
  Rng noise_rng_;
  Rng plan_rng_;
  Rng start_rng_;
  Rng explore_rng_;
  BacAgent ll_;
  BacAgent hl_;
  std::vector<TrialRecord> ll_trials_;
  std::vector<TrialRecord> hl_trials_;
};

ExperimentResult run_two_level(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace bac
