#include <algorithm>
#include <cmath>

#include "bac/bac_core.hpp"
#include "bac/cartpole.hpp"
#include "bac/harness.hpp"

namespace bac {
namespace {

TerminalReason reason_for(FailureKind k) {
  return k == FailureKind::kCartPosition ? TerminalReason::kFailureX
                                         : TerminalReason::kFailureTheta;
}

// Random-action system identification; returns steps used.
std::size_t identify_model(BacAgent& agent, const ExperimentConfig& cfg,
                           Rng& start_rng, Rng& explore_rng,
                           PhaseReport& report) {
  const PhysicsParams phys = cfg.physics();
  const Bounds bounds = cfg.bounds();
  std::size_t steps = 0;
  double recent = 0.0;
  while (steps < cfg.model_train_steps) {
    CartPoleState s = random_initial_state(start_rng, bounds, cfg.init_fraction);
    ++report.trials;
    while (steps < cfg.model_train_steps) {
      Vector a(1);
      a << explore_rng.uniform(-1.0, 1.0);
      const CartPoleState next = step(s, a(0), phys);
      const Vector x = normalize(s, bounds);
      const Vector err = agent.learn_model(x, a, normalize(next, bounds) - x);
      recent = 0.99 * recent + 0.01 * err.cwiseAbs().mean();
      ++steps;
      if (is_failure(next, bounds)) break;
      s = next;
    }
  }
  report.steps = steps;
  report.final_metric = recent;
  report.converged = true;
  return steps;
}

}  // namespace

ExperimentResult run_single_level(const ExperimentConfig& cfg, std::uint64_t seed) {
  ExperimentResult result;
  result.seed = seed;

  const PhysicsParams phys = cfg.physics();
  const Bounds bounds = cfg.bounds();
  const int sign = cfg.effective_reward_sign();
  Rng init_rng = make_stream(seed, Stream::kInit);
  Rng noise_rng = make_stream(seed, Stream::kNoise);
  Rng start_rng = make_stream(seed, Stream::kStart);
  Rng explore_rng = make_stream(seed, Stream::kExplore);

  AgentShape shape;
  shape.variant = cfg.is_indirect() ? BacVariant::kIndirect : BacVariant::kDirect;
  shape.n_hidden = cfg.n_hidden;
  BacAgent agent(shape, cfg.agent_params(), init_rng);

  TrialRecord rec;
  try {
    if (agent.has_model()) {
      PhaseReport model_phase{"model"};
      identify_model(agent, cfg, start_rng, explore_rng, model_phase);
      agent.model_frozen = true;
      result.phases.push_back(model_phase);
    }

    PhaseReport control{"control"};
    const Vector no_extra;
    for (std::size_t trial = 1; trial <= cfg.effective_trial_limit(); ++trial) {
      CartPoleState s = random_initial_state(start_rng, bounds, cfg.init_fraction);
      rec = TrialRecord{trial, 0, TerminalReason::kFailureTheta, 0.0};
      Vector x = normalize(s, bounds);
      while (true) {
        Transition tr;
        tr.state = x;
        tr.decision = agent.act(x, no_extra, noise_rng);
        const CartPoleState next = step(s, tr.decision.noisy(0), phys);
        const FailureKind fk = failure_kind(next, bounds);
        tr.reward = sign * reinforcement(next, bounds, cfg.reward_mode);
        tr.next_state = normalize(next, bounds);
        tr.terminal = fk != FailureKind::kNone;
        agent.learn(tr);
        ++rec.steps;
        if (tr.terminal) {
          rec.reason = reason_for(fk);
          break;
        }
        if (rec.steps >= cfg.success_steps) {
          rec.reason = TerminalReason::kSuccess;
          break;
        }
        s = next;
        x = tr.next_state;
      }
      result.trials.push_back(rec);
      ++control.trials;
      control.steps += rec.steps;
      if (rec.reason == TerminalReason::kSuccess) {
        result.success = true;
        control.converged = true;
        break;
      }
    }
    result.phases.push_back(control);
    if (!result.success) result.failure_reason = "trial limit reached";
  } catch (const TrainingFault& e) {
    result.numeric_fault = true;
    result.failure_reason = std::string("numeric fault: ") + e.what();
    rec.trial_index = result.trials.size() + 1;
    rec.steps = std::max<std::size_t>(rec.steps, 1);
    rec.reason = TerminalReason::kFault;
    result.trials.push_back(rec);
  }
  result.series = smooth_series(result.trials, cfg.bin_size);
  return result;
}

}  // namespace bac
