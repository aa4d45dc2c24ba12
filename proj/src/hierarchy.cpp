#include "bac/hierarchy.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bac/response_induction.hpp"

namespace bac {
namespace {

TerminalReason reason_for(FailureKind k) {
  return k == FailureKind::kCartPosition ? TerminalReason::kFailureX
                                         : TerminalReason::kFailureTheta;
}

// Fixed-length running mean.
class SlidingMean {
 public:
  explicit SlidingMean(std::size_t window) : window_(window) {}
  void push(double v) {
    values_.push_back(v);
    sum_ += v;
    if (values_.size() > window_) {
      sum_ -= values_.front();
      values_.pop_front();
    }
  }
  bool full() const { return values_.size() >= window_; }
  double mean() const {
    return values_.empty() ? std::numeric_limits<double>::infinity()
                           : sum_ / static_cast<double>(values_.size());
  }

 private:
  std::size_t window_;
  std::deque<double> values_;
  double sum_ = 0.0;
};

AgentShape ll_shape(const ExperimentConfig& cfg, const HierarchyConfig& h) {
  AgentShape s;
  s.variant = cfg.is_indirect() ? BacVariant::kIndirect : BacVariant::kDirect;
  s.state_dim = 4;
  s.extra_dim = h.plan_dim;
  s.action_dim = 1;
  s.n_hidden = cfg.n_hidden;
  s.critic_sees_extra = cfg.ll_critic_sees_plan;
  return s;
}

AgentShape hl_shape(const ExperimentConfig& cfg, const HierarchyConfig& h) {
  AgentShape s;
  s.variant = cfg.is_indirect() ? BacVariant::kIndirect : BacVariant::kDirect;
  s.state_dim = 4;
  s.extra_dim = 0;
  s.action_dim = h.plan_dim;
  s.n_hidden = cfg.n_hidden;
  return s;
}

// Plans leave the high level clipped to the range the layers below were
// trained on: the low-level training range for an explicit role, the HL
// model's range under response induction.
double plan_limit(const ExperimentConfig& cfg) {
  const Interval r = cfg.ll_mode == LLMode::kSharedExternal ? cfg.plan_range_hl_model
                                                            : cfg.plan_range_ll;
  return std::max(std::abs(r.lo), std::abs(r.hi));
}

AgentParams hl_params(const ExperimentConfig& cfg) {
  AgentParams p = cfg.agent_params();
  p.td.gamma = cfg.effective_hl_gamma();
  p.td.action_lr = cfg.hl_action_lr.value_or(p.td.action_lr);
  p.td.critic_lr = cfg.hl_critic_lr.value_or(p.td.critic_lr);
  p.noise.sigma = cfg.hl_sigma.value_or(p.noise.sigma);
  p.init_scale = cfg.hl_init_scale.value_or(p.init_scale);
  p.action_limit = plan_limit(cfg);
  return p;
}

}  // namespace

HierarchyConfig HierarchyConfig::from(const ExperimentConfig& config) {
  HierarchyConfig h;
  h.n_ratio = config.n_ratio;
  h.plan_range_ll_training = config.plan_range_ll;
  h.plan_range_hl_model = config.plan_range_hl_model;
  h.validate();
  return h;
}

void HierarchyConfig::validate() const {
  if (n_ratio < 2) throw ConfigError("n_ratio must be >= 2");
  if (plan_dim < 1) throw ConfigError("plan_dim must be >= 1");
}

std::string to_string(PhaseId p) {
  switch (p) {
    case PhaseId::kI: return "I";
    case PhaseId::kII: return "II";
    case PhaseId::kIII: return "III";
    case PhaseId::kIV: return "IV";
  }
  return "?";
}

double ll_reinforcement_explicit(const PlanSignal& plan, double theta) {
  const double e = plan.y(0) - theta;
  return e * e;
}

bool hl_schedule(std::size_t step, const HierarchyConfig& config) {
  return step % config.n_ratio == 0;
}

Vector ll_input(const Vector& normalized_state, const PlanSignal& plan) {
  return concat(normalized_state, plan.y);
}

HlTransition hl_transition_collect(const LowLevelPolicy& ll,
                                   const CartPoleState& start,
                                   const PlanSignal& plan,
                                   const PhysicsParams& physics,
                                   const Bounds& bounds,
                                   ReinforcementMode mode,
                                   std::size_t max_steps) {
  HlTransition tr;
  tr.start = start;
  tr.end = start;
  tr.plan = plan.y;
  CartPoleState s = start;
  for (std::size_t k = 0; k < max_steps; ++k) {
    s = step(s, ll(s, plan, k), physics);
    ++tr.steps;
    tr.reinforcement_accumulated += reinforcement(s, bounds, mode);
    tr.failure = failure_kind(s, bounds);
    if (tr.failure != FailureKind::kNone) {
      tr.truncated = true;
      break;
    }
  }
  tr.end = s;
  tr.reinforcement_sampled = reinforcement(s, bounds, mode);
  return tr;
}

TwoLevelExperiment::TwoLevelExperiment(const ExperimentConfig& config,
                                       std::uint64_t seed)
    : cfg_(config),
      hcfg_(HierarchyConfig::from(config)),
      seed_(seed),
      phys_(config.physics()),
      bounds_(config.bounds()),
      sign_(config.effective_reward_sign()),
      init_rng_(make_stream(seed, Stream::kInit)),
      noise_rng_(make_stream(seed, Stream::kNoise)),
      plan_rng_(make_stream(seed, Stream::kPlan)),
      start_rng_(make_stream(seed, Stream::kStart)),
      explore_rng_(make_stream(seed, Stream::kExplore)),
      ll_(ll_shape(config, hcfg_), config.agent_params(), init_rng_),
      hl_(hl_shape(config, hcfg_), hl_params(config), init_rng_) {
  cfg_.validate();
}

std::vector<PhaseId> TwoLevelExperiment::phases() const {
  if (cfg_.is_indirect()) return {PhaseId::kI, PhaseId::kII, PhaseId::kIII, PhaseId::kIV};
  return {PhaseId::kI, PhaseId::kII};
}

double TwoLevelExperiment::draw_plan(const Interval& range) {
  return plan_rng_.uniform(range.lo, range.hi);
}

Bounds TwoLevelExperiment::ll_training_bounds() const {
  if (cfg_.ll_mode == LLMode::kSharedExternal) return bounds_;
  // Explicit role: only the pole matters to the low level, and plans may
  // command angles past the plant's own pole limit.
  return {std::numeric_limits<double>::infinity(), deg_to_rad(cfg_.ll_theta_limit_deg)};
}

Vector TwoLevelExperiment::ll_observe(const CartPoleState& s) const {
  Vector x = normalize(s, bounds_);
  if (!cfg_.effective_ll_observes_cart()) x.head(2).setZero();
  return x;
}

Vector TwoLevelExperiment::ll_plan_input(const PlanSignal& plan) const {
  return plan.y * cfg_.ll_plan_input_scale;
}

double TwoLevelExperiment::ll_clean_action(const CartPoleState& s,
                                           const PlanSignal& plan) const {
  return ll_.clean_action(ll_observe(s), ll_plan_input(plan))(0);
}

LowLevelPolicy TwoLevelExperiment::frozen_ll_policy() const {
  return [this](const CartPoleState& s, const PlanSignal& plan, std::size_t) {
    return ll_clean_action(s, plan);
  };
}

double TwoLevelExperiment::evaluate_tracking(const CartPoleState& start,
                                             double plan, std::size_t steps,
                                             std::size_t tail) const {
  PlanSignal p{Vector::Constant(1, plan), 0};
  CartPoleState s = start;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    s = step(s, ll_clean_action(s, p), phys_);
    if (!s.finite()) return std::numeric_limits<double>::infinity();
    if (k + tail >= steps) {
      sum += std::abs(s.theta - plan);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

PhaseReport TwoLevelExperiment::run_phase(PhaseId phase) {
  const bool indirect = cfg_.is_indirect();
  if (indirect) {
    switch (phase) {
      case PhaseId::kI:
        return model_phase(phase, cfg_.phase1);
      case PhaseId::kII:
        if (!ll_.model_frozen) throw std::logic_error("phase II needs phase I first");
        return ll_control_phase(phase, cfg_.phase2);
      case PhaseId::kIII:
        if (!ll_.action_frozen) throw std::logic_error("phase III needs phase II first");
        return hl_model_phase(phase, cfg_.phase3);
      case PhaseId::kIV:
        if (!hl_.model_frozen) throw std::logic_error("phase IV needs phase III first");
        return hl_control_phase(phase, cfg_.phase4);
    }
  } else {
    switch (phase) {
      case PhaseId::kI:
        return ll_control_phase(phase, cfg_.phase2);
      case PhaseId::kII:
        if (!ll_.action_frozen) throw std::logic_error("phase II needs phase I first");
        return hl_control_phase(phase, cfg_.phase4);
      default:
        throw std::logic_error("the Direct two-level BAC has only phases I and II");
    }
  }
  throw std::logic_error("unknown phase");
}

PhaseReport TwoLevelExperiment::model_phase(PhaseId phase, const PhaseBudget& budget) {
  PhaseReport rep{to_string(phase)};
  const Bounds limits = ll_training_bounds();
  SlidingMean err(cfg_.model_error_window);
  while (!rep.converged && rep.trials < budget.trials && rep.steps < budget.steps) {
    CartPoleState s = random_initial_state(start_rng_, bounds_, cfg_.init_fraction);
    ++rep.trials;
    while (rep.steps < budget.steps) {
      Vector a(1);
      a << explore_rng_.uniform(-1.0, 1.0);
      const CartPoleState next = step(s, a(0), phys_);
      const Vector x = ll_observe(s);
      err.push(ll_.learn_model(x, a, ll_observe(next) - x).cwiseAbs().mean());
      ++rep.steps;
      if (err.full() && err.mean() < cfg_.model_error_threshold) {
        rep.converged = true;
        break;
      }
      if (is_failure(next, limits)) break;
      s = next;
    }
  }
  rep.final_metric = err.mean();
  ll_.model_frozen = true;
  return rep;
}

PhaseReport TwoLevelExperiment::ll_control_phase(PhaseId phase,
                                                 const PhaseBudget& budget) {
  PhaseReport rep{to_string(phase)};
  const bool ri = cfg_.ll_mode == LLMode::kSharedExternal;
  const RIParams rip = ri_params_from(cfg_);
  const Bounds limits = ll_training_bounds();
  const std::size_t cap = ri ? cfg_.success_steps : cfg_.ll_trial_steps;
  const std::size_t window = cfg_.bin_size;
  SlidingMean tracking(window);
  SlidingMean trial_steps(window);
  SlidingMean trial_delta(window);
  ll_trials_.clear();

  while (!rep.converged && rep.trials < budget.trials && rep.steps < budget.steps) {
    CartPoleState s = random_initial_state(start_rng_, bounds_, cfg_.init_fraction);
    TrialRecord rec{rep.trials + 1, 0, TerminalReason::kFailureTheta, 0.0};
    PlanSignal plan{Vector::Constant(1, draw_plan(hcfg_.plan_range_ll_training)), 0};
    Vector x = ll_observe(s);
    double track_sum = 0.0;
    std::size_t track_n = 0;
    double all_sum = 0.0;
    double delta_sum = 0.0;

    while (true) {
      Transition tr;
      tr.state = x;
      tr.extra = ll_plan_input(plan);
      tr.decision = ll_.act(x, ll_plan_input(plan), noise_rng_);
      PlanSensitivity sens;
      if (ri) {
        sens = plan_sensitivity(ll_, x, ll_plan_input(plan), tr.decision.clean, rip);
        delta_sum += std::abs(sens.delta_plan(0));
      }
      const CartPoleState next = step(s, tr.decision.noisy(0), phys_);
      ++rec.steps;
      ++rep.steps;

      const FailureKind fk = failure_kind(next, limits);
      tr.reward = ri ? sign_ * reinforcement(next, bounds_, cfg_.reward_mode)
                     : -ll_reinforcement_explicit(plan, next.theta);
      tr.terminal = fk != FailureKind::kNone;
      tr.next_state = ll_observe(next);
      all_sum += std::abs(next.theta - plan.y(0));
      if (rec.steps - plan.issued_at_step > hcfg_.n_ratio / 2) {
        track_sum += std::abs(next.theta - plan.y(0));
        ++track_n;
      }

      const bool capped = !tr.terminal && rec.steps >= cap;
      const bool out_of_budget = rep.steps >= budget.steps;
      PlanSignal next_plan = plan;
      if (!tr.terminal && !capped && hl_schedule(rec.steps, hcfg_))
        next_plan = {Vector::Constant(1, draw_plan(hcfg_.plan_range_ll_training)),
                     rec.steps};
      tr.next_extra = ll_plan_input(next_plan);

      if (ri) {
        const Vector feedback =
            rip.rule == RiRule::kActionOutput
                ? ll_.saturated_action_gradient(x, ll_plan_input(plan), tr.decision.clean.output)
                : sens.feedback;
        ll_.update_critic(tr);
        apply_update(ll_.action_net(),
                     ri_weight_gradient(ll_.action_net(), tr.decision.clean,
                                        feedback, sens, rip),
                     ll_.action_hyper(), +1);
      } else {
        ll_.learn(tr);
      }

      if (tr.terminal) {
        rec.reason = reason_for(fk);
        break;
      }
      if (capped) {
        rec.reason = TerminalReason::kSuccess;
        break;
      }
      if (out_of_budget) {
        rec.reason = TerminalReason::kBudget;
        break;
      }
      s = next;
      x = tr.next_state;
      plan = next_plan;
    }

    rec.mean_delta_plan = delta_sum / static_cast<double>(rec.steps);
    ll_trials_.push_back(rec);
    ++rep.trials;
    trial_steps.push(static_cast<double>(rec.steps));
    trial_delta.push(rec.mean_delta_plan);
    // Trials too short to settle are scored over every step.
    tracking.push(track_n ? track_sum / static_cast<double>(track_n)
                          : all_sum / static_cast<double>(rec.steps));
    if (ri) {
      rep.final_metric = trial_delta.mean();
      rep.converged = trial_steps.full() &&
                      trial_steps.mean() >= static_cast<double>(cfg_.ri_stable_steps) &&
                      std::abs(trial_delta.mean()) >= 0.5 * cfg_.k1;
    } else {
      rep.final_metric = tracking.mean();
      rep.converged =
          tracking.full() && tracking.mean() < deg_to_rad(cfg_.tracking_threshold_deg);
    }
  }
  ll_.action_frozen = true;
  ll_.critic_frozen = true;
  return rep;
}

PhaseReport TwoLevelExperiment::hl_model_phase(PhaseId phase,
                                               const PhaseBudget& budget) {
  PhaseReport rep{to_string(phase)};
  const Interval range = cfg_.ll_mode == LLMode::kSharedExternal
                             ? hcfg_.plan_range_hl_model
                             : hcfg_.plan_range_ll_training;
  const LowLevelPolicy policy = frozen_ll_policy();
  SlidingMean err(std::max<std::size_t>(1, cfg_.model_error_window / hcfg_.n_ratio));
  while (!rep.converged && rep.trials < budget.trials && rep.steps < budget.steps) {
    CartPoleState s = random_initial_state(start_rng_, bounds_, cfg_.init_fraction);
    ++rep.trials;
    while (rep.steps < budget.steps) {
      const PlanSignal plan{Vector::Constant(1, draw_plan(range)), 0};
      const HlTransition tr =
          hl_transition_collect(policy, s, plan, phys_, bounds_, cfg_.reward_mode,
                                std::min(hcfg_.n_ratio, budget.steps - rep.steps));
      rep.steps += tr.steps;
      if (!tr.truncated && tr.steps == hcfg_.n_ratio) {
        const Vector x = normalize(s, bounds_);
        err.push(hl_.learn_model(x, plan.y, normalize(tr.end, bounds_) - x)
                     .cwiseAbs()
                     .mean());
        if (err.full() && err.mean() < cfg_.hl_model_error_threshold) {
          rep.converged = true;
          break;
        }
      }
      if (tr.truncated) break;
      s = tr.end;
    }
  }
  rep.final_metric = err.mean();
  hl_.model_frozen = true;
  return rep;
}

PhaseReport TwoLevelExperiment::hl_control_phase(PhaseId phase,
                                                 const PhaseBudget& budget) {
  PhaseReport rep{to_string(phase)};
  const bool ri = cfg_.ll_mode == LLMode::kSharedExternal;
  const RIParams rip = ri_params_from(cfg_);
  double delta_sum = 0.0;
  // Frozen LL, optionally logging its plan sensitivity on every step.
  const LowLevelPolicy policy = [&](const CartPoleState& s, const PlanSignal& plan,
                                    std::size_t) {
    const Vector x = ll_observe(s);
    const ForwardCache cache = forward(ll_.action_net(), ll_.action_input(x, ll_plan_input(plan)));
    if (ri) delta_sum += std::abs(plan_sensitivity(ll_, x, ll_plan_input(plan), cache, rip).delta_plan(0));
    return cache.output(0);
  };
  hl_trials_.clear();

  while (!rep.converged && rep.trials < budget.trials && rep.steps < budget.steps) {
    CartPoleState s = random_initial_state(start_rng_, bounds_, cfg_.init_fraction);
    TrialRecord rec{rep.trials + 1, 0, TerminalReason::kFailureTheta, 0.0};
    delta_sum = 0.0;
    while (true) {
      Transition t;
      t.state = normalize(s, bounds_);
      t.decision = hl_.act(t.state, Vector(), noise_rng_);
      const double lim = plan_limit(cfg_);
      const PlanSignal plan{t.decision.noisy.cwiseMax(-lim).cwiseMin(lim), rec.steps};
      const std::size_t room = std::min({hcfg_.n_ratio, cfg_.success_steps - rec.steps,
                                         budget.steps - rep.steps});
      const HlTransition tr = hl_transition_collect(policy, s, plan, phys_, bounds_,
                                                    cfg_.reward_mode, room);
      rec.steps += tr.steps;
      rep.steps += tr.steps;
      const double raw = cfg_.hl_reinforcement == HlReinforcement::kSampled
                             ? tr.reinforcement_sampled
                             : tr.reinforcement_accumulated;
      t.reward = sign_ * raw;
      t.next_state = normalize(tr.end, bounds_);
      t.terminal = tr.truncated;
      hl_.learn(t);
      if (tr.truncated) {
        rec.reason = reason_for(tr.failure);
        break;
      }
      if (rec.steps >= cfg_.success_steps) {
        rec.reason = TerminalReason::kSuccess;
        break;
      }
      if (rep.steps >= budget.steps) {
        rec.reason = TerminalReason::kBudget;
        break;
      }
      s = tr.end;
    }
    rec.mean_delta_plan = ri ? delta_sum / static_cast<double>(rec.steps) : 0.0;
    hl_trials_.push_back(rec);
    ++rep.trials;
    rep.converged = rec.reason == TerminalReason::kSuccess;
  }
  rep.final_metric = hl_trials_.empty() ? 0.0 : static_cast<double>(hl_trials_.back().steps);
  hl_.action_frozen = true;
  hl_.critic_frozen = true;
  return rep;
}

ExperimentResult TwoLevelExperiment::run_all() {
  ExperimentResult result;
  result.seed = seed_;
  try {
    for (PhaseId p : phases()) {
      const PhaseReport rep = run_phase(p);
      result.phases.push_back(rep);
      if (!rep.converged) {
        result.failure_reason = "phase " + rep.phase + " did not converge within budget";
        break;
      }
    }
    result.success = result.failure_reason.empty();
  } catch (const TrainingFault& e) {
    result.numeric_fault = true;
    result.failure_reason = std::string("numeric fault: ") + e.what();
    hl_trials_.push_back({hl_trials_.size() + 1, 1, TerminalReason::kFault, 0.0});
  }
  result.trials = hl_trials_;
  result.ll_trials = ll_trials_;
  result.series = smooth_series(ll_trials_, cfg_.bin_size);
  return result;
}

ExperimentResult run_two_level(const ExperimentConfig& config, std::uint64_t seed) {
  TwoLevelExperiment experiment(config, seed);
  return experiment.run_all();
}

}  // namespace bac
