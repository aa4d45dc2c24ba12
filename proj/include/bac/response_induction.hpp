#pragma once

#include <cstddef>
#include <vector>

#include "bac/bac_core.hpp"
#include "bac/config.hpp"
#include "bac/ffnet.hpp"
#include "bac/harness.hpp"

namespace bac {

class TwoLevelExperiment;

struct RIParams {
  double k1 = 0.35;
  double k2 = 0.14;
  std::vector<std::size_t> plan_input_indices{4};  // LL action-net input units
  RiRule rule = RiRule::kPrinted;

  std::size_t n_p() const { return plan_input_indices.size(); }
  void validate(std::size_t action_inputs) const;
};

struct PlanSensitivity {
  Vector delta_plan;     // dp/dY_i at each plan input unit
  Vector hidden_deltas;  // delta_j of the same backward pass
  Vector feedback;       // error signal placed on the action outputs
};

// Backward pass through the low-level action net with the critic's feedback
// (dp/dy through model and critic, or through the critic alone for the
// Direct variant) on its outputs. kActionOutput puts 1 on every action output
// instead, which measures dy/dY.
PlanSensitivity plan_sensitivity(const BacAgent& ll, const Vector& state,
                                 const Vector& plan,
                                 const ForwardCache& clean_cache,
                                 const RIParams& ri);

// -(k1 / n_p) * sum_i exp(-delta_i^2 / k2^2); lies in [-k1, 0).
double influence_error(const Vector& delta_plan, const RIParams& ri);

// Induction term added to the gradient of a hidden->plan weight, before the
// learning rate: k1 k2 delta_i delta_j exp(-delta_i^2/k2^2) as published, or
// the exact influence-error gradient 2 k1/(n_p k2^2) delta_i delta_j
// exp(-delta_i^2/k2^2).
double induction_term(double delta_i, double delta_j, const RIParams& ri);

// Increment of one hidden->plan weight without momentum:
// lr * [delta_j Y_i + induction].
double ri_weight_update(double delta_j, double plan_value, double delta_i,
                        double learning_rate, const RIParams& ri);

// Standard action gradient for every weight, with the induction term added
// on hidden->plan connections only.
NetworkWeights ri_weight_gradient(const NetworkWeights& action_net,
                                  const ForwardCache& clean_cache,
                                  const Vector& critic_feedback,
                                  const PlanSensitivity& sensitivity,
                                  const RIParams& ri);

RIParams ri_params_from(const ExperimentConfig& config);

struct RiPhaseResult {
  PhaseReport report;
  std::vector<TrialRecord> trials;
  SmoothedSeries series;
};

// Phase II of a shared-reinforcement two-level run: runs the LL model phase
// first if the experiment has one and it has not been run.
RiPhaseResult ri_phase_driver(TwoLevelExperiment& experiment);

}  // namespace bac
