#include "bac/response_induction.hpp"

#include <cmath>

#include "bac/hierarchy.hpp"

namespace bac {

void RIParams::validate(std::size_t action_inputs) const {
  if (!(k1 > 0.0)) throw ConfigError("k1 must be > 0");
  if (!(k2 > 0.0)) throw ConfigError("k2 must be > 0");
  if (plan_input_indices.empty()) throw ConfigError("no plan inputs");
  for (auto i : plan_input_indices)
    if (i >= action_inputs) throw ConfigError("plan input index out of range");
}

PlanSensitivity plan_sensitivity(const BacAgent& ll, const Vector& state,
                                 const Vector& plan,
                                 const ForwardCache& clean_cache,
                                 const RIParams& ri) {
  const NetworkWeights& action = ll.action_net();
  ri.validate(action.n_in());
  PlanSensitivity out;
  if (ri.rule == RiRule::kActionOutput)
    out.feedback = Vector::Ones(action.n_out());
  else
    out.feedback = ll.saturated_action_gradient(state, plan, clean_cache.output);
  out.hidden_deltas = hidden_deltas(action, clean_cache, out.feedback);
  const Vector input_deltas = action.hidden_weights.transpose() * out.hidden_deltas;
  out.delta_plan.resize(static_cast<Eigen::Index>(ri.n_p()));
  for (std::size_t k = 0; k < ri.n_p(); ++k)
    out.delta_plan(static_cast<Eigen::Index>(k)) =
        input_deltas(static_cast<Eigen::Index>(ri.plan_input_indices[k]));
  return out;
}

double influence_error(const Vector& delta_plan, const RIParams& ri) {
  const double k2sq = ri.k2 * ri.k2;
  double sum = 0.0;
  for (double d : delta_plan) sum += std::exp(-d * d / k2sq);
  return -(ri.k1 / static_cast<double>(delta_plan.size())) * sum;
}

double induction_term(double delta_i, double delta_j, const RIParams& ri) {
  const double bowl = std::exp(-delta_i * delta_i / (ri.k2 * ri.k2));
  if (ri.rule == RiRule::kAnalytic)
    return 2.0 * ri.k1 / (static_cast<double>(ri.n_p()) * ri.k2 * ri.k2) *
           delta_i * delta_j * bowl;
  return ri.k1 * ri.k2 * delta_i * delta_j * bowl;
}

double ri_weight_update(double delta_j, double plan_value, double delta_i,
                        double learning_rate, const RIParams& ri) {
  return learning_rate * (delta_j * plan_value + induction_term(delta_i, delta_j, ri));
}

NetworkWeights ri_weight_gradient(const NetworkWeights& action_net,
                                  const ForwardCache& clean_cache,
                                  const Vector& critic_feedback,
                                  const PlanSensitivity& s,
                                  const RIParams& ri) {
  NetworkWeights grad = backprop_weight_grad(action_net, clean_cache, critic_feedback);
  for (std::size_t k = 0; k < ri.n_p(); ++k) {
    const auto i = static_cast<Eigen::Index>(ri.plan_input_indices[k]);
    const double delta_i = s.delta_plan(static_cast<Eigen::Index>(k));
    for (Eigen::Index j = 0; j < grad.hidden_weights.rows(); ++j)
      grad.hidden_weights(j, i) += induction_term(delta_i, s.hidden_deltas(j), ri);
  }
  return grad;
}

RIParams ri_params_from(const ExperimentConfig& config) {
  RIParams ri;
  ri.k1 = config.k1;
  ri.k2 = config.k2;
  ri.rule = config.ri_rule;
  return ri;
}

RiPhaseResult ri_phase_driver(TwoLevelExperiment& experiment) {
  if (experiment.config().ll_mode != LLMode::kSharedExternal)
    throw ConfigError("ri_phase_driver needs ll_mode = RI");
  const bool indirect = experiment.config().is_indirect();
  if (indirect && !experiment.ll().model_frozen) {
    const PhaseReport model = experiment.run_phase(PhaseId::kI);
    if (!model.converged) {
      RiPhaseResult r;
      r.report = model;
      return r;
    }
  }
  RiPhaseResult result;
  result.report = experiment.run_phase(indirect ? PhaseId::kII : PhaseId::kI);
  result.trials = experiment.ll_trials();
  result.series = smooth_series(result.trials, experiment.config().bin_size);
  return result;
}

}  // namespace bac
