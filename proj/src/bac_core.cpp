#include "bac/bac_core.hpp"

#include <cmath>

namespace bac {

void TDParams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(critic_lr > 0.0)) throw ConfigError("critic_lr must be > 0");
  if (!(action_lr > 0.0)) throw ConfigError("action_lr must be > 0");
}

double td_error(double r_next, double p_next, double p_now, double gamma) {
  return r_next + gamma * p_next - p_now;
}

void train_critic_step(NetworkWeights& critic, TrainingHyper& hyper,
                       const ForwardCache& cache_now, double td_err) {
  if (!std::isfinite(td_err)) throw TrainingFault("non-finite TD error");
  const Vector err = Vector::Constant(critic.n_out(), td_err);
  apply_update(critic, backprop_weight_grad(critic, cache_now, err), hyper, +1);
}

Vector train_model_step(ModelTrainer& model, const Vector& model_input,
                        const Vector& observed_delta) {
  const ForwardCache cache = forward(model.net, model_input);
  if (observed_delta.size() != cache.output.size())
    throw ConfigError("observed_delta length does not match model output");
  const Vector error = observed_delta - cache.output;
  apply_update(model.net, backprop_weight_grad(model.net, cache, model.k_m * error),
               model.hyper, +1);
  return error;
}

ActionSelection select_action(const NetworkWeights& action_net,
                              const Vector& input, const NoiseParams& noise,
                              Rng& rng) {
  ActionSelection sel;
  sel.clean = forward(action_net, input);
  sel.noisy = sel.clean.output;
  if (noise.sigma > 0.0)
    for (Eigen::Index k = 0; k < sel.noisy.size(); ++k)
      sel.noisy(k) += noise.sigma * rng.normal();
  return sel;
}

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

Vector action_gradient_indirect(const NetworkWeights& critic,
                                const NetworkWeights& model,
                                const Vector& state, const Vector& clean_action,
                                const Vector& critic_extra) {
  const ForwardCache model_cache = forward(model, concat(state, clean_action));
  const Vector predicted_next = state + model_cache.output;
  const ForwardCache critic_cache =
      forward(critic, concat(predicted_next, critic_extra));
  const Vector one = Vector::Ones(critic.n_out());
  // dp/d(next state) equals dp/d(predicted delta).
  const Vector dp_dnext =
      backprop_input_grad(critic, critic_cache, one).head(state.size());
  return backprop_input_grad(model, model_cache, dp_dnext)
      .tail(clean_action.size());
}

Vector action_gradient_direct(const NetworkWeights& critic,
                              const Vector& critic_input,
                              const Vector& clean_action) {
  const ForwardCache cache = forward(critic, concat(critic_input, clean_action));
  const Vector one = Vector::Ones(critic.n_out());
  return backprop_input_grad(critic, cache, one).tail(clean_action.size());
}

void train_action_step(NetworkWeights& action_net, TrainingHyper& hyper,
                       const ForwardCache& clean_cache,
                       const Vector& action_grad) {
  apply_update(action_net, backprop_weight_grad(action_net, clean_cache, action_grad),
               hyper, +1);
}

BacAgent::BacAgent(const AgentShape& shape, const AgentParams& params,
                   Rng& init_rng)
    : shape_(shape), params_(params) {
  params_.td.validate();
  if (params_.noise.sigma < 0.0) throw ConfigError("sigma must be >= 0");
  const std::size_t extra = shape.critic_sees_extra ? shape.extra_dim : 0;

  NetworkConfig action_cfg{shape.state_dim + shape.extra_dim, shape.n_hidden,
                           shape.action_dim};
  NetworkConfig critic_cfg{shape.state_dim + extra, shape.n_hidden, 1};
  if (shape.variant == BacVariant::kDirect) critic_cfg.n_in += shape.action_dim;

  // Init order (action, critic, model) is fixed for reproducibility.
  action_ = NetworkWeights::random(action_cfg, init_rng, params.init_scale);
  critic_ = NetworkWeights::random(critic_cfg, init_rng, params.init_scale);
  if (shape.variant == BacVariant::kIndirect) {
    NetworkConfig model_cfg{shape.state_dim + shape.action_dim, shape.n_hidden,
                            shape.state_dim};
    ModelTrainer m;
    m.net = NetworkWeights::random(model_cfg, init_rng, params.init_scale);
    m.k_m = params.k_m;
    m.hyper.learning_rate = params.model_lr;
    m.hyper.momentum_coeff = params.momentum;
    m.hyper.validate();
    model_ = std::move(m);
  }
  action_hyper_.learning_rate = params.td.action_lr;
  action_hyper_.momentum_coeff = params.momentum;
  critic_hyper_.learning_rate = params.td.critic_lr;
  critic_hyper_.momentum_coeff = params.momentum;
  action_hyper_.validate();
}

Vector BacAgent::action_input(const Vector& state, const Vector& extra) const {
  return shape_.extra_dim == 0 ? state : concat(state, extra);
}

Vector BacAgent::critic_input(const Vector& state, const Vector& extra,
                              const Vector& action) const {
  Vector in = shape_.critic_sees_extra && shape_.extra_dim > 0
                  ? concat(state, extra)
                  : state;
  if (shape_.variant == BacVariant::kDirect) in = concat(in, action);
  return in;
}

Vector BacAgent::model_input(const Vector& state, const Vector& action) const {
  return concat(state, action);
}

ActionSelection BacAgent::act(const Vector& state, const Vector& extra,
                              Rng& noise_rng) const {
  return select_action(action_, action_input(state, extra), params_.noise,
                       noise_rng);
}

Vector BacAgent::clean_action(const Vector& state, const Vector& extra) const {
  return forward(action_, action_input(state, extra)).output;
}

double BacAgent::value(const Vector& state, const Vector& extra,
                       const Vector& action) const {
  return forward(critic_, critic_input(state, extra, action)).output(0);
}

Vector BacAgent::action_gradient(const Vector& state, const Vector& extra,
                                 const Vector& clean) const {
  const Vector crit_extra =
      shape_.critic_sees_extra && shape_.extra_dim > 0 ? extra : Vector();
  if (shape_.variant == BacVariant::kIndirect)
    return action_gradient_indirect(critic_, model_->net, state, clean, crit_extra);
  return action_gradient_direct(critic_, concat(state, crit_extra), clean);
}

double BacAgent::update_critic(const Transition& tr) {
  const double gamma = params_.td.gamma;
  const ForwardCache now =
      forward(critic_, critic_input(tr.state, tr.extra, tr.decision.noisy));
  double p_next = 0.0;
  if (tr.terminal) {
    if (params_.terminal == TerminalMode::kAbsorbing)
      p_next = tr.reward / (1.0 - gamma);
  } else {
    Vector next_action;
    if (shape_.variant == BacVariant::kDirect)
      next_action = clean_action(tr.next_state, tr.next_extra);
    p_next = value(tr.next_state, tr.next_extra, next_action);
  }
  const double td = td_error(tr.reward, p_next, now.output(0), gamma);
  if (!critic_frozen) train_critic_step(critic_, critic_hyper_, now, td);
  return td;
}

Vector BacAgent::saturated_action_gradient(const Vector& state, const Vector& extra,
                                           const Vector& clean) const {
  const double lim = params_.action_limit;
  if (lim <= 0.0) return action_gradient(state, extra, clean);
  Vector g = action_gradient(state, extra, clean.cwiseMax(-lim).cwiseMin(lim));
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (std::abs(clean(i)) > lim && g(i) * clean(i) > 0.0) g(i) = 0.0;
  return g;
}

LearnStats BacAgent::learn(const Transition& tr) {
  LearnStats stats;
  if (!action_frozen)
    stats.action_grad =
        saturated_action_gradient(tr.state, tr.extra, tr.decision.clean.output);
  stats.td_error = update_critic(tr);
  if (!action_frozen)
    train_action_step(action_, action_hyper_, tr.decision.clean, stats.action_grad);
  return stats;
}

Vector BacAgent::learn_model(const Vector& state, const Vector& action,
                             const Vector& observed_delta) {
  if (!model_) throw ConfigError("Direct BAC has no model network");
  if (model_frozen) return observed_delta - forward(model_->net, model_input(state, action)).output;
  return train_model_step(*model_, model_input(state, action), observed_delta);
}

}  // namespace bac
