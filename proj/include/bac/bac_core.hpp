#pragma once

#include <cstddef>
#include <optional>

#include "bac/ffnet.hpp"
#include "bac/rng.hpp"

namespace bac {

struct TDParams {
  double gamma = 0.95;
  double critic_lr = 0.02;
  double action_lr = 0.01;

  void validate() const;
};

// System-identification net: input (state, action), output predicted change
// of state, both in normalized coordinates.
struct ModelTrainer {
  NetworkWeights net;
  double k_m = 1.0;
  TrainingHyper hyper;
};

struct NoiseParams {
  double sigma = 0.05;
};

enum class BacVariant { kIndirect, kDirect };

// What happens to the TD target when the transition ends in a failure.
// kZero bootstraps nothing (target = r). kAbsorbing treats the failed state
// as repeating its reinforcement forever (target = r / (1 - gamma)).
enum class TerminalMode { kZero, kAbsorbing };

double td_error(double r_next, double p_next, double p_now, double gamma);

// Critic ascends td_err * grad p at the cached (state_t) forward pass.
// hyper.learning_rate is the critic learning rate.
void train_critic_step(NetworkWeights& critic, TrainingHyper& hyper,
                       const ForwardCache& cache_now, double td_err);

// One momentum-SGD step on 0.5 * k_m * |observed - predicted|^2. Returns the
// prediction error (observed - predicted) before the step.
Vector train_model_step(ModelTrainer& model, const Vector& model_input,
                        const Vector& observed_delta);

struct ActionSelection {
  Vector noisy;
  ForwardCache clean;
};

ActionSelection select_action(const NetworkWeights& action_net,
                              const Vector& input, const NoiseParams& noise,
                              Rng& rng);

// d p(critic([state + model(state, a), critic_extra])) / d a, evaluated at the
// clean action. state is the normalized plant state; critic_extra holds any
// trailing critic inputs (the plan, for a low-level critic).
Vector action_gradient_indirect(const NetworkWeights& critic,
                                const NetworkWeights& model,
                                const Vector& state, const Vector& clean_action,
                                const Vector& critic_extra = Vector());

// d critic([critic_input, a]) / d a at the clean action.
Vector action_gradient_direct(const NetworkWeights& critic,
                              const Vector& critic_input,
                              const Vector& clean_action);

// Ascends p: backprop the action gradient into the action weights.
// hyper.learning_rate is the action learning rate.
void train_action_step(NetworkWeights& action_net, TrainingHyper& hyper,
                       const ForwardCache& clean_cache,
                       const Vector& action_grad);

Vector concat(const Vector& a, const Vector& b);

// Layout of one BAC level. state_dim counts the plant-state inputs, extra_dim
// the trailing inputs shared by the action net and critic (plans).
struct AgentShape {
  BacVariant variant = BacVariant::kIndirect;
  std::size_t state_dim = 4;
  std::size_t extra_dim = 0;
  std::size_t action_dim = 1;
  std::size_t n_hidden = 7;
  bool critic_sees_extra = true;
};

struct AgentParams {
  TDParams td;
  double momentum = 0.0;
  NoiseParams noise;
  TerminalMode terminal = TerminalMode::kAbsorbing;
  double init_scale = 0.3;
  double model_lr = 0.1;
  double k_m = 1.0;
  // Actuator saturation in action units; 0 disables. Past the limit the
  // plant no longer responds, so the action gradient may only pull back.
  double action_limit = 0.0;
};

struct Transition {
  Vector state;       // normalized s_t
  Vector extra;       // plan held at t (may be empty)
  ActionSelection decision;
  double reward = 0.0;  // already multiplied by the reward sign
  Vector next_state;
  Vector next_extra;
  bool terminal = false;
};

struct LearnStats {
  double td_error = 0.0;
  Vector action_grad;
};

// One Backpropagated Adaptive Critic: action, critic and (Indirect) model.
class BacAgent {
 public:
  BacAgent(const AgentShape& shape, const AgentParams& params, Rng& init_rng);

  const AgentShape& shape() const { return shape_; }
  const AgentParams& params() const { return params_; }

  Vector action_input(const Vector& state, const Vector& extra) const;
  Vector critic_input(const Vector& state, const Vector& extra,
                      const Vector& action) const;
  Vector model_input(const Vector& state, const Vector& action) const;

  ActionSelection act(const Vector& state, const Vector& extra, Rng& noise_rng) const;
  Vector clean_action(const Vector& state, const Vector& extra) const;
  double value(const Vector& state, const Vector& extra, const Vector& action) const;

  // Gradient of p w.r.t. the action outputs at the clean action.
  Vector action_gradient(const Vector& state, const Vector& extra,
                         const Vector& clean_action) const;
  // As above, evaluated at the saturated action when action_limit is set.
  Vector saturated_action_gradient(const Vector& state, const Vector& extra,
                                   const Vector& clean_action) const;

  // TD(0) critic step plus action step (whichever is not frozen). The action
  // gradient is taken before the critic moves.
  LearnStats learn(const Transition& tr);

  // Critic half of learn(); returns the TD error.
  double update_critic(const Transition& tr);

  // Model identification step on an observed normalized state change.
  Vector learn_model(const Vector& state, const Vector& action,
                     const Vector& observed_delta);

  NetworkWeights& action_net() { return action_; }
  NetworkWeights& critic_net() { return critic_; }
  const NetworkWeights& action_net() const { return action_; }
  const NetworkWeights& critic_net() const { return critic_; }
  bool has_model() const { return model_.has_value(); }
  ModelTrainer& model() { return *model_; }
  const ModelTrainer& model() const { return *model_; }
  TrainingHyper& action_hyper() { return action_hyper_; }
  TrainingHyper& critic_hyper() { return critic_hyper_; }

  bool action_frozen = false;
  bool critic_frozen = false;
  bool model_frozen = false;

 private:
  AgentShape shape_;
  AgentParams params_;
  NetworkWeights action_;
  NetworkWeights critic_;
  std::optional<ModelTrainer> model_;
  TrainingHyper action_hyper_;
  TrainingHyper critic_hyper_;
};

}  // namespace bac
