#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "bac/rng.hpp"

namespace bac {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Bad shapes, bad parameter values, unparseable configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite quantity showed up during learning.
class TrainingFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetworkConfig {
  std::size_t n_in = 1;
  std::size_t n_hidden = 7;
  std::size_t n_out = 1;

  void validate() const;
};

// One Gaussian hidden layer, linear output layer. Row j of hidden_weights
// holds the connections from every input unit into hidden unit j.
struct NetworkWeights {
  Matrix hidden_weights;  // n_hidden x n_in
  Vector hidden_bias;     // n_hidden
  Matrix output_weights;  // n_out x n_hidden
  Vector output_bias;     // n_out

  static NetworkWeights zeros(const NetworkConfig& config);
  // Every parameter uniform in [-scale, scale].
  static NetworkWeights random(const NetworkConfig& config, Rng& rng,
                               double scale = 0.3);

  NetworkConfig config() const;
  std::size_t n_in() const { return static_cast<std::size_t>(hidden_weights.cols()); }
  std::size_t n_hidden() const { return static_cast<std::size_t>(hidden_weights.rows()); }
  std::size_t n_out() const { return static_cast<std::size_t>(output_weights.rows()); }

  bool all_finite() const;
  bool same_shape(const NetworkWeights& other) const;
  std::size_t parameter_count() const;

  // In-place elementwise helpers used by the update rules.
  NetworkWeights& operator+=(const NetworkWeights& other);
  NetworkWeights& operator*=(double scale);

  friend bool operator==(const NetworkWeights& a, const NetworkWeights& b);
};

struct ForwardCache {
  Vector input;
  Vector hidden_net;
  Vector hidden_act;
  Vector output;
};

// Momentum SGD state. The velocity starts empty and is sized on first use.
struct TrainingHyper {
  double learning_rate = 0.01;
  double momentum_coeff = 0.0;
  NetworkWeights velocity;

  void validate() const;
};

inline double gaussian(double a) { return std::exp(-a * a); }
inline double gaussian_slope(double a) { return -2.0 * a * std::exp(-a * a); }

ForwardCache forward(const NetworkWeights& weights, const Vector& input);

// dS/dnet_j for the scalar S = output_error . output. These are the hidden
// deltas reused by the plan-sensitivity measurement.
Vector hidden_deltas(const NetworkWeights& weights, const ForwardCache& cache,
                     const Vector& output_error);

// dS/dw for S = output_error . output, laid out like the weights.
NetworkWeights backprop_weight_grad(const NetworkWeights& weights,
                                    const ForwardCache& cache,
                                    const Vector& output_error);

// dS/dinput for S = output_error . output.
Vector backprop_input_grad(const NetworkWeights& weights,
                           const ForwardCache& cache,
                           const Vector& output_error);

// velocity <- momentum * velocity + sign * lr * grad; weights += velocity.
// Throws TrainingFault on a non-finite gradient and leaves both untouched.
void apply_update(NetworkWeights& weights, const NetworkWeights& grad,
                  TrainingHyper& hyper, int sign);

}  // namespace bac
