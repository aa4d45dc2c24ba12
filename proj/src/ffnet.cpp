#include "bac/ffnet.hpp"

#include <cmath>

namespace bac {
namespace {

void check_input(const NetworkWeights& w, const Vector& v, const char* what,
                 std::size_t expected) {
  if (static_cast<std::size_t>(v.size()) != expected) {
    throw ConfigError(std::string(what) + ": expected length " +
                      std::to_string(expected) + ", got " +
                      std::to_string(v.size()) + " (network " +
                      std::to_string(w.n_in()) + "-" +
                      std::to_string(w.n_hidden()) + "-" +
                      std::to_string(w.n_out()) + ")");
  }
}

void fill_uniform(Eigen::Ref<Matrix> m, Rng& rng, double scale) {
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-scale, scale);
}

}  // namespace

void NetworkConfig::validate() const {
  if (n_in < 1 || n_hidden < 1 || n_out < 1)
    throw ConfigError("network layer sizes must be >= 1");
}

void TrainingHyper::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(momentum_coeff >= 0.0 && momentum_coeff < 1.0))
    throw ConfigError("momentum_coeff must lie in [0, 1)");
}

NetworkWeights NetworkWeights::zeros(const NetworkConfig& config) {
  config.validate();
  const auto in = static_cast<Eigen::Index>(config.n_in);
  const auto hid = static_cast<Eigen::Index>(config.n_hidden);
  const auto out = static_cast<Eigen::Index>(config.n_out);
  return {Matrix::Zero(hid, in), Vector::Zero(hid), Matrix::Zero(out, hid),
          Vector::Zero(out)};
}

NetworkWeights NetworkWeights::random(const NetworkConfig& config, Rng& rng,
                                      double scale) {
  NetworkWeights w = zeros(config);
  fill_uniform(w.hidden_weights, rng, scale);
  fill_uniform(w.hidden_bias, rng, scale);
  fill_uniform(w.output_weights, rng, scale);
  fill_uniform(w.output_bias, rng, scale);
  return w;
}

NetworkConfig NetworkWeights::config() const {
  return {n_in(), n_hidden(), n_out()};
}

bool NetworkWeights::all_finite() const {
  return hidden_weights.allFinite() && hidden_bias.allFinite() &&
         output_weights.allFinite() && output_bias.allFinite();
}

bool NetworkWeights::same_shape(const NetworkWeights& o) const {
  return hidden_weights.rows() == o.hidden_weights.rows() &&
         hidden_weights.cols() == o.hidden_weights.cols() &&
         hidden_bias.size() == o.hidden_bias.size() &&
         output_weights.rows() == o.output_weights.rows() &&
         output_weights.cols() == o.output_weights.cols() &&
         output_bias.size() == o.output_bias.size();
}

std::size_t NetworkWeights::parameter_count() const {
  return static_cast<std::size_t>(hidden_weights.size() + hidden_bias.size() +
                                  output_weights.size() + output_bias.size());
}

NetworkWeights& NetworkWeights::operator+=(const NetworkWeights& o) {
  hidden_weights += o.hidden_weights;
  hidden_bias += o.hidden_bias;
  output_weights += o.output_weights;
  output_bias += o.output_bias;
  return *this;
}

NetworkWeights& NetworkWeights::operator*=(double s) {
  hidden_weights *= s;
  hidden_bias *= s;
  output_weights *= s;
  output_bias *= s;
  return *this;
}

bool operator==(const NetworkWeights& a, const NetworkWeights& b) {
  return a.same_shape(b) && a.hidden_weights == b.hidden_weights &&
         a.hidden_bias == b.hidden_bias && a.output_weights == b.output_weights &&
         a.output_bias == b.output_bias;
}

ForwardCache forward(const NetworkWeights& w, const Vector& input) {
  check_input(w, input, "forward input", w.n_in());
  ForwardCache c;
  c.input = input;
  c.hidden_net = w.hidden_weights * input + w.hidden_bias;
  c.hidden_act = c.hidden_net.unaryExpr([](double a) { return gaussian(a); });
  c.output = w.output_weights * c.hidden_act + w.output_bias;
  return c;
}

Vector hidden_deltas(const NetworkWeights& w, const ForwardCache& cache,
                     const Vector& output_error) {
  check_input(w, output_error, "output_error", w.n_out());
  check_input(w, cache.input, "cache input", w.n_in());
  const Vector back = w.output_weights.transpose() * output_error;
  return back.cwiseProduct(
      cache.hidden_net.unaryExpr([](double a) { return gaussian_slope(a); }));
}

NetworkWeights backprop_weight_grad(const NetworkWeights& w,
                                    const ForwardCache& cache,
                                    const Vector& output_error) {
  const Vector delta = hidden_deltas(w, cache, output_error);
  NetworkWeights g;
  g.hidden_weights = delta * cache.input.transpose();
  g.hidden_bias = delta;
  g.output_weights = output_error * cache.hidden_act.transpose();
  g.output_bias = output_error;
  return g;
}

Vector backprop_input_grad(const NetworkWeights& w, const ForwardCache& cache,
                           const Vector& output_error) {
  return w.hidden_weights.transpose() * hidden_deltas(w, cache, output_error);
}

void apply_update(NetworkWeights& weights, const NetworkWeights& grad,
                  TrainingHyper& hyper, int sign) {
  if (sign != 1 && sign != -1) throw ConfigError("update sign must be +1 or -1");
  if (!grad.same_shape(weights)) throw ConfigError("gradient shape mismatch");
  if (!grad.all_finite()) throw TrainingFault("non-finite gradient");
  if (!hyper.velocity.same_shape(weights))
    hyper.velocity = NetworkWeights::zeros(weights.config());

  NetworkWeights step = grad;
  step *= sign * hyper.learning_rate;
  hyper.velocity *= hyper.momentum_coeff;
  hyper.velocity += step;
  weights += hyper.velocity;
}

}  // namespace bac
