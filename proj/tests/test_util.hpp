#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "bac/ffnet.hpp"

namespace bac::test {

inline double rel_error(const Vector& a, const Vector& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

// Central differences of a scalar function of a vector.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          Vector x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x(i);
    x(i) = keep + h;
    const double up = f(x);
    x(i) = keep - h;
    const double down = f(x);
    x(i) = keep;
    g(i) = (up - down) / (2 * h);
  }
  return g;
}

// Weights flattened in a fixed order, and back.
inline Vector flatten(const NetworkWeights& w) {
  Vector v(static_cast<Eigen::Index>(w.parameter_count()));
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < w.hidden_weights.cols(); ++c)
    for (Eigen::Index r = 0; r < w.hidden_weights.rows(); ++r) v(k++) = w.hidden_weights(r, c);
  for (Eigen::Index i = 0; i < w.hidden_bias.size(); ++i) v(k++) = w.hidden_bias(i);
  for (Eigen::Index c = 0; c < w.output_weights.cols(); ++c)
    for (Eigen::Index r = 0; r < w.output_weights.rows(); ++r) v(k++) = w.output_weights(r, c);
  for (Eigen::Index i = 0; i < w.output_bias.size(); ++i) v(k++) = w.output_bias(i);
  return v;
}

inline NetworkWeights unflatten(const Vector& v, const NetworkWeights& like) {
  NetworkWeights w = like;
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < w.hidden_weights.cols(); ++c)
    for (Eigen::Index r = 0; r < w.hidden_weights.rows(); ++r) w.hidden_weights(r, c) = v(k++);
  for (Eigen::Index i = 0; i < w.hidden_bias.size(); ++i) w.hidden_bias(i) = v(k++);
  for (Eigen::Index c = 0; c < w.output_weights.cols(); ++c)
    for (Eigen::Index r = 0; r < w.output_weights.rows(); ++r) w.output_weights(r, c) = v(k++);
  for (Eigen::Index i = 0; i < w.output_bias.size(); ++i) w.output_bias(i) = v(k++);
  return w;
}

inline Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

}  // namespace bac::test
