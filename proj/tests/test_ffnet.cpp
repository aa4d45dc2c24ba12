#include <doctest.h>

#include <cmath>

#include "bac/ffnet.hpp"
#include "test_util.hpp"

using namespace bac;
using bac::test::rel_error;

namespace {

NetworkConfig cfg(std::size_t in, std::size_t hid, std::size_t out) {
  NetworkConfig c;
  c.n_in = in;
  c.n_hidden = hid;
  c.n_out = out;
  return c;
}

// Dense evaluation written out with plain loops.
std::vector<double> loop_forward(const NetworkWeights& w, const Vector& x) {
  std::vector<double> hidden(w.n_hidden());
  for (std::size_t j = 0; j < w.n_hidden(); ++j) {
    double net = w.hidden_bias(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < w.n_in(); ++i)
      net += w.hidden_weights(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) *
             x(static_cast<Eigen::Index>(i));
    hidden[j] = std::exp(-net * net);
  }
  std::vector<double> out(w.n_out());
  for (std::size_t k = 0; k < w.n_out(); ++k) {
    double acc = w.output_bias(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < w.n_hidden(); ++j)
      acc += w.output_weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) * hidden[j];
    out[k] = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("zero weights give unit hidden activity and zero output") {
  const auto w = NetworkWeights::zeros(cfg(3, 7, 2));
  Vector x(3);
  x << 0.4, -2.0, 9.0;
  const auto c = forward(w, x);
  CHECK(c.hidden_act.isApprox(Vector::Ones(7)));
  CHECK(c.output.isZero(0.0));
}

TEST_CASE("output bias alone sets the output") {
  auto w = NetworkWeights::zeros(cfg(2, 5, 1));
  w.output_bias(0) = 1.75;
  Rng rng(3);
  for (int t = 0; t < 10; ++t)
    CHECK(forward(w, test::random_vector(rng, 2, 5.0)).output(0) == doctest::Approx(1.75));
}

TEST_CASE("forward matches loop evaluation") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto w = NetworkWeights::random(cfg(5, 7, 3), rng, 0.8);
    const Vector x = test::random_vector(rng, 5, 2.0);
    const auto out = forward(w, x).output;
    const auto ref = loop_forward(w, x);
    for (std::size_t k = 0; k < ref.size(); ++k)
      CHECK(out(static_cast<Eigen::Index>(k)) == doctest::Approx(ref[k]).epsilon(1e-12));
  }
}

TEST_CASE("forward is bit-deterministic and hidden activity lies in (0, 1]") {
  Rng rng(5);
  const auto w = NetworkWeights::random(cfg(4, 7, 1), rng, 3.0);
  for (int t = 0; t < 200; ++t) {
    const Vector x = test::random_vector(rng, 4, 10.0);
    const auto a = forward(w, x);
    const auto b = forward(w, x);
    CHECK(a.output(0) == b.output(0));
    CHECK(a.hidden_act.minCoeff() >= 0.0);
    CHECK(a.hidden_act.maxCoeff() <= 1.0);
  }
}

TEST_CASE("random init stays inside the scale") {
  Rng rng(9);
  const auto w = NetworkWeights::random(cfg(4, 7, 2), rng, 0.3);
  CHECK(test::flatten(w).cwiseAbs().maxCoeff() <= 0.3);
}

TEST_CASE("weight gradient is linear in the output error") {
  Rng rng(21);
  const auto w = NetworkWeights::random(cfg(3, 7, 2), rng);
  const auto c = forward(w, test::random_vector(rng, 3));
  const Vector e = test::random_vector(rng, 2);
  CHECK(test::flatten(backprop_weight_grad(w, c, Vector::Zero(2))).isZero(0.0));
  const Vector g1 = test::flatten(backprop_weight_grad(w, c, e));
  const Vector g2 = test::flatten(backprop_weight_grad(w, c, 2.0 * e));
  CHECK((g2 - 2.0 * g1).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("backprop matches central differences on 100 random triples") {
  Rng rng(77);
  double worst_w = 0.0;
  double worst_x = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t in = 1 + static_cast<std::size_t>(rng.uniform() * 6);
    const std::size_t out = 1 + static_cast<std::size_t>(rng.uniform() * 4);
    const auto w = NetworkWeights::random(cfg(in, 7, out), rng, 1.0);
    const Vector x = test::random_vector(rng, in);
    const Vector e = test::random_vector(rng, out);
    const auto c = forward(w, x);

    auto s_of_w = [&](const Vector& flat) {
      return e.dot(forward(test::unflatten(flat, w), x).output);
    };
    auto s_of_x = [&](const Vector& xi) { return e.dot(forward(w, xi).output); };
    worst_w = std::max(worst_w, rel_error(test::flatten(backprop_weight_grad(w, c, e)),
                                          test::fd_gradient(s_of_w, test::flatten(w))));
    worst_x = std::max(worst_x, rel_error(backprop_input_grad(w, c, e),
                                          test::fd_gradient(s_of_x, x)));
  }
  CHECK(worst_w < 1e-4);
  CHECK(worst_x < 1e-4);
}

TEST_CASE("input gradient vanishes without input weights or at the Gaussian peak") {
  Rng rng(4);
  auto w = NetworkWeights::random(cfg(3, 7, 1), rng);
  w.hidden_weights.setZero();
  CHECK(backprop_input_grad(w, forward(w, test::random_vector(rng, 3)), Vector::Ones(1))
            .isZero(0.0));

  auto one = NetworkWeights::zeros(cfg(1, 1, 1));
  one.hidden_weights(0, 0) = 1.0;
  one.output_weights(0, 0) = 1.0;
  Vector x(1);
  x << 0.0;
  CHECK(backprop_input_grad(one, forward(one, x), Vector::Ones(1))(0) == 0.0);
  CHECK(gaussian_slope(0.0) == 0.0);
  CHECK(gaussian_slope(0.5) == doctest::Approx(-2.0 * 0.5 * std::exp(-0.25)));
}

TEST_CASE("apply_update: plain step, zero step and momentum accumulation") {
  Rng rng(8);
  const auto w0 = NetworkWeights::random(cfg(2, 3, 1), rng);
  const auto grad = NetworkWeights::random(cfg(2, 3, 1), rng);

  SUBCASE("zero gradient") {
    auto w = w0;
    TrainingHyper h;
    h.learning_rate = 0.5;
    apply_update(w, NetworkWeights::zeros(w0.config()), h, +1);
    CHECK(w == w0);
  }
  SUBCASE("no momentum") {
    for (int sign : {+1, -1}) {
      auto w = w0;
      TrainingHyper h;
      h.learning_rate = 0.1;
      apply_update(w, grad, h, sign);
      CHECK((test::flatten(w) - test::flatten(w0) - sign * 0.1 * test::flatten(grad))
                .cwiseAbs()
                .maxCoeff() < 1e-15);
    }
  }
  SUBCASE("momentum 0.5, second step is 1.5 lr grad") {
    auto w = w0;
    TrainingHyper h;
    h.learning_rate = 0.1;
    h.momentum_coeff = 0.5;
    apply_update(w, grad, h, +1);
    const Vector after_one = test::flatten(w);
    apply_update(w, grad, h, +1);
    CHECK((test::flatten(w) - after_one - 0.15 * test::flatten(grad)).cwiseAbs().maxCoeff() <
          1e-15);
  }
  SUBCASE("non-finite gradient faults and leaves weights alone") {
    auto w = w0;
    auto bad = grad;
    bad.output_bias(0) = std::nan("");
    TrainingHyper h;
    CHECK_THROWS_AS(apply_update(w, bad, h, +1), TrainingFault);
    CHECK(w == w0);
  }
}

TEST_CASE("shape errors") {
  NetworkConfig bad = cfg(0, 7, 1);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  Rng rng(1);
  const auto w = NetworkWeights::random(cfg(3, 7, 1), rng);
  CHECK_THROWS_AS(forward(w, Vector::Zero(2)), ConfigError);
  const auto c = forward(w, Vector::Zero(3));
  CHECK_THROWS_AS(backprop_weight_grad(w, c, Vector::Zero(2)), ConfigError);
}
