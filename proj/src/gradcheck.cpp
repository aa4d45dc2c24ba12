#include "bac/gradcheck.hpp"

#include <algorithm>
#include <functional>

#include "bac/bac_core.hpp"
#include "bac/response_induction.hpp"
#include "bac/rng.hpp"

namespace bac {
namespace {

constexpr double kStep = 1e-5;
constexpr double kSingleTol = 1e-4;
constexpr double kChainTol = 1e-3;

double rel_error(const Vector& g, const Vector& fd) {
  const double scale = std::max({g.norm(), fd.norm(), 1e-12});
  return (g - fd).norm() / scale;
}

Vector central_diff(const std::function<double(const Vector&)>& f, const Vector& x) {
  Vector out(x.size());
  Vector probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe(k) = x(k) + kStep;
    const double up = f(probe);
    probe(k) = x(k) - kStep;
    const double down = f(probe);
    probe(k) = x(k);
    out(k) = (up - down) / (2.0 * kStep);
  }
  return out;
}

std::size_t draw_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

Vector draw_vector(Rng& rng, std::size_t n, double sd) {
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = rng.normal(0.0, sd);
  return v;
}

NetworkWeights draw_net(Rng& rng, std::size_t n_in, std::size_t n_out) {
  const NetworkConfig cfg{n_in, draw_size(rng, 1, 9), n_out};
  return NetworkWeights::random(cfg, rng, rng.uniform(0.1, 1.2));
}

// Flattened view of all weights, in a fixed order.
Vector flatten(const NetworkWeights& w) {
  Vector v(static_cast<Eigen::Index>(w.parameter_count()));
  Eigen::Index k = 0;
  for (double x : w.hidden_weights.reshaped()) v(k++) = x;
  for (double x : w.hidden_bias) v(k++) = x;
  for (double x : w.output_weights.reshaped()) v(k++) = x;
  for (double x : w.output_bias) v(k++) = x;
  return v;
}

NetworkWeights unflatten(const NetworkWeights& shape, const Vector& v) {
  NetworkWeights w = shape;
  Eigen::Index k = 0;
  for (double& x : w.hidden_weights.reshaped()) x = v(k++);
  for (double& x : w.hidden_bias) x = v(k++);
  for (double& x : w.output_weights.reshaped()) x = v(k++);
  for (double& x : w.output_bias) x = v(k++);
  return w;
}

template <class Body>
GradcheckResult suite(std::string name, std::uint64_t seed, std::uint64_t salt,
                      std::size_t configs, double tol, Body body) {
  GradcheckResult res{std::move(name), 0, 0.0, tol};
  Rng rng = make_stream(seed ^ (salt * 0x9E3779B97F4A7C15ULL), Stream::kInit);
  for (std::size_t c = 0; c < configs; ++c) {
    res.max_rel_error = std::max(res.max_rel_error, body(rng));
    ++res.configurations;
  }
  return res;
}

}  // namespace

GradcheckResult check_weight_gradients(std::uint64_t seed, std::size_t configs) {
  return suite("weight-gradients", seed, 1, configs, kSingleTol, [](Rng& rng) {
    const NetworkWeights w = draw_net(rng, draw_size(rng, 1, 6), draw_size(rng, 1, 4));
    const Vector x = draw_vector(rng, w.n_in(), 1.0);
    const Vector e = draw_vector(rng, w.n_out(), 1.0);
    const Vector analytic = flatten(backprop_weight_grad(w, forward(w, x), e));
    const Vector fd = central_diff(
        [&](const Vector& v) { return e.dot(forward(unflatten(w, v), x).output); },
        flatten(w));
    return rel_error(analytic, fd);
  });
}

GradcheckResult check_input_gradients(std::uint64_t seed, std::size_t configs) {
  return suite("input-gradients", seed, 2, configs, kSingleTol, [](Rng& rng) {
    const NetworkWeights w = draw_net(rng, draw_size(rng, 1, 6), draw_size(rng, 1, 4));
    const Vector x = draw_vector(rng, w.n_in(), 1.0);
    const Vector e = draw_vector(rng, w.n_out(), 1.0);
    const Vector analytic = backprop_input_grad(w, forward(w, x), e);
    const Vector fd = central_diff(
        [&](const Vector& in) { return e.dot(forward(w, in).output); }, x);
    return rel_error(analytic, fd);
  });
}

GradcheckResult check_indirect_chain(std::uint64_t seed, std::size_t configs) {
  return suite("indirect-chain", seed, 3, configs, kChainTol, [](Rng& rng) {
    const std::size_t n_s = draw_size(rng, 1, 5);
    const std::size_t n_a = draw_size(rng, 1, 2);
    const std::size_t n_e = draw_size(rng, 0, 2);
    const NetworkWeights model = draw_net(rng, n_s + n_a, n_s);
    const NetworkWeights critic = draw_net(rng, n_s + n_e, 1);
    const Vector s = draw_vector(rng, n_s, 0.7);
    const Vector a = draw_vector(rng, n_a, 0.7);
    const Vector extra = draw_vector(rng, n_e, 0.3);
    const Vector analytic = action_gradient_indirect(critic, model, s, a, extra);
    const Vector fd = central_diff(
        [&](const Vector& act) {
          const Vector next = s + forward(model, concat(s, act)).output;
          return forward(critic, concat(next, extra)).output(0);
        },
        a);
    return rel_error(analytic, fd);
  });
}

GradcheckResult check_direct_gradient(std::uint64_t seed, std::size_t configs) {
  return suite("direct-gradient", seed, 4, configs, kSingleTol, [](Rng& rng) {
    const std::size_t n_in = draw_size(rng, 1, 6);
    const std::size_t n_a = draw_size(rng, 1, 2);
    const NetworkWeights critic = draw_net(rng, n_in + n_a, 1);
    const Vector in = draw_vector(rng, n_in, 0.7);
    const Vector a = draw_vector(rng, n_a, 0.7);
    const Vector analytic = action_gradient_direct(critic, in, a);
    const Vector fd = central_diff(
        [&](const Vector& act) { return forward(critic, concat(in, act)).output(0); }, a);
    return rel_error(analytic, fd);
  });
}

// delta at the plan input must equal d p / dY through the action net alone:
// the critic's own plan input and the feedback point are held fixed.
GradcheckResult check_plan_sensitivity(std::uint64_t seed, std::size_t configs) {
  return suite("plan-sensitivity", seed, 5, configs, kChainTol, [](Rng& rng) {
    AgentShape shape;
    shape.variant = rng.uniform() < 0.5 ? BacVariant::kIndirect : BacVariant::kDirect;
    shape.extra_dim = 1;
    shape.n_hidden = draw_size(rng, 2, 9);
    AgentParams params;
    params.init_scale = rng.uniform(0.3, 1.2);
    const BacAgent ll(shape, params, rng);
    const Vector s = draw_vector(rng, 4, 0.7);
    const Vector plan = draw_vector(rng, 1, 0.3);
    const ForwardCache cache = forward(ll.action_net(), ll.action_input(s, plan));
    RIParams ri;
    const PlanSensitivity sens = plan_sensitivity(ll, s, plan, cache, ri);

    const Vector fd = central_diff(
        [&](const Vector& y) {
          const Vector a = ll.clean_action(s, y);
          if (shape.variant == BacVariant::kIndirect) {
            const Vector next = s + forward(ll.model().net, concat(s, a)).output;
            return ll.value(next, plan, Vector());
          }
          return ll.value(s, plan, a);
        },
        plan);
    return rel_error(sens.delta_plan, fd);
  });
}

std::vector<GradcheckResult> run_all_gradchecks(std::uint64_t seed, std::size_t configs) {
  return {check_weight_gradients(seed, configs), check_input_gradients(seed, configs),
          check_indirect_chain(seed, configs), check_direct_gradient(seed, configs),
          check_plan_sensitivity(seed, configs)};
}

}  // namespace bac
