#include "bac/cartpole.hpp"

#include <algorithm>
#include <cmath>

namespace bac {

bool CartPoleState::finite() const {
  return std::isfinite(x) && std::isfinite(x_dot) && std::isfinite(theta) &&
         std::isfinite(theta_dot);
}

PhysicsParams PhysicsParams::at_servo_rate(double hz) {
  if (!(hz > 0.0)) throw ConfigError("servo_rate_hz must be > 0");
  PhysicsParams p;
  p.dt = 1.0 / hz;
  return p;
}

void PhysicsParams::validate() const {
  if (!(m_cart > 0 && m_pole > 0 && pole_len > 0 && gravity > 0 &&
        force_scale > 0 && dt > 0))
    throw ConfigError("physics parameters must all be positive");
}

void Bounds::validate() const {
  if (!(x_range > 0 && theta_range > 0))
    throw ConfigError("bounds must be positive");
}

Accelerations accelerations(const CartPoleState& s, double force,
                            const PhysicsParams& p) {
  const double total = p.m_cart + p.m_pole;
  const double sin_t = std::sin(s.theta);
  const double cos_t = std::cos(s.theta);
  const double spin = p.m_pole * p.pole_len * s.theta_dot * s.theta_dot * sin_t;

  const double theta_ddot =
      (p.gravity * sin_t + cos_t * ((-force - spin) / total)) /
      (p.pole_len * (4.0 / 3.0 - p.m_pole * cos_t * cos_t / total));
  const double x_ddot =
      (force + spin - p.m_pole * p.pole_len * theta_ddot * cos_t) / total;
  return {x_ddot, theta_ddot};
}

double balancing_force(double theta, const PhysicsParams& p) {
  return (p.m_cart + p.m_pole) * p.gravity * std::tan(theta);
}

CartPoleState step(const CartPoleState& s, double action, const PhysicsParams& p) {
  const double force =
      std::clamp(p.force_scale * action, -p.force_scale, p.force_scale);
  const Accelerations acc = accelerations(s, force, p);
  return {s.x + p.dt * s.x_dot, s.x_dot + p.dt * acc.x_ddot,
          s.theta + p.dt * s.theta_dot, s.theta_dot + p.dt * acc.theta_ddot};
}

FailureKind failure_kind(const CartPoleState& s, const Bounds& b) {
  if (!(std::abs(s.x) <= b.x_range)) return FailureKind::kCartPosition;
  if (!(std::abs(s.theta) <= b.theta_range)) return FailureKind::kPoleAngle;
  return FailureKind::kNone;
}

double reinforcement(const CartPoleState& s, const Bounds& b,
                     ReinforcementMode mode) {
  if (mode == ReinforcementMode::kFailureDriven)
    return is_failure(s, b) ? -1.0 : 0.0;
  return std::hypot(s.theta / b.theta_range, s.x / b.x_range);
}

CartPoleState random_initial_state(Rng& rng, const Bounds& b, double fraction) {
  CartPoleState s;
  s.x = rng.uniform(-1.0, 1.0) * fraction * b.x_range;
  s.x_dot = rng.uniform(-1.0, 1.0) * fraction;
  s.theta = rng.uniform(-1.0, 1.0) * fraction * b.theta_range;
  s.theta_dot = rng.uniform(-1.0, 1.0) * fraction;
  return s;
}

Vector normalize(const CartPoleState& s, const Bounds& b) {
  Vector v(4);
  v << s.x / b.x_range, s.x_dot, s.theta / b.theta_range, s.theta_dot;
  return v;
}

CartPoleState denormalize(const Vector& v, const Bounds& b) {
  return {v(0) * b.x_range, v(1), v(2) * b.theta_range, v(3)};
}

}  // namespace bac
