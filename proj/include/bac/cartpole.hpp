#pragma once

#include <array>
#include <numbers>

#include "bac/ffnet.hpp"
#include "bac/rng.hpp"

namespace bac {

struct CartPoleState {
  double x = 0.0;          // m
  double x_dot = 0.0;      // m/s
  double theta = 0.0;      // rad, 0 = upright
  double theta_dot = 0.0;  // rad/s

  bool finite() const;
  std::array<double, 4> as_array() const { return {x, x_dot, theta, theta_dot}; }
  friend bool operator==(const CartPoleState&, const CartPoleState&) = default;
};

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct PhysicsParams {
  double m_cart = 1.0;
  double m_pole = 0.1;
  double pole_len = 1.0;
  double gravity = 9.8;
  double force_scale = 10.0;  // N per unit action; also the force clamp
  double dt = 0.02;

  static PhysicsParams at_servo_rate(double hz);
  void validate() const;
};

struct Bounds {
  double x_range = 2.4;
  double theta_range = deg_to_rad(12.0);

  void validate() const;
};

enum class ReinforcementMode { kDistanceCost, kFailureDriven };

enum class FailureKind { kNone, kCartPosition, kPoleAngle };

struct Accelerations {
  double x_ddot = 0.0;
  double theta_ddot = 0.0;
};

// Pole angular acceleration first (it does not depend on the cart's), then
// the cart acceleration from it.
Accelerations accelerations(const CartPoleState& s, double force,
                            const PhysicsParams& p);

// Cart force that holds the pole at a constant lean angle with no angular
// rate: theta_ddot = 0 gives f = (m_c + m_p) g tan(theta).
double balancing_force(double theta, const PhysicsParams& p);

// Forward Euler over p.dt with force = force_scale * action clamped to
// +-force_scale.
CartPoleState step(const CartPoleState& s, double action, const PhysicsParams& p);

FailureKind failure_kind(const CartPoleState& s, const Bounds& b);
inline bool is_failure(const CartPoleState& s, const Bounds& b) {
  return failure_kind(s, b) != FailureKind::kNone;
}

// Raw environment signal: DistanceCost is >= 0 (0 best); FailureDriven is -1
// on failure and 0 otherwise.
double reinforcement(const CartPoleState& s, const Bounds& b,
                     ReinforcementMode mode);

// x and theta uniform in +-fraction*range; velocities uniform in
// +-fraction*(1 m/s, 1 rad/s). Draw order: x, x_dot, theta, theta_dot.
CartPoleState random_initial_state(Rng& rng, const Bounds& b, double fraction);

// Network-facing coordinates: (x/x_r, x_dot/1, theta/theta_r, theta_dot/1).
Vector normalize(const CartPoleState& s, const Bounds& b);
CartPoleState denormalize(const Vector& v, const Bounds& b);

}  // namespace bac
