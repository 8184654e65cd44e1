#pragma once

// Independent reference models used as test oracles.

#include <Eigen/Dense>
#include <random>

#include "pendubridge/plant.hpp"

namespace testing {

using pendubridge::plant::PlantParams;
using pendubridge::plant::PlantState;

// Euler-Lagrange equations of the cart-pendulum with generalized
// coordinates (x, theta), pendulum centre of mass at (x + l sin, -l cos):
//   [M+m      ml cos ] [x'' ]   [F - b x' + ml sin theta'^2]
//   [ml cos   I+ml^2 ] [th''] = [-m g l sin                ]
inline Eigen::Vector2d lagrange_accel(const PlantParams& p, const PlantState& s, double force) {
  const double ml = p.pend_mass * p.com_length;
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  Eigen::Matrix2d mass;
  mass << p.cart_mass + p.pend_mass, ml * c, ml * c, p.pend_inertia + ml * p.com_length;
  const Eigen::Vector2d rhs(force - p.cart_friction * s.x_dot + ml * sn * s.theta_dot * s.theta_dot,
                            -ml * p.gravity * sn);
  return mass.fullPivLu().solve(rhs);
}

inline Eigen::Vector4d lagrange_rhs(const PlantParams& p, const Eigen::Vector4d& y, double force) {
  const Eigen::Vector2d a = lagrange_accel(p, {y[0], y[1], y[2], y[3]}, force);
  return {y[1], a[0], y[3], a[1]};
}

// Plain RK4 on the Lagrange model; used with a much finer step than the
// library's integrator.
inline PlantState fine_integrate(const PlantParams& p, const PlantState& s, double force,
                                 double span, int substeps) {
  Eigen::Vector4d y(s.x, s.x_dot, s.theta, s.theta_dot);
  const double h = span / substeps;
  for (int i = 0; i < substeps; ++i) {
    const Eigen::Vector4d k1 = lagrange_rhs(p, y, force);
    const Eigen::Vector4d k2 = lagrange_rhs(p, y + 0.5 * h * k1, force);
    const Eigen::Vector4d k3 = lagrange_rhs(p, y + 0.5 * h * k2, force);
    const Eigen::Vector4d k4 = lagrange_rhs(p, y + h * k3, force);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return {y[0], y[1], y[2], y[3]};
}

inline PlantParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlantParams p;
  p.cart_mass = 0.1 + 4.9 * u(rng);
  p.pend_mass = 0.01 + 1.99 * u(rng);
  p.cart_friction = u(rng);
  p.com_length = 0.05 + 0.95 * u(rng);
  p.pend_inertia = 0.1 * u(rng);
  p.gravity = 1.0 + 19.0 * u(rng);
  return p;
}

inline PlantState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {2.0 * u(rng), 3.0 * u(rng), pendubridge::plant::kPi * (1.0 + u(rng)), 6.0 * u(rng)};
}

}  // namespace testing
