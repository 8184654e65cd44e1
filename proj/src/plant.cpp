#include "pendubridge/plant.hpp"

#include <algorithm>
#include <cmath>

#include "pendubridge/errors.hpp"

namespace pendubridge::plant {
namespace {

struct Trig {
  double sin;
  double cos;
};

// sin/cos evaluated relative to whichever equilibrium (0 or pi) is closer, so
// both equilibria produce exact zeros for the sine term.
Trig trig_of(double theta) {
  const double r = std::remainder(theta, 2.0 * kPi);
  if (std::abs(r) > 0.5 * kPi) {
    const double d = r - std::copysign(kPi, r);
    return {-std::sin(d), -std::cos(d)};
  }
  return {std::sin(r), std::cos(r)};
}

void require_finite(const PlantState& state, ForceCommand cmd) {
  if (!is_finite(state) || !std::isfinite(cmd.force)) {
    throw InputDomainError("plant input must be finite");
  }
}

PlantState advance(const PlantState& s, const StateDeriv& d, double h) {
  return {s.x + h * d.x_dot, s.x_dot + h * d.x_ddot, s.theta + h * d.theta_dot,
          s.theta_dot + h * d.theta_ddot};
}

}  // namespace

void validate(const PlantParams& p) {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(what, field);
  };
  require(std::isfinite(p.cart_mass) && p.cart_mass > 0.0, "M", "cart mass must be > 0");
  require(std::isfinite(p.pend_mass) && p.pend_mass >= 0.0, "m", "pendulum mass must be >= 0");
  require(std::isfinite(p.cart_friction) && p.cart_friction >= 0.0, "b",
          "cart friction must be >= 0");
  require(std::isfinite(p.com_length) && p.com_length > 0.0, "l", "length must be > 0");
  require(std::isfinite(p.pend_inertia) && p.pend_inertia >= 0.0, "I",
          "inertia must be >= 0");
  require(std::isfinite(p.gravity) && p.gravity > 0.0, "g", "gravity must be > 0");
  const double ml = p.pend_mass * p.com_length;
  const double q = (p.cart_mass + p.pend_mass) * (p.pend_inertia + ml * p.com_length) - ml * ml;
  require(q > 0.0, "I", "(M+m)(I+ml^2) - (ml)^2 must be > 0 (I and m cannot both be zero)");
}

double phi_of(double theta) { return std::remainder(theta - kPi, 2.0 * kPi); }

bool is_finite(const PlantState& s) {
  return std::isfinite(s.x) && std::isfinite(s.x_dot) && std::isfinite(s.theta) &&
         std::isfinite(s.theta_dot);
}

StateDeriv deriv(const PlantParams& p, const PlantState& s, ForceCommand cmd) {
  require_finite(s, cmd);
  const auto [sin_t, cos_t] = trig_of(s.theta);
  const double ml = p.pend_mass * p.com_length;

  // [ M+m        ml cos ] [x_ddot    ]   [ F - b x_dot + ml theta_dot^2 sin ]
  // [ ml cos   I + ml^2 ] [theta_ddot] = [ -m g l sin                      ]
  const double a11 = p.cart_mass + p.pend_mass;
  const double a12 = ml * cos_t;
  const double a22 = p.pend_inertia + ml * p.com_length;
  const double r1 = cmd.force - p.cart_friction * s.x_dot + ml * s.theta_dot * s.theta_dot * sin_t;
  const double r2 = -ml * p.gravity * sin_t;
  const double det = a11 * a22 - a12 * a12;

  return {s.x_dot, (r1 * a22 - a12 * r2) / det, s.theta_dot, (a11 * r2 - a12 * r1) / det};
}

StateDeriv simplified_deriv(const PlantParams& p, const PlantState& s, ForceCommand cmd) {
  require_finite(s, cmd);
  // Upright-zero convention with the opposite rotation sense: theta_u = pi - theta.
  const auto [sin_t, cos_t] = trig_of(s.theta);
  const double sin_u = sin_t;
  const double cos_u = -cos_t;
  const double omega_u = -s.theta_dot;

  const double M = p.cart_mass;
  const double m = p.pend_mass;
  const double l = p.com_length;
  const double g = p.gravity;

  // (M+m) x_ddot + m l cos_u theta_u_ddot = F + m l omega_u^2 sin_u
  //       cos_u x_ddot +   l theta_u_ddot = g sin_u
  const double rhs1 = cmd.force + m * l * omega_u * omega_u * sin_u;
  const double rhs2 = g * sin_u;
  const double det = (M + m) * l - m * l * cos_u * cos_u;
  const double x_ddot = (rhs1 * l - m * l * cos_u * rhs2) / det;
  const double theta_u_ddot = ((M + m) * rhs2 - cos_u * rhs1) / det;

  return {s.x_dot, x_ddot, s.theta_dot, -theta_u_ddot};
}

PlantState rk4_step(const PlantParams& p, const PlantState& s, ForceCommand cmd, double dt) {
  if (!(dt > 0.0 && dt <= kMaxStep)) {
    throw ConfigError("step must satisfy 0 < dt <= 0.05 s", "dt");
  }
  const StateDeriv k1 = deriv(p, s, cmd);
  const StateDeriv k2 = deriv(p, advance(s, k1, 0.5 * dt), cmd);
  const StateDeriv k3 = deriv(p, advance(s, k2, 0.5 * dt), cmd);
  const StateDeriv k4 = deriv(p, advance(s, k3, dt), cmd);

  const double w = dt / 6.0;
  return {
      s.x + w * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot),
      s.x_dot + w * (k1.x_ddot + 2.0 * k2.x_ddot + 2.0 * k3.x_ddot + k4.x_ddot),
      s.theta + w * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot),
      s.theta_dot +
          w * (k1.theta_ddot + 2.0 * k2.theta_ddot + 2.0 * k3.theta_ddot + k4.theta_ddot),
  };
}

double energy(const PlantParams& p, const PlantState& s) {
  const auto [sin_t, cos_t] = trig_of(s.theta);
  const double l = p.com_length;
  const double vx = s.x_dot + l * s.theta_dot * cos_t;
  const double vy = l * s.theta_dot * sin_t;
  return 0.5 * p.cart_mass * s.x_dot * s.x_dot + 0.5 * p.pend_mass * (vx * vx + vy * vy) +
         0.5 * p.pend_inertia * s.theta_dot * s.theta_dot - p.pend_mass * p.gravity * l * cos_t;
}

double normal_reaction(const PlantParams& p, const PlantState& s, const StateDeriv& d) {
  const auto [sin_t, cos_t] = trig_of(s.theta);
  const double ml = p.pend_mass * p.com_length;
  // Satisfies M x_ddot + b x_dot + N = F.
  return p.pend_mass * d.x_ddot + ml * d.theta_ddot * cos_t -
         ml * s.theta_dot * s.theta_dot * sin_t;
}

double clamp_force(double force, double limit) { return std::clamp(force, -limit, limit); }

std::vector<PlantState> rollout(const PlantParams& p, const PlantState& initial,
                                std::span<const ForceCommand> forces, double dt) {
  if (forces.empty()) throw ConfigError("rollout needs at least one force sample", "forces");
  if (!is_finite(initial)) throw InputDomainError("initial state must be finite");
  std::vector<PlantState> states;
  states.reserve(forces.size() + 1);
  states.push_back(initial);
  for (std::size_t i = 0; i < forces.size(); ++i) {
    if (!std::isfinite(forces[i].force)) throw DivergedError("non-finite force", i);
    PlantState next;
    try {
      next = rk4_step(p, states.back(), forces[i], dt);
    } catch (const InputDomainError&) {
      throw DivergedError("state became non-finite", i);
    }
    if (!is_finite(next)) throw DivergedError("state became non-finite", i);
    if (std::abs(next.theta_dot) > kDivergenceRate) {
      throw DivergedError("angular rate exceeded 1e3 rad/s", i);
    }
    states.push_back(next);
  }
  return states;
}

}  // namespace pendubridge::plant
