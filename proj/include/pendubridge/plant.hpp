#pragma once

#include <numbers>
#include <span>
#include <vector>

namespace pendubridge::plant {

// Physical constants of the cart-pendulum. Defaults are the reference set
// used throughout the tests and the default experiment configuration.
struct PlantParams {
  double cart_mass = 0.5;       // M (kg)
  double pend_mass = 0.2;       // m (kg)
  double cart_friction = 0.1;   // b (N*s/m)
  double com_length = 0.3;      // l (m), pivot to pendulum centre of mass
  double pend_inertia = 0.006;  // I (kg*m^2), about the centre of mass
  double gravity = 9.81;        // g (m/s^2)

  bool operator==(const PlantParams&) const = default;
};

// Throws ConfigError unless every physical constraint holds, including
// (M+m)(I+ml^2) - (ml)^2 > 0.
void validate(const PlantParams& params);

// theta is measured from the hanging position: 0 = down, pi = upright.
struct PlantState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;

  bool operator==(const PlantState&) const = default;
};

struct StateDeriv {
  double x_dot = 0.0;
  double x_ddot = 0.0;
  double theta_dot = 0.0;
  double theta_ddot = 0.0;

  bool operator==(const StateDeriv&) const = default;
};

// Horizontal force on the cart, positive along +x (N).
struct ForceCommand {
  double force = 0.0;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDefaultForceLimit = 50.0;
inline constexpr double kMaxStep = 0.05;
inline constexpr double kDivergenceRate = 1e3;  // rad/s

// Deviation from upright wrapped to [-pi, pi]; exact for theta near pi.
double phi_of(double theta);

bool is_finite(const PlantState& state);

// Accelerations of the full model, including pivot inertia and cart friction.
// Solves the coupled 2x2 system whose determinant is bounded below by q.
StateDeriv deriv(const PlantParams& params, const PlantState& state, ForceCommand cmd);

// The reduced model without pivot inertia and cart friction (I and b are
// ignored). Written in the upright-zero angle convention and mapped back.
StateDeriv simplified_deriv(const PlantParams& params, const PlantState& state,
                            ForceCommand cmd);

// One classical Runge-Kutta step with the force held constant over the step.
PlantState rk4_step(const PlantParams& params, const PlantState& state, ForceCommand cmd,
                    double dt);

// Total mechanical energy with the potential zero at the pivot height.
double energy(const PlantParams& params, const PlantState& state);

// Horizontal reaction between cart and pendulum at the pivot.
double normal_reaction(const PlantParams& params, const PlantState& state, const StateDeriv& d);

// Saturates a force to +/-limit.
double clamp_force(double force, double limit);

// Open-loop integration. Returns forces.size() + 1 states, starting with
// `initial`. Throws DivergedError carrying the offending step index.
std::vector<PlantState> rollout(const PlantParams& params, const PlantState& initial,
                                std::span<const ForceCommand> forces, double dt);

}  // namespace pendubridge::plant
