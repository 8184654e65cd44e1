#pragma once

#include "pendubridge/plant.hpp"
#include "pendubridge/scenario.hpp"
#include "pendubridge/trajectory.hpp"

namespace pendubridge::control {

// Parallel-form gains acting on e = setpoint - phi.
struct PidGains {
  double kp = 0.0;  // N/rad
  double ki = 0.0;  // N/(rad*s)
  double kd = 0.0;  // N*s/rad

  bool operator==(const PidGains&) const = default;
};

struct PidState {
  double integral = 0.0;    // rad*s
  double derivative = 0.0;  // filtered de/dt, rad/s
  double prev_error = 0.0;  // rad
  bool initialized = false;

  bool operator==(const PidState&) const = default;
};

struct LowPassState {
  double output = 0.0;  // N
  double tau = 0.0;     // s

  bool operator==(const LowPassState&) const = default;
};

struct ControllerConfig {
  PidGains gains;
  double setpoint = 0.0;          // rad
  double period = 0.01;           // Tc (s)
  double derivative_filter = 0.01;  // s
  double integral_clamp = 1.0;    // rad*s
  double saturation = plant::kDefaultForceLimit;  // N
  double lowpass_tau = 0.005;     // s

  bool operator==(const ControllerConfig&) const = default;
};

void validate(const ControllerConfig& cfg);

struct PidOutput {
  plant::ForceCommand command;
  PidState state;
};

// One controller tick. Throws ControllerFault for a non-finite measurement.
PidOutput pid_step(const PidState& state, const ControllerConfig& cfg, double phi);

struct LowPassOutput {
  double output;
  LowPassState state;
};

// y <- y + beta (u - y), beta = dt / (tau + dt).
LowPassOutput lowpass_step(const LowPassState& state, double input, double dt);

// Reference closed loop: physics every dt, controller every Tc, actuator chain
// pid -> low-pass -> controller saturation -> plant force limit -> hold.
Trajectory closed_loop_sim(const plant::PlantParams& params, const ControllerConfig& cfg,
                           const Scenario& scenario);

}  // namespace pendubridge::control
