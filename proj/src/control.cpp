#include "pendubridge/control.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pendubridge/errors.hpp"
#include "run_guard.hpp"

namespace pendubridge::control {

void validate(const ControllerConfig& c) {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(what, field);
  };
  const auto& g = c.gains;
  require(std::isfinite(g.kp) && g.kp >= 0.0, "kp", "kp must be finite and >= 0");
  require(std::isfinite(g.ki) && g.ki >= 0.0, "ki", "ki must be finite and >= 0");
  require(std::isfinite(g.kd) && g.kd >= 0.0, "kd", "kd must be finite and >= 0");
  require(std::isfinite(c.setpoint), "setpoint", "setpoint must be finite");
  require(std::isfinite(c.period) && c.period > 0.0, "Tc", "control period must be > 0");
  require(std::isfinite(c.derivative_filter) && c.derivative_filter >= 0.0, "derivative_filter",
          "derivative filter constant must be >= 0");
  require(std::isfinite(c.integral_clamp) && c.integral_clamp >= 0.0, "integral_clamp",
          "integral clamp must be >= 0");
  require(std::isfinite(c.saturation) && c.saturation > 0.0, "saturation",
          "saturation must be > 0");
  require(std::isfinite(c.lowpass_tau) && c.lowpass_tau >= 0.0, "lowpass_tau",
          "low-pass time constant must be >= 0");
}

PidOutput pid_step(const PidState& state, const ControllerConfig& cfg, double phi) {
  if (!std::isfinite(phi)) throw ControllerFault("non-finite angle measurement");
  const double tc = cfg.period;
  const double error = cfg.setpoint - phi;

  PidState next = state;
  const double raw = state.initialized ? (error - state.prev_error) / tc : 0.0;
  if (cfg.derivative_filter > 0.0) {
    next.derivative = state.derivative + tc / (cfg.derivative_filter + tc) * (raw - state.derivative);
  } else {
    next.derivative = raw;
  }
  next.prev_error = error;
  next.initialized = true;

  const auto& g = cfg.gains;
  const double integral =
      std::clamp(state.integral + error * tc, -cfg.integral_clamp, cfg.integral_clamp);
  double u = g.kp * error + g.ki * integral + g.kd * next.derivative;
  if (std::abs(u) > cfg.saturation) {
    // Conditional anti-windup: the accumulator does not move while saturated.
    u = g.kp * error + g.ki * state.integral + g.kd * next.derivative;
    next.integral = state.integral;
  } else {
    next.integral = integral;
  }
  return {{std::clamp(u, -cfg.saturation, cfg.saturation)}, next};
}

LowPassOutput lowpass_step(const LowPassState& state, double input, double dt) {
  if (!(dt > 0.0)) throw ConfigError("low-pass step must be > 0", "dt");
  LowPassState next = state;
  const double beta = dt / (state.tau + dt);
  next.output = beta == 1.0 ? input : state.output + beta * (input - state.output);
  return {next.output, next};
}

Trajectory closed_loop_sim(const plant::PlantParams& params, const ControllerConfig& cfg,
                           const Scenario& scenario) {
  plant::validate(params);
  validate(cfg);
  validate(scenario);
  require_matching_period(cfg, scenario);

  const std::size_t substeps = substeps_per_tick(scenario);
  const std::size_t steps = total_steps(scenario);

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> noise(0.0, scenario.sensor_noise_std);

  Trajectory traj;
  traj.rows.reserve(steps + 1);
  plant::PlantState state = scenario.initial;
  PidState pid;
  LowPassState lowpass{0.0, cfg.lowpass_tau};
  double u_cmd = 0.0;
  double u_applied = 0.0;
  std::uint32_t seq = 0;

  for (std::size_t i = 0; i < steps; ++i) {
    if (i % substeps == 0) {
      seq = static_cast<std::uint32_t>(i / substeps);
      double measured = state.theta;
      if (scenario.sensor_noise_std > 0.0) measured += noise(rng);
      const PidOutput out = pid_step(pid, cfg, plant::phi_of(measured));
      pid = out.state;
      u_cmd = out.command.force;
      const LowPassOutput filtered = lowpass_step(lowpass, u_cmd, cfg.period);
      lowpass = filtered.state;
      u_applied = plant::clamp_force(plant::clamp_force(filtered.output, cfg.saturation),
                                     scenario.force_limit);
    }
    traj.rows.push_back(make_row(i, scenario.dt, state, u_cmd, u_applied, seq, false));
    state = plant::rk4_step(params, state, {u_applied + disturbance_at(scenario, i)}, scenario.dt);
    if (const auto status = terminal_status(state, scenario)) {
      traj.rows.push_back(make_row(i + 1, scenario.dt, state, u_cmd, u_applied, seq, false));
      traj.status = *status;
      return traj;
    }
  }
  traj.rows.push_back(make_row(steps, scenario.dt, state, u_cmd, u_applied, seq, false));
  return traj;
}

}  // namespace pendubridge::control
