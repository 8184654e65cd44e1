#pragma once

// Episode bookkeeping shared by the reference loop and the bridge sessions.

#include <cmath>
#include <optional>

#include "pendubridge/control.hpp"
#include "pendubridge/errors.hpp"
#include "pendubridge/plant.hpp"
#include "pendubridge/scenario.hpp"
#include "pendubridge/trajectory.hpp"

namespace pendubridge {

inline TrajectoryRow make_row(std::size_t step, double dt, const plant::PlantState& s,
                              double u_cmd, double u_applied, std::uint32_t seq, bool miss) {
  return {step, static_cast<double>(step) * dt, s.x, s.x_dot, s.theta, plant::phi_of(s.theta),
          u_cmd, u_applied, seq, miss};
}

// Checked after every physics step, in this order.
inline std::optional<RunStatus> terminal_status(const plant::PlantState& s,
                                                const Scenario& scenario) {
  if (!plant::is_finite(s) || std::abs(s.theta_dot) > plant::kDivergenceRate) {
    return RunStatus::diverged;
  }
  if (std::abs(plant::phi_of(s.theta)) > 0.5 * plant::kPi) return RunStatus::fell;
  if (std::abs(s.x) > scenario.track_limit) return RunStatus::off_track;
  return std::nullopt;
}

inline void require_matching_period(const control::ControllerConfig& cfg,
                                    const Scenario& scenario) {
  if (std::abs(cfg.period - scenario.control_period) > 1e-12 * scenario.control_period) {
    throw ConfigError("controller period must equal the scenario control period", "Tc");
  }
}

}  // namespace pendubridge
