#pragma once

#include <cstddef>
#include <optional>

#include <json.hpp>

#include "pendubridge/trajectory.hpp"

namespace pendubridge::harness {

struct Metrics {
  // Time of the first sample after which |phi| stays below the tolerance;
  // empty when the trajectory ends outside the band.
  std::optional<double> settling_time;
  double peak_phi = 0.0;   // max |phi| (rad)
  double overshoot = 0.0;  // largest excursion past zero, as a fraction of |phi0|
  double rms_u = 0.0;      // RMS of u_applied (N)
  bool fell = false;
  std::size_t misses = 0;  // control ticks without a fresh actuator command
  RunStatus status = RunStatus::completed;
  double tolerance = 0.0;

  bool operator==(const Metrics&) const = default;
};

// Throws InputDomainError for an empty trajectory or a non-positive tolerance.
Metrics compute_metrics(const Trajectory& traj, double tolerance);

// Angles (peak, tolerance) in degrees when `degrees` is set.
nlohmann::json to_json(const Metrics& m, bool degrees = false);

}  // namespace pendubridge::harness
