#include "pendubridge/scenario.hpp"

#include <cmath>
#include <string>

#include "pendubridge/errors.hpp"

namespace pendubridge {
namespace {

std::size_t step_index(double time, double dt) {
  return static_cast<std::size_t>(std::llround(time / dt));
}

}  // namespace

void validate(const Scenario& s) {
  if (!plant::is_finite(s.initial)) throw ConfigError("initial state must be finite", "initial");
  if (!(std::isfinite(s.duration) && s.duration > 0.0)) {
    throw ConfigError("duration must be > 0", "duration");
  }
  if (!(s.dt > 0.0 && s.dt <= plant::kMaxStep)) {
    throw ConfigError("physics step must satisfy 0 < dt <= 0.05 s", "dt");
  }
  if (!(std::isfinite(s.control_period) && s.control_period > 0.0)) {
    throw ConfigError("control period must be > 0", "Tc");
  }
  const double ratio = s.control_period / s.dt;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * ratio) {
    throw ConfigError("control period must be an integer multiple of dt", "Tc");
  }
  for (std::size_t i = 0; i < s.disturbances.size(); ++i) {
    const auto& d = s.disturbances[i];
    const std::string field = "disturbances[" + std::to_string(i) + "]";
    if (!(std::isfinite(d.time) && d.time >= 0.0 && d.time <= s.duration)) {
      throw ConfigError("disturbance time must lie within [0, duration]", field + ".time");
    }
    if (!std::isfinite(d.force)) throw ConfigError("force must be finite", field + ".force");
    if (!(std::isfinite(d.duration) && d.duration >= 0.0)) {
      throw ConfigError("duration must be >= 0", field + ".duration");
    }
  }
  if (!(std::isfinite(s.sensor_noise_std) && s.sensor_noise_std >= 0.0)) {
    throw ConfigError("sensor noise std must be >= 0", "sensor_noise_std");
  }
  if (!(std::isfinite(s.force_limit) && s.force_limit > 0.0)) {
    throw ConfigError("force limit must be > 0", "force_limit");
  }
  if (!(s.track_limit > 0.0)) throw ConfigError("track limit must be > 0", "track_limit");
}

std::size_t substeps_per_tick(const Scenario& s) {
  return static_cast<std::size_t>(std::llround(s.control_period / s.dt));
}

std::size_t total_steps(const Scenario& s) { return step_index(s.duration, s.dt); }

double disturbance_at(const Scenario& s, std::size_t step) {
  double total = 0.0;
  for (const auto& d : s.disturbances) {
    const std::size_t first = step_index(d.time, s.dt);
    const std::size_t last = step_index(d.time + d.duration, s.dt);
    if (step >= first && step < last) total += d.force;
  }
  return total;
}

}  // namespace pendubridge
