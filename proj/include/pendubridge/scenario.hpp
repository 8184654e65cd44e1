#pragma once

#include <cstdint>
#include <vector>

#include "pendubridge/plant.hpp"

namespace pendubridge {

// Additive cart push, active over [time, time + duration).
struct Disturbance {
  double time = 0.0;      // s
  double force = 0.0;     // N
  double duration = 0.0;  // s

  bool operator==(const Disturbance&) const = default;
};

struct Scenario {
  plant::PlantState initial{0.0, 0.0, plant::kPi + 0.05, 0.0};
  double duration = 10.0;         // s
  double dt = 1e-3;               // physics step (s)
  double control_period = 0.01;   // Tc (s), an integer multiple of dt
  std::vector<Disturbance> disturbances{{3.0, 2.0, 0.1}};
  double sensor_noise_std = 0.0;  // rad, Gaussian on the measured angle
  std::uint64_t seed = 0;
  double force_limit = plant::kDefaultForceLimit;  // plant-side actuator limit (N)
  double track_limit = 2.5;                        // |x| beyond this ends the episode (m)

  bool operator==(const Scenario&) const = default;
};

// Throws ConfigError naming the offending field.
void validate(const Scenario& scenario);

// Tc / dt.
std::size_t substeps_per_tick(const Scenario& scenario);

// Number of physics steps in the episode, duration / dt rounded.
std::size_t total_steps(const Scenario& scenario);

// Sum of disturbance forces acting over physics step `step`.
double disturbance_at(const Scenario& scenario, std::size_t step);

}  // namespace pendubridge
