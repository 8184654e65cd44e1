#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "pendubridge/bridge.hpp"
#include "pendubridge/config.hpp"
#include "pendubridge/metrics.hpp"

namespace pendubridge::harness {

struct ExperimentResult {
  Trajectory trajectory;
  Metrics metrics;
  std::vector<bridge::SessionEvent> events;  // plant-side frame log
};

// Runs one episode with cfg.controller.gains. In udp mode the controller
// endpoint (and the channel relay when the channel is impaired) run on
// their own threads over loopback sockets.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SweepPoint {
  double delay_ms = 0.0;
  RunStatus status = RunStatus::completed;
  double peak_phi = 0.0;
  std::size_t misses = 0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<double> boundary_ms;    // smallest swept delay that loses the loop
  std::optional<double> first_fall_ms;  // smallest swept delay at which the pendulum falls
};

inline const std::vector<double> kDefaultDelaysMs{0.0, 10.0, 20.0, 50.0, 100.0, 200.0};

// Fixed one-way delay applied in both directions, everything else from cfg.
SweepResult latency_sweep(const ExperimentConfig& cfg,
                          const std::vector<double>& delays_ms = kDefaultDelaysMs);

nlohmann::json to_json(const SweepResult& sweep);

// A, B, C, D, q, both transfer functions, their poles and the eigenvalues of A.
nlohmann::json model_report(const plant::PlantParams& params);

}  // namespace pendubridge::harness
