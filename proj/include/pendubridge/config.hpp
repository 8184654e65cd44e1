#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "pendubridge/bridge.hpp"
#include "pendubridge/channel.hpp"
#include "pendubridge/control.hpp"
#include "pendubridge/plant.hpp"
#include "pendubridge/scenario.hpp"
#include "pendubridge/tuning.hpp"

namespace pendubridge::harness {

enum class Transport { inproc, udp };

std::string_view to_string(Transport transport);

struct ExperimentConfig {
  plant::PlantParams plant;
  control::ControllerConfig controller;  // period always equals scenario.control_period
  Scenario scenario;
  control::TuningConfig tuning;  // loop-structure fields follow the controller
  bridge::ChannelConfig channel;
  bridge::WireConfig wire;
  Transport transport = Transport::inproc;
  double settle_tolerance = 0.005;  // rad

  bool operator==(const ExperimentConfig&) const = default;
};

// Parses and validates a configuration document. Missing keys take defaults;
// unknown keys and invalid values throw ConfigError with the dotted field path.
ExperimentConfig load_config(const nlohmann::json& doc);
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

// Fully expanded document; load_config(dump(c)) == c.
nlohmann::json dump(const ExperimentConfig& cfg);

// Gains files hold {"kp", "ki", "kd"} and optionally "cost".
control::PidGains load_gains(const nlohmann::json& doc);
control::PidGains load_gains_file(const std::string& path);
nlohmann::json dump_gains(const control::PidGains& gains, double cost);

nlohmann::json read_json_file(const std::string& path);

}  // namespace pendubridge::harness
