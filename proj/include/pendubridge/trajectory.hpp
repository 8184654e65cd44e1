#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace pendubridge {

enum class RunStatus { completed, fell, diverged, aborted, off_track };

std::string_view to_string(RunStatus status);
std::optional<RunStatus> parse_status(std::string_view text);

// One physics step. State is sampled at the start of the step; u_applied is
// the actuator force held over it (disturbances excluded).
struct TrajectoryRow {
  std::uint64_t step = 0;
  double t = 0.0;
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  double u_cmd = 0.0;      // controller output before the low-pass filter
  double u_applied = 0.0;  // after filter and saturation
  std::uint32_t seq = 0;   // control tick the step belongs to
  bool miss = false;       // tick ended without a fresh actuator command

  bool operator==(const TrajectoryRow&) const = default;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  RunStatus status = RunStatus::completed;

  bool operator==(const Trajectory&) const = default;
};

}  // namespace pendubridge
