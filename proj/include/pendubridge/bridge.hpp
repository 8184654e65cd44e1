#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stop_token>
#include <string>
#include <vector>

#include "pendubridge/channel.hpp"
#include "pendubridge/control.hpp"
#include "pendubridge/frame.hpp"
#include "pendubridge/scenario.hpp"
#include "pendubridge/trajectory.hpp"
#include "pendubridge/udp.hpp"

namespace pendubridge::bridge {

// What the plant applies for a tick whose actuator reply never arrived.
enum class HoldPolicy { last_force, zero_force };

std::string_view to_string(HoldPolicy policy);
std::optional<HoldPolicy> parse_hold_policy(std::string_view text);

struct WireConfig {
  std::string listen = "127.0.0.1:0";
  std::string peer;
  int timeout_ms = 1000;        // plant: wait for each actuator reply
  int max_misses = 10;          // plant: consecutive misses before abort
  HoldPolicy hold = HoldPolicy::last_force;
  int idle_timeout_ms = 30000;  // controller: give up after this long without traffic; 0 = never
  bool realtime = false;        // plant: pace ticks to the wall clock

  bool operator==(const WireConfig&) const = default;
};

void validate(const WireConfig& wire);

enum class EventType {
  sent,
  received,
  stale,         // actuator with a seq other than the one awaited
  duplicate,     // sensor seq already answered
  miss,          // no actuator for the tick
  dropped,       // lost on an impaired link
  decode_error,
  rejected,      // well-formed frame the receiver cannot use
};

std::string_view to_string(EventType type);

struct SessionEvent {
  EventType type = EventType::sent;
  std::optional<FrameKind> kind;
  std::uint32_t seq = 0;
  double sim_time = 0.0;

  bool operator==(const SessionEvent&) const = default;
};

// Plant side of the lockstep: owns the physical state, produces sensor frames,
// integrates the physics substeps of each tick under a zero-order hold and
// records the trajectory.
class PlantSession {
 public:
  PlantSession(const plant::PlantParams& params, const Scenario& scenario);

  bool done() const { return status_.has_value() || step_ >= steps_; }
  bool at_tick_start() const { return step_ % substeps_ == 0; }
  std::uint32_t tick() const { return static_cast<std::uint32_t>(step_ / substeps_); }
  std::size_t step() const { return step_; }
  double now() const { return static_cast<double>(step_) * scenario_.dt; }
  std::uint32_t ticks_total() const;
  bool last_tick_missed() const { return last_tick_missed_; }
  const plant::PlantState& state() const { return state_; }

  // Sensor frame for the current tick. Draws measurement noise when enabled,
  // so it must be called exactly once per tick.
  Frame sensor();

  // A fresh actuator command for the current tick. `u_cmd` is only logged.
  void apply(double force, double u_cmd);

  // No command for this tick: keep the last force or switch to zero.
  void hold(HoldPolicy policy);

  void reset(const plant::PlantState& state) { state_ = state; }
  void abort() { status_ = RunStatus::aborted; }

  // One physics step.
  void advance();

  // Physics steps up to the next tick boundary (or the end of the episode).
  void run_tick();

  // Appends the final state row and returns the trajectory.
  Trajectory finish();

 private:
  void close_tick();

  plant::PlantParams params_;
  Scenario scenario_;
  std::size_t substeps_;
  std::size_t steps_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_;

  plant::PlantState state_;
  std::size_t step_ = 0;
  std::optional<RunStatus> status_;
  double force_ = 0.0;
  double u_cmd_ = 0.0;
  bool fresh_ = false;
  bool last_tick_missed_ = false;
  std::size_t tick_first_row_ = 0;
  Trajectory traj_;
};

// Controller side: PID, low-pass and saturation with all state held here.
// Exactly one reply per sensor seq; repeated or older seqs are dropped.
class ControllerSession {
 public:
  explicit ControllerSession(const control::ControllerConfig& cfg);

  struct Reply {
    Frame actuator;
    double u_cmd;  // PID output before filtering
  };

  // Throws ControllerFault for a non-finite angle.
  std::optional<Reply> on_sensor(const Frame& sensor);

  void reset();

  const control::PidState& pid() const { return pid_; }

 private:
  control::ControllerConfig cfg_;
  control::PidState pid_;
  control::LowPassState lowpass_;
  std::optional<std::uint32_t> last_seq_;
};

struct LoopRun {
  Trajectory trajectory;
  std::vector<SessionEvent> events;
  std::size_t misses = 0;
};

// Direct synchronous binding: frame values handed across in-process.
// With a perfect channel this is the exact lockstep and reproduces
// control::closed_loop_sim bit for bit. With impairments, frames travel on a
// virtual-time link: the plant keeps integrating, applies the newest actuator
// frame at the first physics step at or after its arrival, and ignores older
// ones.
LoopRun inproc_loop(const plant::PlantParams& params, const control::ControllerConfig& cfg,
                    const Scenario& scenario, const ChannelConfig& channel = {},
                    HoldPolicy hold = HoldPolicy::last_force);

// UDP plant endpoint. Sends Sensor(k), waits for Actuator(k) up to the
// timeout, applies the hold policy on a miss and aborts after max_misses
// consecutive misses. Sends one Shutdown at the end.
LoopRun run_plant_endpoint(const plant::PlantParams& params, const WireConfig& wire,
                           const Scenario& scenario, const net::UdpSocket& socket,
                           std::stop_token stop = {});

LoopRun run_plant_endpoint(const plant::PlantParams& params, const WireConfig& wire,
                           const Scenario& scenario);

enum class ControllerExit { shutdown, idle_timeout, stopped };

struct ControllerRun {
  ControllerExit exit = ControllerExit::shutdown;
  std::vector<SessionEvent> events;
  std::size_t replies = 0;
  std::size_t duplicates = 0;
  std::size_t decode_errors = 0;
};

// UDP controller endpoint: replies to every new Sensor with an Actuator of the
// same seq, sent to wire.peer. Returns on Shutdown.
ControllerRun run_controller_endpoint(const control::ControllerConfig& cfg, const WireConfig& wire,
                                      const net::UdpSocket& socket, std::stop_token stop = {});

ControllerRun run_controller_endpoint(const control::ControllerConfig& cfg, const WireConfig& wire);

}  // namespace pendubridge::bridge
