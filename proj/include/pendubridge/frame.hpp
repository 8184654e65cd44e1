#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "pendubridge/plant.hpp"

namespace pendubridge::bridge {

// Wire layout, little-endian:
//   magic "CPSB" | version u8 | kind u8 | seq u32 | sim_time f64 | payload f64...
// Sensor and Reset carry (x, x_dot, theta, theta_dot); Actuator carries the
// force; Shutdown has no payload.
inline constexpr std::array<std::uint8_t, 4> kMagic{0x43, 0x50, 0x53, 0x42};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 18;
inline constexpr std::size_t kStateFrameSize = kHeaderSize + 32;
inline constexpr std::size_t kActuatorFrameSize = kHeaderSize + 8;
inline constexpr std::size_t kShutdownFrameSize = kHeaderSize;
inline constexpr std::size_t kMaxFrameSize = kStateFrameSize;

enum class FrameKind : std::uint8_t { sensor = 1, actuator = 2, reset = 3, shutdown = 4 };

struct SensorPayload {
  plant::PlantState state;
  bool operator==(const SensorPayload&) const = default;
};

struct ActuatorPayload {
  double force = 0.0;
  bool operator==(const ActuatorPayload&) const = default;
};

struct ResetPayload {
  plant::PlantState state;
  bool operator==(const ResetPayload&) const = default;
};

struct ShutdownPayload {
  bool operator==(const ShutdownPayload&) const = default;
};

// Alternative order matches FrameKind - 1.
using Payload = std::variant<SensorPayload, ActuatorPayload, ResetPayload, ShutdownPayload>;

struct Frame {
  std::uint32_t seq = 0;
  double sim_time = 0.0;
  Payload payload;

  FrameKind kind() const { return static_cast<FrameKind>(payload.index() + 1); }
  bool operator==(const Frame&) const = default;
};

std::string_view to_string(FrameKind kind);

enum class DecodeError { magic_mismatch, unsupported_version, unknown_kind, length_mismatch };

std::string_view to_string(DecodeError error);

using DecodeResult = std::variant<Frame, DecodeError>;

std::vector<std::uint8_t> encode_frame(const Frame& frame);

// Total: never throws, rejects anything but an exact frame.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

inline Frame sensor_frame(std::uint32_t seq, double t, const plant::PlantState& s) {
  return {seq, t, SensorPayload{s}};
}
inline Frame actuator_frame(std::uint32_t seq, double t, double force) {
  return {seq, t, ActuatorPayload{force}};
}
inline Frame reset_frame(std::uint32_t seq, double t, const plant::PlantState& s) {
  return {seq, t, ResetPayload{s}};
}
inline Frame shutdown_frame(std::uint32_t seq, double t) { return {seq, t, ShutdownPayload{}}; }

}  // namespace pendubridge::bridge
