#include "pendubridge/frame.hpp"

#include <bit>
#include <cstring>

namespace pendubridge::bridge {
namespace {

class Writer {
 public:
  explicit Writer(std::size_t size) { bytes_.reserve(size); }

  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void state(const plant::PlantState& s) {
    f64(s.x);
    f64(s.x_dot);
    f64(s.theta);
    f64(s.theta_dot);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

double read_f64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return std::bit_cast<double>(v);
}

plant::PlantState read_state(std::span<const std::uint8_t> b) {
  return {read_f64(b, kHeaderSize), read_f64(b, kHeaderSize + 8), read_f64(b, kHeaderSize + 16),
          read_f64(b, kHeaderSize + 24)};
}

std::size_t frame_size(FrameKind kind) {
  switch (kind) {
    case FrameKind::sensor:
    case FrameKind::reset:
      return kStateFrameSize;
    case FrameKind::actuator:
      return kActuatorFrameSize;
    case FrameKind::shutdown:
      return kShutdownFrameSize;
  }
  return 0;
}

}  // namespace

std::string_view to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::sensor: return "sensor";
    case FrameKind::actuator: return "actuator";
    case FrameKind::reset: return "reset";
    case FrameKind::shutdown: return "shutdown";
  }
  return "unknown";
}

std::string_view to_string(DecodeError error) {
  switch (error) {
    case DecodeError::magic_mismatch: return "MagicMismatch";
    case DecodeError::unsupported_version: return "UnsupportedVersion";
    case DecodeError::unknown_kind: return "UnknownKind";
    case DecodeError::length_mismatch: return "LengthMismatch";
  }
  return "unknown";
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  Writer w(frame_size(frame.kind()));
  for (auto b : kMagic) w.u8(b);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(frame.kind()));
  w.u32(frame.seq);
  w.f64(frame.sim_time);
  std::visit(
      [&w](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SensorPayload> || std::is_same_v<T, ResetPayload>) {
          w.state(p.state);
        } else if constexpr (std::is_same_v<T, ActuatorPayload>) {
          w.f64(p.force);
        }
      },
      frame.payload);
  return w.take();
}

DecodeResult decode_frame(std::span<const std::uint8_t> b) {
  if (b.size() < kMagic.size()) return DecodeError::length_mismatch;
  if (std::memcmp(b.data(), kMagic.data(), kMagic.size()) != 0) {
    return DecodeError::magic_mismatch;
  }
  if (b.size() < 6) return DecodeError::length_mismatch;
  if (b[4] != kVersion) return DecodeError::unsupported_version;
  const std::uint8_t raw_kind = b[5];
  if (raw_kind < 1 || raw_kind > 4) return DecodeError::unknown_kind;
  const auto kind = static_cast<FrameKind>(raw_kind);
  if (b.size() != frame_size(kind)) return DecodeError::length_mismatch;

  Frame f;
  f.seq = read_u32(b, 6);
  f.sim_time = read_f64(b, 10);
  switch (kind) {
    case FrameKind::sensor: f.payload = SensorPayload{read_state(b)}; break;
    case FrameKind::actuator: f.payload = ActuatorPayload{read_f64(b, kHeaderSize)}; break;
    case FrameKind::reset: f.payload = ResetPayload{read_state(b)}; break;
    case FrameKind::shutdown: f.payload = ShutdownPayload{}; break;
  }
  return f;
}

}  // namespace pendubridge::bridge
