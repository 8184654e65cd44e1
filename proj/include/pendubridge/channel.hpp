#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <stop_token>
#include <vector>

#include "pendubridge/frame.hpp"
#include "pendubridge/udp.hpp"

namespace pendubridge::bridge {

// Per-packet impairment: delay = delay_ms + Uniform(0, jitter_ms), lost with
// probability drop. Identical seeds give identical decision sequences.
struct ChannelConfig {
  double delay_ms = 0.0;
  double jitter_ms = 0.0;
  double drop = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ChannelConfig&) const = default;
};

void validate(const ChannelConfig& cfg);

bool is_perfect(const ChannelConfig& cfg);

class ImpairmentModel {
 public:
  struct Decision {
    bool dropped = false;
    std::chrono::nanoseconds delay{0};
  };

  explicit ImpairmentModel(const ChannelConfig& cfg);

  // Consumes exactly two draws per packet, drop first, then jitter.
  Decision next();

 private:
  double uniform();

  ChannelConfig cfg_;
  std::mt19937_64 rng_;
};

struct RelayConfig {
  net::Endpoint peer_a;
  net::Endpoint peer_b;
  bool stop_on_shutdown = true;  // exit once a Shutdown frame has been handled
};

struct PacketRecord {
  bool from_a = false;
  bool dropped = false;
  std::optional<FrameKind> kind;  // empty when the bytes are not a valid frame
  std::uint32_t seq = 0;
  std::chrono::steady_clock::time_point received;
  std::chrono::steady_clock::time_point sent;  // unset when dropped
  std::chrono::nanoseconds planned_delay{0};
};

struct RelayStats {
  std::size_t forwarded = 0;
  std::size_t dropped = 0;
  std::size_t ignored = 0;  // datagrams from neither peer
  double mean_added_delay_ms = 0.0;
  std::vector<PacketRecord> packets;
};

// Bidirectional forwarder: datagrams from peer_a go to peer_b and vice versa,
// each subject to the impairment model. Single-threaded event loop; returns
// when a Shutdown has been handled (if configured) or on stop request.
RelayStats run_channel_relay(const ChannelConfig& channel, const RelayConfig& relay,
                             const net::UdpSocket& socket, std::stop_token stop = {});

}  // namespace pendubridge::bridge
