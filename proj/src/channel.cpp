#include "pendubridge/channel.hpp"

#include <cmath>
#include <queue>

#include "pendubridge/errors.hpp"

namespace pendubridge::bridge {

void validate(const ChannelConfig& c) {
  if (!(std::isfinite(c.delay_ms) && c.delay_ms >= 0.0)) {
    throw ConfigError("delay must be >= 0", "channel.delay_ms");
  }
  if (!(std::isfinite(c.jitter_ms) && c.jitter_ms >= 0.0)) {
    throw ConfigError("jitter must be >= 0", "channel.jitter_ms");
  }
  if (!(c.drop >= 0.0 && c.drop < 1.0)) {
    throw ConfigError("drop probability must lie in [0, 1)", "channel.drop");
  }
}

bool is_perfect(const ChannelConfig& c) {
  return c.delay_ms == 0.0 && c.jitter_ms == 0.0 && c.drop == 0.0;
}

ImpairmentModel::ImpairmentModel(const ChannelConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
  validate(cfg_);
}

double ImpairmentModel::uniform() {
  // 53 random bits -> [0, 1); independent of the standard library's distributions.
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

ImpairmentModel::Decision ImpairmentModel::next() {
  Decision d;
  d.dropped = uniform() < cfg_.drop;
  const double delay_ms = cfg_.delay_ms + cfg_.jitter_ms * uniform();
  d.delay = std::chrono::nanoseconds(std::llround(delay_ms * 1e6));
  return d;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Pending {
  Clock::time_point due;
  std::uint64_t order;
  std::vector<std::uint8_t> bytes;
  net::Endpoint to;
  std::size_t record;

  bool operator>(const Pending& other) const {
    return due != other.due ? due > other.due : order > other.order;
  }
};

}  // namespace

RelayStats run_channel_relay(const ChannelConfig& channel, const RelayConfig& relay,
                             const net::UdpSocket& socket, std::stop_token stop) {
  ImpairmentModel model(channel);
  RelayStats stats;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
  std::uint64_t order = 0;
  bool shutdown_seen = false;
  double delay_sum_ms = 0.0;
  constexpr auto kSlice = std::chrono::milliseconds(20);

  while (!stop.stop_requested()) {
    if (shutdown_seen && relay.stop_on_shutdown && queue.empty()) break;

    auto wait = std::chrono::duration_cast<std::chrono::nanoseconds>(kSlice);
    if (!queue.empty()) {
      wait = std::min(wait, std::chrono::duration_cast<std::chrono::nanoseconds>(
                                queue.top().due - Clock::now()));
      if (wait.count() < 0) wait = std::chrono::nanoseconds(0);
    }
    if (auto datagram = socket.receive(wait)) {
      const auto received = Clock::now();
      PacketRecord rec;
      rec.received = received;
      if (datagram->from == relay.peer_a) {
        rec.from_a = true;
      } else if (!(datagram->from == relay.peer_b)) {
        ++stats.ignored;
        continue;
      }
      const DecodeResult decoded = decode_frame(datagram->bytes);
      if (const auto* frame = std::get_if<Frame>(&decoded)) {
        rec.kind = frame->kind();
        rec.seq = frame->seq;
        if (frame->kind() == FrameKind::shutdown) shutdown_seen = true;
      }
      const auto decision = model.next();
      rec.planned_delay = decision.delay;
      rec.dropped = decision.dropped;
      stats.packets.push_back(rec);
      if (decision.dropped) {
        ++stats.dropped;
      } else {
        queue.push({received + decision.delay, order++, std::move(datagram->bytes),
                    rec.from_a ? relay.peer_b : relay.peer_a, stats.packets.size() - 1});
      }
    }

    while (!queue.empty() && queue.top().due <= Clock::now()) {
      const Pending& p = queue.top();
      socket.send_to(p.bytes, p.to);
      auto& rec = stats.packets[p.record];
      rec.sent = Clock::now();
      delay_sum_ms += std::chrono::duration<double, std::milli>(rec.sent - rec.received).count();
      ++stats.forwarded;
      queue.pop();
    }
  }
  if (stats.forwarded > 0) stats.mean_added_delay_ms = delay_sum_ms / stats.forwarded;
  return stats;
}

}  // namespace pendubridge::bridge
