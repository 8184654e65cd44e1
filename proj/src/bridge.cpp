#include "pendubridge/bridge.hpp"

#include <chrono>
#include <cmath>
#include <queue>
#include <thread>

#include "pendubridge/errors.hpp"
#include "run_guard.hpp"

namespace pendubridge::bridge {

std::string_view to_string(HoldPolicy policy) {
  return policy == HoldPolicy::last_force ? "zoh" : "zero";
}

std::optional<HoldPolicy> parse_hold_policy(std::string_view text) {
  if (text == "zoh") return HoldPolicy::last_force;
  if (text == "zero") return HoldPolicy::zero_force;
  return std::nullopt;
}

std::string_view to_string(EventType type) {
  switch (type) {
    case EventType::sent: return "sent";
    case EventType::received: return "received";
    case EventType::stale: return "stale";
    case EventType::duplicate: return "duplicate";
    case EventType::miss: return "miss";
    case EventType::dropped: return "dropped";
    case EventType::decode_error: return "decode_error";
    case EventType::rejected: return "rejected";
  }
  return "unknown";
}

void validate(const WireConfig& w) {
  if (w.timeout_ms <= 0) throw ConfigError("timeout must be > 0", "wire.timeout_ms");
  if (w.max_misses < 1) throw ConfigError("max misses must be >= 1", "wire.max_misses");
  if (w.idle_timeout_ms < 0) {
    throw ConfigError("idle timeout must be >= 0", "wire.idle_timeout_ms");
  }
}

// ---------------------------------------------------------------------------
// PlantSession

PlantSession::PlantSession(const plant::PlantParams& params, const Scenario& scenario)
    : params_(params),
      scenario_(scenario),
      substeps_(substeps_per_tick(scenario)),
      steps_(total_steps(scenario)),
      rng_(scenario.seed),
      noise_(0.0, scenario.sensor_noise_std),
      state_(scenario.initial) {
  plant::validate(params_);
  validate(scenario_);
  traj_.rows.reserve(steps_ + 1);
}

std::uint32_t PlantSession::ticks_total() const {
  return static_cast<std::uint32_t>((steps_ + substeps_ - 1) / substeps_);
}

Frame PlantSession::sensor() {
  plant::PlantState measured = state_;
  if (scenario_.sensor_noise_std > 0.0) measured.theta += noise_(rng_);
  return sensor_frame(tick(), now(), measured);
}

void PlantSession::apply(double force, double u_cmd) {
  force_ = plant::clamp_force(force, scenario_.force_limit);
  u_cmd_ = u_cmd;
  fresh_ = true;
}

void PlantSession::hold(HoldPolicy policy) {
  if (policy == HoldPolicy::zero_force) {
    force_ = 0.0;
    u_cmd_ = 0.0;
  }
}

void PlantSession::advance() {
  if (done()) return;
  traj_.rows.push_back(make_row(step_, scenario_.dt, state_, u_cmd_, force_, tick(), false));
  state_ = plant::rk4_step(params_, state_, {force_ + disturbance_at(scenario_, step_)},
                           scenario_.dt);
  ++step_;
  status_ = terminal_status(state_, scenario_);
  if (at_tick_start() || status_) close_tick();
}

void PlantSession::run_tick() {
  do {
    advance();
  } while (!done() && !at_tick_start());
}

void PlantSession::close_tick() {
  if (tick_first_row_ >= traj_.rows.size()) return;
  const bool missed = !fresh_;
  for (std::size_t i = tick_first_row_; i < traj_.rows.size(); ++i) traj_.rows[i].miss = missed;
  tick_first_row_ = traj_.rows.size();
  last_tick_missed_ = missed;
  fresh_ = false;
}

Trajectory PlantSession::finish() {
  close_tick();
  const std::uint32_t seq = traj_.rows.empty() ? 0 : traj_.rows.back().seq;
  traj_.rows.push_back(
      make_row(step_, scenario_.dt, state_, u_cmd_, force_, seq, last_tick_missed_));
  traj_.status = status_.value_or(RunStatus::completed);
  return std::move(traj_);
}

// ---------------------------------------------------------------------------
// ControllerSession

ControllerSession::ControllerSession(const control::ControllerConfig& cfg)
    : cfg_(cfg), lowpass_{0.0, cfg.lowpass_tau} {
  control::validate(cfg_);
}

std::optional<ControllerSession::Reply> ControllerSession::on_sensor(const Frame& sensor) {
  const auto* payload = std::get_if<SensorPayload>(&sensor.payload);
  if (payload == nullptr) throw InputDomainError("controller expects a sensor frame");
  if (last_seq_ && sensor.seq <= *last_seq_) return std::nullopt;

  const control::PidOutput out = control::pid_step(pid_, cfg_, plant::phi_of(payload->state.theta));
  const control::LowPassOutput filtered = control::lowpass_step(lowpass_, out.command.force, cfg_.period);
  pid_ = out.state;
  lowpass_ = filtered.state;
  last_seq_ = sensor.seq;
  const double force = plant::clamp_force(filtered.output, cfg_.saturation);
  return Reply{actuator_frame(sensor.seq, sensor.sim_time, force), out.command.force};
}

void ControllerSession::reset() {
  pid_ = {};
  lowpass_ = {0.0, cfg_.lowpass_tau};
}

// ---------------------------------------------------------------------------
// In-process binding

namespace {

void log(std::vector<SessionEvent>& events, EventType type, const Frame& f) {
  events.push_back({type, f.kind(), f.seq, f.sim_time});
}

LoopRun lockstep_loop(PlantSession& plant, ControllerSession& controller) {
  LoopRun run;
  while (!plant.done()) {
    const Frame sensor = plant.sensor();
    log(run.events, EventType::sent, sensor);
    const auto reply = controller.on_sensor(sensor);
    log(run.events, EventType::received, reply->actuator);
    plant.apply(std::get<ActuatorPayload>(reply->actuator.payload).force, reply->u_cmd);
    plant.run_tick();
  }
  log(run.events, EventType::sent, shutdown_frame(plant.ticks_total(), plant.now()));
  run.trajectory = plant.finish();
  return run;
}

struct InFlight {
  std::int64_t arrive_ns;
  std::uint64_t order;
  Frame frame;
  double u_cmd;
  bool to_controller;

  bool operator>(const InFlight& other) const {
    return arrive_ns != other.arrive_ns ? arrive_ns > other.arrive_ns : order > other.order;
  }
};

LoopRun impaired_loop(PlantSession& plant, ControllerSession& controller,
                      const ChannelConfig& channel, HoldPolicy hold, double dt) {
  LoopRun run;
  ImpairmentModel link(channel);
  std::priority_queue<InFlight, std::vector<InFlight>, std::greater<>> in_flight;
  std::uint64_t order = 0;
  const std::int64_t dt_ns = std::llround(dt * 1e9);
  std::optional<std::uint32_t> applied_seq;

  auto transmit = [&](const Frame& f, double u_cmd, bool to_controller, std::int64_t at_ns) {
    log(run.events, EventType::sent, f);
    const auto decision = link.next();
    if (decision.dropped) {
      log(run.events, EventType::dropped, f);
      return;
    }
    in_flight.push({at_ns + decision.delay.count(), order++, f, u_cmd, to_controller});
  };

  while (!plant.done()) {
    const std::int64_t now_ns = static_cast<std::int64_t>(plant.step()) * dt_ns;
    if (plant.at_tick_start()) {
      if (plant.step() > 0 && plant.last_tick_missed()) {
        log(run.events, EventType::miss, sensor_frame(plant.tick() - 1, plant.now(), {}));
        ++run.misses;
        if (hold == HoldPolicy::zero_force) plant.hold(hold);
      }
      transmit(plant.sensor(), 0.0, true, now_ns);
    }
    while (!in_flight.empty() && in_flight.top().arrive_ns <= now_ns) {
      const InFlight msg = in_flight.top();
      in_flight.pop();
      log(run.events, EventType::received, msg.frame);
      if (msg.to_controller) {
        std::optional<ControllerSession::Reply> reply;
        try {
          reply = controller.on_sensor(msg.frame);
        } catch (const ControllerFault&) {
          log(run.events, EventType::rejected, msg.frame);
          continue;
        }
        if (!reply) {
          log(run.events, EventType::duplicate, msg.frame);
          continue;
        }
        transmit(reply->actuator, reply->u_cmd, false, msg.arrive_ns);
      } else if (!applied_seq || msg.frame.seq > *applied_seq) {
        applied_seq = msg.frame.seq;
        plant.apply(std::get<ActuatorPayload>(msg.frame.payload).force, msg.u_cmd);
      } else {
        log(run.events, EventType::stale, msg.frame);
      }
    }
    plant.advance();
  }
  if (plant.last_tick_missed()) {
    const std::uint32_t last = plant.tick() - (plant.at_tick_start() ? 1 : 0);
    log(run.events, EventType::miss, sensor_frame(last, plant.now(), {}));
    ++run.misses;
  }
  log(run.events, EventType::sent, shutdown_frame(plant.ticks_total(), plant.now()));
  run.trajectory = plant.finish();
  return run;
}

}  // namespace

LoopRun inproc_loop(const plant::PlantParams& params, const control::ControllerConfig& cfg,
                    const Scenario& scenario, const ChannelConfig& channel, HoldPolicy hold) {
  validate(channel);
  control::validate(cfg);
  require_matching_period(cfg, scenario);
  PlantSession plant(params, scenario);
  ControllerSession controller(cfg);
  if (is_perfect(channel)) return lockstep_loop(plant, controller);
  return impaired_loop(plant, controller, channel, hold, scenario.dt);
}

// ---------------------------------------------------------------------------
// UDP endpoints

namespace {

using Clock = std::chrono::steady_clock;

net::Endpoint require_peer(const WireConfig& wire) {
  if (wire.peer.empty()) throw ConfigError("peer address is required", "wire.peer");
  return net::Endpoint::parse(wire.peer);
}

}  // namespace

LoopRun run_plant_endpoint(const plant::PlantParams& params, const WireConfig& wire,
                           const Scenario& scenario, const net::UdpSocket& socket,
                           std::stop_token stop) {
  validate(wire);
  const net::Endpoint peer = require_peer(wire);
  PlantSession plant(params, scenario);
  LoopRun run;
  int consecutive = 0;
  bool peer_shutdown = false;
  const auto start = Clock::now();
  const auto timeout = std::chrono::milliseconds(wire.timeout_ms);

  while (!plant.done() && !peer_shutdown) {
    if (stop.stop_requested()) {
      plant.abort();
      break;
    }
    if (wire.realtime) {
      std::this_thread::sleep_until(
          start + std::chrono::duration_cast<Clock::duration>(
                      std::chrono::duration<double>(plant.now())));
    }
    const std::uint32_t k = plant.tick();
    const Frame sensor = plant.sensor();
    socket.send_to(encode_frame(sensor), peer);
    log(run.events, EventType::sent, sensor);

    bool answered = false;
    const auto deadline = Clock::now() + timeout;
    while (!answered && !peer_shutdown) {
      const auto left = deadline - Clock::now();
      if (left <= Clock::duration::zero()) break;
      const auto datagram = socket.receive(left);
      if (!datagram) continue;
      const DecodeResult decoded = decode_frame(datagram->bytes);
      const auto* frame = std::get_if<Frame>(&decoded);
      if (frame == nullptr) {
        run.events.push_back({EventType::decode_error, std::nullopt, 0, plant.now()});
        continue;
      }
      switch (frame->kind()) {
        case FrameKind::actuator: {
          const double force = std::get<ActuatorPayload>(frame->payload).force;
          if (frame->seq != k) {
            log(run.events, EventType::stale, *frame);
          } else if (!std::isfinite(force)) {
            log(run.events, EventType::rejected, *frame);
          } else {
            log(run.events, EventType::received, *frame);
            plant.apply(force, force);
            answered = true;
          }
          break;
        }
        case FrameKind::reset:
          log(run.events, EventType::received, *frame);
          if (plant::is_finite(std::get<ResetPayload>(frame->payload).state)) {
            plant.reset(std::get<ResetPayload>(frame->payload).state);
          }
          break;
        case FrameKind::shutdown:
          log(run.events, EventType::received, *frame);
          peer_shutdown = true;
          break;
        case FrameKind::sensor:
          log(run.events, EventType::rejected, *frame);
          break;
      }
    }
    if (peer_shutdown) break;

    if (answered) {
      consecutive = 0;
    } else {
      log(run.events, EventType::miss, sensor);
      ++run.misses;
      ++consecutive;
      plant.hold(wire.hold);
    }
    plant.run_tick();
    if (consecutive >= wire.max_misses) {
      plant.abort();
      break;
    }
  }

  const Frame bye = shutdown_frame(plant.tick() + (plant.at_tick_start() ? 0 : 1), plant.now());
  socket.send_to(encode_frame(bye), peer);
  log(run.events, EventType::sent, bye);
  run.trajectory = plant.finish();
  return run;
}

LoopRun run_plant_endpoint(const plant::PlantParams& params, const WireConfig& wire,
                           const Scenario& scenario) {
  const auto socket = net::UdpSocket::bind(net::Endpoint::parse(wire.listen));
  return run_plant_endpoint(params, wire, scenario, socket);
}

ControllerRun run_controller_endpoint(const control::ControllerConfig& cfg, const WireConfig& wire,
                                      const net::UdpSocket& socket, std::stop_token stop) {
  validate(wire);
  const net::Endpoint peer = require_peer(wire);
  ControllerSession session(cfg);
  ControllerRun run;
  constexpr auto kSlice = std::chrono::milliseconds(50);
  auto last_traffic = Clock::now();

  for (;;) {
    if (stop.stop_requested()) {
      run.exit = ControllerExit::stopped;
      return run;
    }
    if (wire.idle_timeout_ms > 0 &&
        Clock::now() - last_traffic > std::chrono::milliseconds(wire.idle_timeout_ms)) {
      run.exit = ControllerExit::idle_timeout;
      return run;
    }
    const auto datagram = socket.receive(kSlice);
    if (!datagram) continue;
    last_traffic = Clock::now();

    const DecodeResult decoded = decode_frame(datagram->bytes);
    const auto* frame = std::get_if<Frame>(&decoded);
    if (frame == nullptr) {
      ++run.decode_errors;
      run.events.push_back({EventType::decode_error, std::nullopt, 0, 0.0});
      continue;
    }
    switch (frame->kind()) {
      case FrameKind::sensor: {
        log(run.events, EventType::received, *frame);
        std::optional<ControllerSession::Reply> reply;
        try {
          reply = session.on_sensor(*frame);
        } catch (const ControllerFault&) {
          log(run.events, EventType::rejected, *frame);
          break;
        }
        if (!reply) {
          ++run.duplicates;
          log(run.events, EventType::duplicate, *frame);
          break;
        }
        socket.send_to(encode_frame(reply->actuator), peer);
        ++run.replies;
        log(run.events, EventType::sent, reply->actuator);
        break;
      }
      case FrameKind::reset:
        log(run.events, EventType::received, *frame);
        session.reset();
        break;
      case FrameKind::shutdown:
        log(run.events, EventType::received, *frame);
        run.exit = ControllerExit::shutdown;
        return run;
      case FrameKind::actuator:
        log(run.events, EventType::rejected, *frame);
        break;
    }
  }
}

ControllerRun run_controller_endpoint(const control::ControllerConfig& cfg,
                                      const WireConfig& wire) {
  const auto socket = net::UdpSocket::bind(net::Endpoint::parse(wire.listen));
  return run_controller_endpoint(cfg, wire, socket);
}

}  // namespace pendubridge::bridge
