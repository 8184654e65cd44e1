#include <doctest.h>

#include <chrono>
#include <functional>
#include <set>
#include <thread>

#include "pendubridge/bridge.hpp"
#include "pendubridge/control.hpp"
#include "pendubridge/errors.hpp"

using namespace pendubridge;
using namespace pendubridge::bridge;
using namespace std::chrono_literals;

namespace {

net::Endpoint loopback() { return net::Endpoint::parse("127.0.0.1:0"); }

control::ControllerConfig tuned_like() {
  control::ControllerConfig c;
  c.gains = {150.0, 3.4, 7.6};
  return c;
}

Scenario short_scenario(double duration = 1.0) {
  Scenario s;
  s.duration = duration;
  s.disturbances.clear();
  if (duration > 0.5) s.disturbances = {{0.3, 2.0, 0.1}};
  return s;
}

// Scripted peer for the plant endpoint: answers each sensor frame through
// `respond`, which may send any number of datagrams back.
struct ScriptedController {
  net::UdpSocket socket = net::UdpSocket::bind(loopback());
  std::jthread thread;
  std::vector<Frame> received;

  void start(std::function<void(const Frame&, const net::UdpSocket&, const net::Endpoint&)> respond) {
    thread = std::jthread([this, respond](std::stop_token stop) {
      while (!stop.stop_requested()) {
        const auto d = socket.receive(20ms);
        if (!d) continue;
        const auto r = decode_frame(d->bytes);
        const auto* f = std::get_if<Frame>(&r);
        if (f == nullptr) continue;
        received.push_back(*f);
        if (f->kind() == FrameKind::shutdown) return;
        respond(*f, socket, d->from);
      }
    });
  }
};

WireConfig plant_wire(const ScriptedController& c, int timeout_ms, int max_misses, HoldPolicy hold) {
  WireConfig w;
  w.peer = c.socket.local().to_string();
  w.timeout_ms = timeout_ms;
  w.max_misses = max_misses;
  w.hold = hold;
  return w;
}

std::size_t count(const std::vector<SessionEvent>& events, EventType type,
                  std::optional<FrameKind> kind = std::nullopt) {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [&](const auto& e) {
    return e.type == type && (!kind || e.kind == kind);
  }));
}

}  // namespace

TEST_SUITE("bridge") {

TEST_CASE("in-process lockstep reproduces the reference loop bit for bit") {
  Scenario s = short_scenario(3.0);
  s.sensor_noise_std = 0.001;
  s.seed = 5;
  const auto cfg = tuned_like();
  CHECK(inproc_loop({}, cfg, s).trajectory == control::closed_loop_sim({}, cfg, s));
  s.initial.theta = plant::kPi + 0.4;
  CHECK(inproc_loop({}, cfg, s).trajectory == control::closed_loop_sim({}, cfg, s));
}

TEST_CASE("in-process frame log") {
  const auto run = inproc_loop({}, tuned_like(), short_scenario());
  std::vector<std::uint32_t> sensor_seqs, actuator_seqs;
  for (const auto& e : run.events) {
    if (e.kind == FrameKind::sensor) sensor_seqs.push_back(e.seq);
    if (e.kind == FrameKind::actuator) actuator_seqs.push_back(e.seq);
  }
  REQUIRE(sensor_seqs.size() == 100);
  for (std::uint32_t k = 0; k < 100; ++k) {
    CHECK(sensor_seqs[k] == k);
    CHECK(actuator_seqs[k] == k);
  }
  CHECK(count(run.events, EventType::sent, FrameKind::shutdown) == 1);
  CHECK(run.misses == 0);
}

TEST_CASE("a fall ends the lockstep early") {
  Scenario s = short_scenario(5.0);
  s.initial.theta = plant::kPi + 0.01;
  control::ControllerConfig c;
  const auto run = inproc_loop({}, c, s);
  CHECK(run.trajectory.status == RunStatus::fell);
  CHECK(run.trajectory == control::closed_loop_sim({}, c, s));
  CHECK(count(run.events, EventType::sent, FrameKind::shutdown) == 1);
}

TEST_CASE("UDP lockstep over loopback matches the in-process run") {
  const Scenario s = short_scenario(2.0);
  const auto cfg = tuned_like();
  const auto ref = inproc_loop({}, cfg, s).trajectory;

  auto ctl_sock = net::UdpSocket::bind(loopback());
  auto plant_sock = net::UdpSocket::bind(loopback());
  WireConfig cw;
  cw.peer = plant_sock.local().to_string();
  WireConfig pw;
  pw.peer = ctl_sock.local().to_string();
  ControllerRun crun;
  std::jthread ctl([&] { crun = run_controller_endpoint(cfg, cw, ctl_sock); });
  const auto prun = run_plant_endpoint({}, pw, s, plant_sock);
  ctl.join();

  REQUIRE(prun.trajectory.rows.size() == ref.rows.size());
  CHECK(prun.trajectory.status == ref.status);
  for (std::size_t i = 0; i < ref.rows.size(); ++i) {
    const auto& a = prun.trajectory.rows[i];
    const auto& b = ref.rows[i];
    CHECK(a.x == b.x);
    CHECK(a.x_dot == b.x_dot);
    CHECK(a.theta == b.theta);
    CHECK(a.u_applied == b.u_applied);
    CHECK(a.seq == b.seq);
    CHECK_FALSE(a.miss);
  }
  CHECK(crun.exit == ControllerExit::shutdown);
  CHECK(crun.replies == 200);
  CHECK(prun.misses == 0);
}

TEST_CASE("silent controller aborts the session after max misses") {
  ScriptedController silent;
  silent.start([](const Frame&, const net::UdpSocket&, const net::Endpoint&) {});
  const auto run = run_plant_endpoint({}, plant_wire(silent, 20, 5, HoldPolicy::zero_force),
                                      short_scenario());
  silent.thread.join();
  CHECK(run.trajectory.status == RunStatus::aborted);
  CHECK(run.misses == 5);
  CHECK(count(run.events, EventType::miss) == 5);
  REQUIRE(run.trajectory.rows.size() == 5 * 10 + 1);
  for (const auto& r : run.trajectory.rows) {
    CHECK(r.miss);
    CHECK(r.u_applied == 0.0);
  }
  CHECK(silent.received.size() == 6);
  CHECK(silent.received.back().kind() == FrameKind::shutdown);
}

TEST_CASE("hold policy on a miss") {
  for (const HoldPolicy hold : {HoldPolicy::last_force, HoldPolicy::zero_force}) {
    ScriptedController flaky;
    flaky.start([](const Frame& f, const net::UdpSocket& s, const net::Endpoint& to) {
      if (f.seq < 3) s.send_to(encode_frame(actuator_frame(f.seq, f.sim_time, 2.0)), to);
    });
    const auto run = run_plant_endpoint({}, plant_wire(flaky, 20, 2, hold), short_scenario());
    flaky.thread.join();
    CHECK(run.trajectory.status == RunStatus::aborted);
    REQUIRE(run.trajectory.rows.size() == 5 * 10 + 1);
    for (const auto& r : run.trajectory.rows) {
      if (r.seq < 3) {
        CHECK(r.u_applied == 2.0);
        CHECK_FALSE(r.miss);
      } else {
        CHECK(r.u_applied == (hold == HoldPolicy::last_force ? 2.0 : 0.0));
        CHECK(r.miss);
      }
    }
  }
}

TEST_CASE("misses must be consecutive to abort") {
  ScriptedController every_other;
  every_other.start([](const Frame& f, const net::UdpSocket& s, const net::Endpoint& to) {
    if (f.seq % 2 == 0) s.send_to(encode_frame(actuator_frame(f.seq, f.sim_time, 0.0)), to);
  });
  const auto run = run_plant_endpoint({}, plant_wire(every_other, 10, 2, HoldPolicy::last_force),
                                      short_scenario(0.2));
  every_other.thread.join();
  CHECK(run.trajectory.status != RunStatus::aborted);
  CHECK(run.misses == 10);
}

TEST_CASE("stale actuator frames are logged and not applied") {
  ScriptedController laggy;
  laggy.start([](const Frame& f, const net::UdpSocket& s, const net::Endpoint& to) {
    if (f.seq > 0) s.send_to(encode_frame(actuator_frame(f.seq - 1, f.sim_time, 9.0)), to);
    s.send_to(encode_frame(actuator_frame(f.seq, f.sim_time, 1.0)), to);
  });
  const auto run = run_plant_endpoint({}, plant_wire(laggy, 200, 3, HoldPolicy::last_force),
                                      short_scenario(0.1));
  laggy.thread.join();
  CHECK(run.trajectory.status == RunStatus::completed);
  CHECK(count(run.events, EventType::stale) == 9);
  for (const auto& r : run.trajectory.rows) CHECK(r.u_applied == 1.0);
  CHECK(run.misses == 0);
}

TEST_CASE("reset frame re-initializes the plant state") {
  ScriptedController resetter;
  const plant::PlantState target{0.5, 0.0, plant::kPi, 0.0};
  resetter.start([&](const Frame& f, const net::UdpSocket& s, const net::Endpoint& to) {
    if (f.seq == 2) s.send_to(encode_frame(reset_frame(0, f.sim_time, target)), to);
    s.send_to(encode_frame(actuator_frame(f.seq, f.sim_time, 0.0)), to);
  });
  Scenario sc = short_scenario(0.05);
  sc.disturbances.clear();
  const auto run = run_plant_endpoint({}, plant_wire(resetter, 200, 3, HoldPolicy::last_force), sc);
  resetter.thread.join();
  REQUIRE(run.trajectory.rows.size() == 51);
  CHECK(run.trajectory.rows[20].x == 0.5);
  CHECK(run.trajectory.rows[20].theta == plant::kPi);
  CHECK(run.trajectory.rows.back().x == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("peer shutdown ends the plant session") {
  ScriptedController quitter;
  quitter.start([](const Frame& f, const net::UdpSocket& s, const net::Endpoint& to) {
    if (f.seq == 4) {
      s.send_to(encode_frame(shutdown_frame(0, f.sim_time)), to);
      return;
    }
    s.send_to(encode_frame(actuator_frame(f.seq, f.sim_time, 0.0)), to);
  });
  const auto run = run_plant_endpoint({}, plant_wire(quitter, 200, 3, HoldPolicy::last_force),
                                      short_scenario());
  quitter.thread.join();
  CHECK(run.trajectory.status == RunStatus::completed);
  CHECK(run.trajectory.rows.size() == 41);
}

TEST_CASE("controller endpoint echoes seq and drops duplicates") {
  auto ctl_sock = net::UdpSocket::bind(loopback());
  auto me = net::UdpSocket::bind(loopback());
  WireConfig w;
  w.peer = me.local().to_string();
  ControllerRun run;
  std::jthread ctl([&] { run = run_controller_endpoint(tuned_like(), w, ctl_sock); });

  auto ask = [&](std::uint32_t seq, double phi) {
    me.send_to(encode_frame(sensor_frame(seq, seq * 0.01, {0, 0, plant::kPi + phi, 0})),
               ctl_sock.local());
  };
  ask(0, 0.05);
  const auto r0 = me.receive(1s);
  REQUIRE(r0.has_value());
  const auto f0 = std::get<Frame>(decode_frame(r0->bytes));
  CHECK(f0.seq == 0);
  CHECK(f0.kind() == FrameKind::actuator);

  ask(0, 0.05);
  CHECK_FALSE(me.receive(150ms).has_value());

  me.send_to(std::vector<std::uint8_t>{1, 2, 3}, ctl_sock.local());
  ask(1, 0.04);
  const auto r1 = me.receive(1s);
  REQUIRE(r1.has_value());
  CHECK(std::get<Frame>(decode_frame(r1->bytes)).seq == 1);

  me.send_to(encode_frame(shutdown_frame(2, 0.02)), ctl_sock.local());
  ctl.join();
  CHECK(run.exit == ControllerExit::shutdown);
  CHECK(run.replies == 2);
  CHECK(run.duplicates == 1);
  CHECK(run.decode_errors == 1);
}

TEST_CASE("controller session state lives in the session") {
  ControllerSession a(tuned_like());
  ControllerSession b(tuned_like());
  const Frame s0 = sensor_frame(0, 0.0, {0, 0, plant::kPi + 0.05, 0});
  const auto ra = a.on_sensor(s0);
  REQUIRE(ra.has_value());
  CHECK_FALSE(a.on_sensor(s0).has_value());
  CHECK(b.on_sensor(s0)->actuator == ra->actuator);
  CHECK_THROWS_AS(a.on_sensor(sensor_frame(1, 0.01, {0, 0, std::nan(""), 0})), ControllerFault);
  a.reset();
  CHECK(a.pid() == control::PidState{});
}

TEST_CASE("controller idles out without traffic") {
  auto ctl_sock = net::UdpSocket::bind(loopback());
  WireConfig w;
  w.peer = "127.0.0.1:9";
  w.idle_timeout_ms = 100;
  const auto run = run_controller_endpoint(tuned_like(), w, ctl_sock);
  CHECK(run.exit == ControllerExit::idle_timeout);
}

TEST_CASE("impaired link with loss is reproducible and accounts misses") {
  const Scenario s = short_scenario(3.0);
  const ChannelConfig ch{2.0, 1.0, 0.3, 2024};
  const auto a = inproc_loop({}, tuned_like(), s, ch);
  const auto b = inproc_loop({}, tuned_like(), s, ch);
  CHECK(a.trajectory == b.trajectory);
  CHECK(a.events == b.events);
  CHECK(a.misses > 0);

  std::set<std::uint32_t> missed_ticks;
  for (const auto& r : a.trajectory.rows) {
    if (r.miss) missed_ticks.insert(r.seq);
  }
  CHECK(missed_ticks.size() == a.misses);
  CHECK(count(a.events, EventType::miss) == a.misses);
  CHECK(count(a.events, EventType::dropped) > 0);

  for (const auto& e : a.events) {
    if (e.type == EventType::miss) CHECK(missed_ticks.contains(e.seq));
  }
}

TEST_CASE("hold policy on a lossy link") {
  const Scenario s = short_scenario(2.0);
  const ChannelConfig ch{0.0, 0.0, 0.3, 8};
  const auto zero = inproc_loop({}, tuned_like(), s, ch, HoldPolicy::zero_force);
  const auto last = inproc_loop({}, tuned_like(), s, ch, HoldPolicy::last_force);
  // A tick that follows a missed tick and misses again runs with no command.
  int zero_rows = 0, held_rows = 0;
  auto check = [&](const Trajectory& t, bool expect_zero) {
    const std::size_t n = substeps_per_tick(s);
    for (std::size_t i = n; i + 1 < t.rows.size(); ++i) {
      if (!(t.rows[i].miss && t.rows[i - n].miss)) continue;
      if (expect_zero) {
        CHECK(t.rows[i].u_applied == 0.0);
        ++zero_rows;
      } else {
        CHECK(t.rows[i].u_applied == t.rows[i - 1].u_applied);
        if (t.rows[i].u_applied != 0.0) ++held_rows;
      }
    }
  };
  check(zero.trajectory, true);
  check(last.trajectory, false);
  CHECK(zero_rows > 0);
  CHECK(held_rows > 0);
  for (const auto& r : zero.trajectory.rows) CHECK(std::abs(r.u_applied) <= s.force_limit);
}

TEST_CASE("fixed delay degrades the loop") {
  const Scenario s = short_scenario(3.0);
  const auto perfect = inproc_loop({}, tuned_like(), s);
  const auto delayed = inproc_loop({}, tuned_like(), s, {5.0, 0.0, 0.0, 0});
  CHECK(perfect.trajectory.status == RunStatus::completed);
  CHECK(delayed.trajectory != perfect.trajectory);
  // The round trip takes exactly one tick.
  CHECK(delayed.trajectory.rows[9].u_applied == 0.0);
  CHECK(delayed.trajectory.rows[10].u_applied != 0.0);
  CHECK(delayed.trajectory.rows[10].u_applied == perfect.trajectory.rows[0].u_applied);
}

TEST_CASE("wire configuration is validated") {
  WireConfig w;
  w.timeout_ms = 0;
  CHECK_THROWS_AS(validate(w), ConfigError);
  w = {};
  w.max_misses = 0;
  CHECK_THROWS_AS(validate(w), ConfigError);
  CHECK(parse_hold_policy("zoh") == HoldPolicy::last_force);
  CHECK(parse_hold_policy("zero") == HoldPolicy::zero_force);
  CHECK_FALSE(parse_hold_policy("last").has_value());
}

}  // TEST_SUITE
