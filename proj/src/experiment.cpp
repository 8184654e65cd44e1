#include "pendubridge/experiment.hpp"

#include <thread>

#include "pendubridge/linmodel.hpp"
#include "pendubridge/udp.hpp"

namespace pendubridge::harness {

using nlohmann::json;

namespace {

bridge::LoopRun run_udp(const ExperimentConfig& cfg) {
  const auto loopback = net::Endpoint::parse("127.0.0.1:0");
  const auto plant_sock = net::UdpSocket::bind(loopback);
  const auto ctl_sock = net::UdpSocket::bind(loopback);
  std::optional<net::UdpSocket> relay_sock;
  if (!bridge::is_perfect(cfg.channel)) relay_sock = net::UdpSocket::bind(loopback);

  const net::Endpoint ctl_peer = relay_sock ? relay_sock->local() : plant_sock.local();
  const net::Endpoint plant_peer = relay_sock ? relay_sock->local() : ctl_sock.local();

  bridge::WireConfig ctl_wire = cfg.wire;
  ctl_wire.peer = ctl_peer.to_string();
  bridge::WireConfig plant_wire = cfg.wire;
  plant_wire.peer = plant_peer.to_string();

  std::jthread controller([&](std::stop_token stop) {
    bridge::run_controller_endpoint(cfg.controller, ctl_wire, ctl_sock, stop);
  });
  std::jthread relay;
  if (relay_sock) {
    const bridge::RelayConfig rc{plant_sock.local(), ctl_sock.local(), true};
    relay = std::jthread([&, rc](std::stop_token stop) {
      bridge::run_channel_relay(cfg.channel, rc, *relay_sock, stop);
    });
  }
  return bridge::run_plant_endpoint(cfg.plant, plant_wire, cfg.scenario, plant_sock);
}

json complex_list(const std::vector<std::complex<double>>& zs) {
  json out = json::array();
  for (const auto& z : zs) out.push_back({z.real(), z.imag()});
  return out;
}

json matrix(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

json transfer(const linmodel::TransferFunction& tf) {
  return {{"num", tf.num}, {"den", tf.den}, {"units", tf.units},
          {"poles", complex_list(linmodel::poles(tf))}};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  bridge::LoopRun run = cfg.transport == Transport::inproc
                            ? bridge::inproc_loop(cfg.plant, cfg.controller, cfg.scenario,
                                                  cfg.channel, cfg.wire.hold)
                            : run_udp(cfg);
  ExperimentResult result;
  result.metrics = compute_metrics(run.trajectory, cfg.settle_tolerance);
  result.trajectory = std::move(run.trajectory);
  result.events = std::move(run.events);
  return result;
}

SweepResult latency_sweep(const ExperimentConfig& cfg, const std::vector<double>& delays_ms) {
  SweepResult sweep;
  for (const double delay : delays_ms) {
    ExperimentConfig point = cfg;
    point.channel.delay_ms = delay;
    const ExperimentResult r = run_experiment(point);
    sweep.points.push_back({delay, r.trajectory.status, r.metrics.peak_phi, r.metrics.misses});
    if (r.trajectory.status != RunStatus::completed && !sweep.boundary_ms) {
      sweep.boundary_ms = delay;
    }
    if (r.trajectory.status == RunStatus::fell && !sweep.first_fall_ms) {
      sweep.first_fall_ms = delay;
    }
  }
  return sweep;
}

json to_json(const SweepResult& sweep) {
  json points = json::array();
  for (const auto& p : sweep.points) {
    points.push_back({{"delay_ms", p.delay_ms}, {"status", to_string(p.status)},
                      {"peak_phi", p.peak_phi}, {"misses", p.misses}});
  }
  auto optional = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"points", points},
          {"boundary_ms", optional(sweep.boundary_ms)},
          {"first_fall_ms", optional(sweep.first_fall_ms)}};
}

json model_report(const plant::PlantParams& params) {
  const linmodel::StateSpaceModel m = linmodel::linearize(params);
  return {{"A", matrix(m.A)},
          {"B", matrix(m.B)},
          {"C", matrix(m.C)},
          {"D", matrix(m.D)},
          {"q", m.q},
          {"tf_pendulum", transfer(linmodel::tf_pendulum(params))},
          {"tf_cart", transfer(linmodel::tf_cart(params))},
          {"eigenvalues", complex_list(linmodel::eigenvalues(m))}};
}

}  // namespace pendubridge::harness
