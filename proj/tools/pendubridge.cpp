// Command-line front end: model report, tuning, simulation, the three UDP
// endpoints and trajectory reports.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "pendubridge/bridge.hpp"
#include "pendubridge/channel.hpp"
#include "pendubridge/config.hpp"
#include "pendubridge/csv.hpp"
#include "pendubridge/errors.hpp"
#include "pendubridge/experiment.hpp"
#include "pendubridge/linmodel.hpp"
#include "pendubridge/tuning.hpp"

namespace pb = pendubridge;
namespace hn = pendubridge::harness;
using nlohmann::json;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

hn::ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? hn::load_config(json::object()) : hn::load_config_file(path);
}

void write_json(const std::string& path, const json& j) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw pb::ConfigError("cannot write '" + path + "'");
  const std::string text = j.dump(2) + "\n";
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  std::fclose(f);
  if (!ok) throw pb::ConfigError("write failed for '" + path + "'");
}

json episode_json(const pb::Trajectory& traj, double tolerance) {
  json j = hn::to_json(hn::compute_metrics(traj, tolerance));
  j["rows"] = traj.rows.size();
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cart-pendulum co-simulation: plant, PID controller and UDP lockstep bridge"};
  app.require_subcommand(1);

  std::string config_path;
  std::string gains_path;
  std::string out_path;
  std::string in_path;
  std::string listen;
  std::string peer;
  std::string transport;
  bool realtime = false;
  bool degrees = false;
  double tolerance = 0.005;
  std::optional<int> timeout_ms;
  std::optional<int> max_misses;
  std::optional<int> idle_timeout_ms;
  std::string hold;
  std::string peer_a;
  std::string peer_b;
  pb::bridge::ChannelConfig channel;
  std::vector<double> delays = hn::kDefaultDelaysMs;

  auto* model = app.add_subcommand("model", "Print the linearized model as JSON");
  model->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);

  auto* tune = app.add_subcommand("tune", "Tune PID gains against the linear model");
  tune->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  tune->add_option("--out", out_path, "Gains file to write");

  auto* simulate = app.add_subcommand("simulate", "Run one closed-loop episode");
  simulate->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  simulate->add_option("--gains", gains_path, "Gains file (defaults to the configured gains)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--out", out_path, "Trajectory CSV to write");
  simulate->add_option("--transport", transport, "inproc or udp")
      ->check(CLI::IsMember({"inproc", "udp"}));

  auto* plant = app.add_subcommand("plant", "Run the plant endpoint over UDP");
  plant->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  plant->add_option("--listen", listen, "Local HOST:PORT")->required();
  plant->add_option("--peer", peer, "Controller (or relay) HOST:PORT");
  plant->add_flag("--realtime", realtime, "Pace ticks to the wall clock");
  plant->add_option("--timeout-ms", timeout_ms, "Wait per actuator reply");
  plant->add_option("--max-misses", max_misses, "Consecutive misses before abort");
  plant->add_option("--hold", hold, "Hold policy on a miss")->check(CLI::IsMember({"zoh", "zero"}));
  plant->add_option("--out", out_path, "Trajectory CSV to write");

  auto* control = app.add_subcommand("control", "Run the controller endpoint over UDP");
  control->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  control->add_option("--gains", gains_path, "Gains file")->required()->check(CLI::ExistingFile);
  control->add_option("--peer", peer, "Plant (or relay) HOST:PORT")->required();
  control->add_option("--listen", listen, "Local HOST:PORT")->required();
  control->add_option("--idle-timeout-ms", idle_timeout_ms, "Exit after this long without traffic; 0 waits forever");

  auto* relay = app.add_subcommand("channel", "Run the impairing UDP relay");
  relay->add_option("--listen", listen, "Local HOST:PORT")->required();
  relay->add_option("--peer-a", peer_a, "First endpoint HOST:PORT")->required();
  relay->add_option("--peer-b", peer_b, "Second endpoint HOST:PORT")->required();
  relay->add_option("--delay-ms", channel.delay_ms, "Fixed one-way delay");
  relay->add_option("--jitter-ms", channel.jitter_ms, "Uniform extra delay bound");
  relay->add_option("--drop", channel.drop, "Loss probability in [0, 1)");
  relay->add_option("--seed", channel.seed, "Impairment RNG seed");

  auto* report = app.add_subcommand("report", "Metrics of a trajectory CSV as JSON");
  report->add_option("--in", in_path, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  report->add_flag("--degrees", degrees, "Report angles in degrees");
  report->add_option("--tolerance", tolerance, "Settling band on |phi| (rad)");

  auto* sweep = app.add_subcommand("sweep", "Latency sweep over fixed one-way delays");
  sweep->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  sweep->add_option("--gains", gains_path, "Gains file (tuned when omitted)")->check(CLI::ExistingFile);
  sweep->add_option("--delays", delays, "Delays in ms")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*model) {
      print(hn::model_report(config_or_default(config_path).plant));
    } else if (*tune) {
      const auto cfg = config_or_default(config_path);
      const auto result = pb::control::tune_pid(pb::linmodel::linearize(cfg.plant), cfg.tuning);
      const json gains = hn::dump_gains(result.gains, result.cost);
      if (!out_path.empty()) write_json(out_path, gains);
      print(gains);
    } else if (*simulate) {
      auto cfg = config_or_default(config_path);
      if (!gains_path.empty()) cfg.controller.gains = hn::load_gains_file(gains_path);
      if (transport == "udp") cfg.transport = hn::Transport::udp;
      if (transport == "inproc") cfg.transport = hn::Transport::inproc;
      const auto result = hn::run_experiment(cfg);
      if (!out_path.empty()) hn::write_csv(out_path, result.trajectory);
      json j = hn::to_json(result.metrics);
      j["rows"] = result.trajectory.rows.size();
      j["transport"] = hn::to_string(cfg.transport);
      print(j);
    } else if (*plant) {
      auto cfg = config_or_default(config_path);
      auto wire = cfg.wire;
      wire.listen = listen;
      if (!peer.empty()) wire.peer = peer;
      if (realtime) wire.realtime = true;
      if (timeout_ms) wire.timeout_ms = *timeout_ms;
      if (max_misses) wire.max_misses = *max_misses;
      if (!hold.empty()) wire.hold = *pb::bridge::parse_hold_policy(hold);
      pb::bridge::validate(wire);
      const auto run = pb::bridge::run_plant_endpoint(cfg.plant, wire, cfg.scenario);
      if (!out_path.empty()) hn::write_csv(out_path, run.trajectory);
      print(episode_json(run.trajectory, cfg.settle_tolerance));
    } else if (*control) {
      auto cfg = config_or_default(config_path);
      cfg.controller.gains = hn::load_gains_file(gains_path);
      auto wire = cfg.wire;
      wire.listen = listen;
      wire.peer = peer;
      if (idle_timeout_ms) wire.idle_timeout_ms = *idle_timeout_ms;
      const auto run = pb::bridge::run_controller_endpoint(cfg.controller, wire);
      const bool clean = run.exit == pb::bridge::ControllerExit::shutdown;
      print({{"exit", clean ? "shutdown" : "idle_timeout"},
             {"replies", run.replies},
             {"duplicates", run.duplicates},
             {"decode_errors", run.decode_errors}});
      if (!clean) return kRuntimeError;
    } else if (*relay) {
      const pb::bridge::RelayConfig rc{pb::net::Endpoint::parse(peer_a),
                                       pb::net::Endpoint::parse(peer_b), true};
      pb::bridge::validate(channel);
      const auto socket = pb::net::UdpSocket::bind(pb::net::Endpoint::parse(listen));
      const auto stats = pb::bridge::run_channel_relay(channel, rc, socket);
      print({{"forwarded", stats.forwarded},
             {"dropped", stats.dropped},
             {"ignored", stats.ignored},
             {"mean_added_delay_ms", stats.mean_added_delay_ms}});
    } else if (*report) {
      const auto traj = hn::read_csv(in_path);
      print(hn::to_json(hn::compute_metrics(traj, tolerance), degrees));
    } else if (*sweep) {
      auto cfg = config_or_default(config_path);
      if (!gains_path.empty()) {
        cfg.controller.gains = hn::load_gains_file(gains_path);
      } else {
        cfg.controller.gains =
            pb::control::tune_pid(pb::linmodel::linearize(cfg.plant), cfg.tuning).gains;
      }
      print(hn::to_json(hn::latency_sweep(cfg, delays)));
    }
  } catch (const pb::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const pb::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
