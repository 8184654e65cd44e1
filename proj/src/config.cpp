#include "pendubridge/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pendubridge/errors.hpp"

namespace pendubridge::harness {

using nlohmann::json;

std::string_view to_string(Transport transport) {
  return transport == Transport::inproc ? "inproc" : "udp";
}

namespace {

// Typed view of one JSON object that remembers which keys were read so the
// rest can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("expected an object", path_);
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(std::string_view key) {
    seen_.emplace(key);
    const auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  double number(std::string_view key, double fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ConfigError("expected a number", field(key));
    return v->get<double>();
  }

  int integer(std::string_view key, int fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) throw ConfigError("expected an integer", field(key));
    return v->get<int>();
  }

  std::uint64_t seed(std::string_view key, std::uint64_t fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_unsigned()) throw ConfigError("expected a non-negative integer", field(key));
    return v->get<std::uint64_t>();
  }

  bool boolean(std::string_view key, bool fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError("expected true or false", field(key));
    return v->get<bool>();
  }

  std::string text(std::string_view key, const std::string& fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError("expected a string", field(key));
    return v->get<std::string>();
  }

  void range(std::string_view key, double& lo, double& hi) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
      throw ConfigError("expected [min, max]", field(key));
    }
    lo = (*v)[0].get<double>();
    hi = (*v)[1].get<double>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key", field(key));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

// Re-raises a validation error with the field placed under `prefix`.
template <typename Fn>
void validated(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    if (e.field().empty() || e.field().starts_with(prefix + ".")) throw;
    std::string message = e.what();
    message.erase(0, e.field().size() + 2);
    throw ConfigError(message, prefix + "." + e.field());
  }
}

plant::PlantParams load_plant(const json& j) {
  Section s(j, "plant");
  plant::PlantParams p;
  p.cart_mass = s.number("M", p.cart_mass);
  p.pend_mass = s.number("m", p.pend_mass);
  p.cart_friction = s.number("b", p.cart_friction);
  p.com_length = s.number("l", p.com_length);
  p.pend_inertia = s.number("I", p.pend_inertia);
  p.gravity = s.number("g", p.gravity);
  s.finish();
  validated("plant", [&] { plant::validate(p); });
  return p;
}

control::ControllerConfig load_controller(const json& j) {
  Section s(j, "controller");
  control::ControllerConfig c;
  c.gains.kp = s.number("kp", c.gains.kp);
  c.gains.ki = s.number("ki", c.gains.ki);
  c.gains.kd = s.number("kd", c.gains.kd);
  c.setpoint = s.number("setpoint", c.setpoint);
  c.derivative_filter = s.number("derivative_filter", c.derivative_filter);
  c.integral_clamp = s.number("integral_clamp", c.integral_clamp);
  c.saturation = s.number("saturation", c.saturation);
  c.lowpass_tau = s.number("lowpass_tau", c.lowpass_tau);
  s.finish();
  return c;
}

plant::PlantState load_initial(const json& j, plant::PlantState fallback) {
  Section s(j, "scenario.initial");
  plant::PlantState st = fallback;
  st.x = s.number("x", st.x);
  st.x_dot = s.number("x_dot", st.x_dot);
  const bool has_theta = j.contains("theta");
  const bool has_phi = j.contains("phi");
  if (has_theta && has_phi) throw ConfigError("give theta or phi, not both", "scenario.initial");
  st.theta = s.number("theta", st.theta);
  if (has_phi) st.theta = plant::kPi + s.number("phi", 0.0);
  st.theta_dot = s.number("theta_dot", st.theta_dot);
  s.finish();
  return st;
}

Scenario load_scenario(const json& j) {
  Section s(j, "scenario");
  Scenario sc;
  if (const json* init = s.find("initial")) sc.initial = load_initial(*init, sc.initial);
  sc.duration = s.number("duration", sc.duration);
  sc.dt = s.number("dt", sc.dt);
  sc.control_period = s.number("Tc", sc.control_period);
  if (const json* list = s.find("disturbances")) {
    if (!list->is_array()) throw ConfigError("expected an array", "scenario.disturbances");
    sc.disturbances.clear();
    for (std::size_t i = 0; i < list->size(); ++i) {
      Section d((*list)[i], "scenario.disturbances[" + std::to_string(i) + "]");
      Disturbance dist;
      dist.time = d.number("time", dist.time);
      dist.force = d.number("force", dist.force);
      dist.duration = d.number("duration", dist.duration);
      d.finish();
      sc.disturbances.push_back(dist);
    }
  }
  sc.sensor_noise_std = s.number("sensor_noise_std", sc.sensor_noise_std);
  sc.seed = s.seed("seed", sc.seed);
  sc.force_limit = s.number("force_limit", sc.force_limit);
  sc.track_limit = s.number("track_limit", sc.track_limit);
  s.finish();
  validated("scenario", [&] { validate(sc); });
  return sc;
}

control::TuningConfig load_tuning(const json& j) {
  Section s(j, "tuning");
  control::TuningConfig t;
  s.range("kp", t.kp_min, t.kp_max);
  s.range("ki", t.ki_min, t.ki_max);
  s.range("kd", t.kd_min, t.kd_max);
  t.resolution = s.integer("resolution", t.resolution);
  t.refine_iterations = s.integer("refine_iterations", t.refine_iterations);
  t.phi0 = s.number("phi0", t.phi0);
  t.horizon = s.number("horizon", t.horizon);
  s.finish();
  return t;
}

bridge::ChannelConfig load_channel(const json& j) {
  Section s(j, "channel");
  bridge::ChannelConfig c;
  c.delay_ms = s.number("delay_ms", c.delay_ms);
  c.jitter_ms = s.number("jitter_ms", c.jitter_ms);
  c.drop = s.number("drop", c.drop);
  c.seed = s.seed("seed", c.seed);
  s.finish();
  bridge::validate(c);
  return c;
}

bridge::WireConfig load_wire(const json& j) {
  Section s(j, "wire");
  bridge::WireConfig w;
  w.listen = s.text("listen", w.listen);
  w.peer = s.text("peer", w.peer);
  w.timeout_ms = s.integer("timeout_ms", w.timeout_ms);
  w.max_misses = s.integer("max_misses", w.max_misses);
  const std::string hold = s.text("hold", std::string(bridge::to_string(w.hold)));
  const auto policy = bridge::parse_hold_policy(hold);
  if (!policy) throw ConfigError("expected \"zoh\" or \"zero\"", "wire.hold");
  w.hold = *policy;
  w.idle_timeout_ms = s.integer("idle_timeout_ms", w.idle_timeout_ms);
  w.realtime = s.boolean("realtime", w.realtime);
  s.finish();
  bridge::validate(w);
  return w;
}

}  // namespace

ExperimentConfig load_config(const json& doc) {
  Section s(doc, "");
  ExperimentConfig cfg;
  if (const json* j = s.find("plant")) cfg.plant = load_plant(*j);
  if (const json* j = s.find("controller")) cfg.controller = load_controller(*j);
  if (const json* j = s.find("scenario")) cfg.scenario = load_scenario(*j);
  if (const json* j = s.find("tuning")) cfg.tuning = load_tuning(*j);
  if (const json* j = s.find("channel")) cfg.channel = load_channel(*j);
  if (const json* j = s.find("wire")) cfg.wire = load_wire(*j);
  const std::string transport = s.text("transport", "inproc");
  if (transport == "inproc") {
    cfg.transport = Transport::inproc;
  } else if (transport == "udp") {
    cfg.transport = Transport::udp;
  } else {
    throw ConfigError("expected \"inproc\" or \"udp\"", "transport");
  }
  cfg.settle_tolerance = s.number("settle_tolerance", cfg.settle_tolerance);
  if (!(cfg.settle_tolerance > 0.0)) throw ConfigError("must be > 0", "settle_tolerance");
  s.finish();

  cfg.controller.period = cfg.scenario.control_period;
  validated("controller", [&] { control::validate(cfg.controller); });
  cfg.tuning = control::with_loop_of(cfg.tuning, cfg.controller);
  control::validate(cfg.tuning);
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return load_config(doc);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
}

ExperimentConfig load_config_file(const std::string& path) { return load_config(read_json_file(path)); }

json dump(const ExperimentConfig& c) {
  const auto& p = c.plant;
  const auto& k = c.controller;
  const auto& sc = c.scenario;
  const auto& t = c.tuning;

  json disturbances = json::array();
  for (const auto& d : sc.disturbances) {
    disturbances.push_back({{"time", d.time}, {"force", d.force}, {"duration", d.duration}});
  }
  return {
      {"plant",
       {{"M", p.cart_mass}, {"m", p.pend_mass}, {"b", p.cart_friction}, {"l", p.com_length},
        {"I", p.pend_inertia}, {"g", p.gravity}}},
      {"controller",
       {{"kp", k.gains.kp}, {"ki", k.gains.ki}, {"kd", k.gains.kd}, {"setpoint", k.setpoint},
        {"derivative_filter", k.derivative_filter}, {"integral_clamp", k.integral_clamp},
        {"saturation", k.saturation}, {"lowpass_tau", k.lowpass_tau}}},
      {"scenario",
       {{"initial",
         {{"x", sc.initial.x}, {"x_dot", sc.initial.x_dot}, {"theta", sc.initial.theta},
          {"theta_dot", sc.initial.theta_dot}}},
        {"duration", sc.duration},
        {"dt", sc.dt},
        {"Tc", sc.control_period},
        {"disturbances", disturbances},
        {"sensor_noise_std", sc.sensor_noise_std},
        {"seed", sc.seed},
        {"force_limit", sc.force_limit},
        {"track_limit", sc.track_limit}}},
      {"tuning",
       {{"kp", {t.kp_min, t.kp_max}}, {"ki", {t.ki_min, t.ki_max}}, {"kd", {t.kd_min, t.kd_max}},
        {"resolution", t.resolution}, {"refine_iterations", t.refine_iterations},
        {"phi0", t.phi0}, {"horizon", t.horizon}}},
      {"channel",
       {{"delay_ms", c.channel.delay_ms}, {"jitter_ms", c.channel.jitter_ms},
        {"drop", c.channel.drop}, {"seed", c.channel.seed}}},
      {"wire",
       {{"listen", c.wire.listen}, {"peer", c.wire.peer}, {"timeout_ms", c.wire.timeout_ms},
        {"max_misses", c.wire.max_misses}, {"hold", bridge::to_string(c.wire.hold)},
        {"idle_timeout_ms", c.wire.idle_timeout_ms}, {"realtime", c.wire.realtime}}},
      {"transport", to_string(c.transport)},
      {"settle_tolerance", c.settle_tolerance},
  };
}

control::PidGains load_gains(const json& doc) {
  Section s(doc, "gains");
  control::PidGains g;
  for (const char* key : {"kp", "ki", "kd"}) {
    if (!doc.contains(key)) throw ConfigError("missing", std::string("gains.") + key);
  }
  g.kp = s.number("kp", 0.0);
  g.ki = s.number("ki", 0.0);
  g.kd = s.number("kd", 0.0);
  s.number("cost", 0.0);
  s.finish();
  control::ControllerConfig probe;
  probe.gains = g;
  validated("gains", [&] { control::validate(probe); });
  return g;
}

control::PidGains load_gains_file(const std::string& path) { return load_gains(read_json_file(path)); }

json dump_gains(const control::PidGains& gains, double cost) {
  return {{"kp", gains.kp}, {"ki", gains.ki}, {"kd", gains.kd}, {"cost", cost}};
}

}  // namespace pendubridge::harness
