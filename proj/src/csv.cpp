#include "pendubridge/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "pendubridge/errors.hpp"

namespace pendubridge::harness {
namespace {

constexpr std::string_view kStatusPrefix = "# status: ";

void append(std::string& line, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  line.append(buf, static_cast<std::size_t>(n));
}

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* name) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("bad value '" + std::string(text) + "' for " + name, line);
  }
  return value;
}

TrajectoryRow parse_row(std::string_view text, std::size_t line) {
  std::string_view fields[10];
  std::size_t count = 0;
  while (true) {
    const auto comma = text.find(',');
    if (count == 10) throw ParseError("expected 10 fields", line);
    fields[count++] = text.substr(0, comma);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (count != 10) throw ParseError("expected 10 fields", line);

  TrajectoryRow r;
  r.step = parse_field<std::uint64_t>(fields[0], line, "step");
  r.t = parse_field<double>(fields[1], line, "t");
  r.x = parse_field<double>(fields[2], line, "x");
  r.x_dot = parse_field<double>(fields[3], line, "x_dot");
  r.theta = parse_field<double>(fields[4], line, "theta");
  r.phi = parse_field<double>(fields[5], line, "phi");
  r.u_cmd = parse_field<double>(fields[6], line, "u_cmd");
  r.u_applied = parse_field<double>(fields[7], line, "u_applied");
  r.seq = parse_field<std::uint32_t>(fields[8], line, "seq");
  const int miss = parse_field<int>(fields[9], line, "miss");
  if (miss != 0 && miss != 1) throw ParseError("miss must be 0 or 1", line);
  r.miss = miss == 1;
  return r;
}

}  // namespace

void write_csv(std::ostream& out, const Trajectory& traj) { out << to_csv(traj); }

void write_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_csv(out, traj);
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

std::string to_csv(const Trajectory& traj) {
  std::string text = kCsvHeader;
  text += '\n';
  std::string line;
  for (const TrajectoryRow& r : traj.rows) {
    line = std::to_string(r.step);
    for (double v : {r.t, r.x, r.x_dot, r.theta, r.phi, r.u_cmd, r.u_applied}) {
      line += ',';
      append(line, v);
    }
    line += ',';
    line += std::to_string(r.seq);
    line += r.miss ? ",1\n" : ",0\n";
    text += line;
  }
  if (traj.status != RunStatus::completed) {
    text += kStatusPrefix;
    text += to_string(traj.status);
    text += '\n';
  }
  return text;
}

Trajectory read_csv(std::istream& in) {
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ParseError("expected header '" + std::string(kCsvHeader) + "'", 1);
  }
  std::size_t number = 1;
  bool status_seen = false;
  while (std::getline(in, line)) {
    ++number;
    if (status_seen) throw ParseError("content after status line", number);
    const std::string_view view(line);
    if (view.starts_with(kStatusPrefix)) {
      const auto status = parse_status(view.substr(kStatusPrefix.size()));
      if (!status) throw ParseError("unknown status", number);
      traj.status = *status;
      status_seen = true;
      continue;
    }
    traj.rows.push_back(parse_row(view, number));
  }
  return traj;
}

Trajectory read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace pendubridge::harness
