#pragma once

#include <iosfwd>
#include <string>

#include "pendubridge/trajectory.hpp"

namespace pendubridge::harness {

inline constexpr const char* kCsvHeader = "step,t,x,x_dot,theta,phi,u_cmd,u_applied,seq,miss";

// Values are written with 17 significant digits, so reading back is exact.
// A trailing "# status: <name>" line records a terminal status other than
// completed.
void write_csv(std::ostream& out, const Trajectory& traj);
void write_csv(const std::string& path, const Trajectory& traj);
std::string to_csv(const Trajectory& traj);

// Throws ParseError with the 1-based line number of the first bad line.
Trajectory read_csv(std::istream& in);
Trajectory read_csv(const std::string& path);

}  // namespace pendubridge::harness
