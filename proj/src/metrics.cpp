#include "pendubridge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pendubridge/errors.hpp"
#include "pendubridge/plant.hpp"

namespace pendubridge::harness {

Metrics compute_metrics(const Trajectory& traj, double tolerance) {
  if (traj.rows.empty()) throw InputDomainError("metrics need at least one row");
  if (!(tolerance > 0.0)) throw InputDomainError("settling tolerance must be > 0");

  Metrics m;
  m.tolerance = tolerance;
  m.status = traj.status;

  const double phi0 = traj.rows.front().phi;
  const double sign0 = phi0 > 0.0 ? 1.0 : (phi0 < 0.0 ? -1.0 : 0.0);
  double past_zero = 0.0;
  double sum_u2 = 0.0;
  std::optional<std::size_t> last_outside;
  std::set<std::uint32_t> missed;

  for (std::size_t i = 0; i < traj.rows.size(); ++i) {
    const TrajectoryRow& r = traj.rows[i];
    const double mag = std::abs(r.phi);
    m.peak_phi = std::max(m.peak_phi, mag);
    past_zero = std::max(past_zero, -sign0 * r.phi);
    sum_u2 += r.u_applied * r.u_applied;
    if (!(mag < tolerance)) last_outside = i;
    if (r.miss) missed.insert(r.seq);
  }

  if (!last_outside) {
    m.settling_time = traj.rows.front().t;
  } else if (*last_outside + 1 < traj.rows.size()) {
    m.settling_time = traj.rows[*last_outside + 1].t;
  }
  m.overshoot = sign0 == 0.0 ? 0.0 : past_zero / std::abs(phi0);
  m.rms_u = std::sqrt(sum_u2 / static_cast<double>(traj.rows.size()));
  m.fell = traj.status == RunStatus::fell || std::abs(traj.rows.back().phi) > 0.5 * plant::kPi;
  m.misses = missed.size();
  return m;
}

nlohmann::json to_json(const Metrics& m, bool degrees) {
  const double k = degrees ? 180.0 / plant::kPi : 1.0;
  nlohmann::json j;
  j["status"] = to_string(m.status);
  j["settling_time"] = m.settling_time ? nlohmann::json(*m.settling_time) : nlohmann::json(nullptr);
  j["peak_phi"] = m.peak_phi * k;
  j["overshoot"] = m.overshoot;
  j["rms_u"] = m.rms_u;
  j["fell"] = m.fell;
  j["misses"] = m.misses;
  j["tolerance"] = m.tolerance * k;
  j["angle_unit"] = degrees ? "deg" : "rad";
  return j;
}

}  // namespace pendubridge::harness
