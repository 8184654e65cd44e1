#include "pendubridge/tuning.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/MatrixFunctions>

#include "pendubridge/errors.hpp"

namespace pendubridge::control {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kDoublings = 10;

linmodel::StateSpaceModel angle_channel(const linmodel::StateSpaceModel& model) {
  linmodel::StateSpaceModel out = model;
  out.C = Eigen::MatrixXd::Zero(1, 4);
  out.C(0, linmodel::kAngleRow) = 1.0;
  out.D = Eigen::MatrixXd::Zero(1, 1);
  return out;
}

struct LoopIndex {
  int n = 0;
  int z = -1, w = -1, y = -1, p = -1;
};

LoopIndex layout(const TuningConfig& cfg) {
  LoopIndex idx;
  idx.n = 4;
  idx.z = idx.n++;
  if (cfg.derivative_filter > 0.0) idx.w = idx.n++;
  if (cfg.lowpass_tau > 0.0) idx.y = idx.n++;
  if (cfg.hold_delay > 0.0) idx.p = idx.n++;
  return idx;
}

// Closed loop over (x, x_dot, phi, phi_dot, integral, derivative filter,
// low-pass, delay) with e = -phi.
Eigen::MatrixXd loop_matrix(const linmodel::StateSpaceModel& model, const PidGains& g,
                            const TuningConfig& cfg, const LoopIndex& idx) {
  const int n = idx.n;
  auto unit = [n](int i) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    r(i) = 1.0;
    return r;
  };
  const Eigen::RowVectorXd e = -unit(2);
  Eigen::RowVectorXd d_term;
  if (idx.w >= 0) {
    d_term = (e - unit(idx.w)) / cfg.derivative_filter;
  } else {
    d_term = -unit(3);
  }
  const Eigen::RowVectorXd u_pid = g.kp * e + g.ki * unit(idx.z) + g.kd * d_term;
  const Eigen::RowVectorXd v = idx.y >= 0 ? unit(idx.y) : u_pid;
  const Eigen::RowVectorXd u = idx.p >= 0 ? Eigen::RowVectorXd(2.0 * unit(idx.p) - v) : v;

  Eigen::MatrixXd acl = Eigen::MatrixXd::Zero(n, n);
  acl.topLeftCorner(4, 4) = model.A;
  acl.topRows(4) += model.B * u;
  acl.row(idx.z) = e;
  if (idx.w >= 0) acl.row(idx.w) = (e - unit(idx.w)) / cfg.derivative_filter;
  if (idx.y >= 0) acl.row(idx.y) = (u_pid - unit(idx.y)) / cfg.lowpass_tau;
  if (idx.p >= 0) acl.row(idx.p) = (2.0 / cfg.hold_delay) * (v - unit(idx.p));
  return acl;
}

}  // namespace

void validate(const TuningConfig& c) {
  auto range = [](double lo, double hi, const char* field) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && hi >= lo)) {
      throw ConfigError("search range must satisfy 0 <= min <= max", field);
    }
  };
  range(c.kp_min, c.kp_max, "tuning.kp");
  range(c.ki_min, c.ki_max, "tuning.ki");
  range(c.kd_min, c.kd_max, "tuning.kd");
  if (c.resolution < 1) throw ConfigError("resolution must be >= 1", "tuning.resolution");
  if (c.refine_iterations < 0) {
    throw ConfigError("refine_iterations must be >= 0", "tuning.refine_iterations");
  }
  if (!(std::isfinite(c.phi0) && c.phi0 != 0.0)) throw ConfigError("phi0 must be non-zero", "tuning.phi0");
  if (!(std::isfinite(c.horizon) && c.horizon > 0.0)) {
    throw ConfigError("horizon must be > 0", "tuning.horizon");
  }
  if (!(c.derivative_filter >= 0.0 && c.lowpass_tau >= 0.0 && c.hold_delay >= 0.0)) {
    throw ConfigError("loop time constants must be >= 0", "tuning");
  }
}

TuningConfig with_loop_of(TuningConfig cfg, const ControllerConfig& controller) {
  cfg.derivative_filter = controller.derivative_filter;
  cfg.lowpass_tau = controller.lowpass_tau;
  cfg.hold_delay = 0.5 * controller.period;
  return cfg;
}

poly::Coeffs closed_loop_char_poly(const linmodel::StateSpaceModel& model, const PidGains& g,
                                   const TuningConfig& cfg) {
  const linmodel::TransferFunction plant_tf = linmodel::channel_transfer(angle_channel(model), 0);

  poly::Coeffs num_c;
  poly::Coeffs den_c;
  const double tf = cfg.derivative_filter;
  if (tf > 0.0) {
    num_c = {g.kp * tf + g.kd, g.kp + g.ki * tf, g.ki};
    den_c = {tf, 1.0, 0.0};
  } else {
    num_c = {g.kd, g.kp, g.ki};
    den_c = {1.0, 0.0};
  }
  poly::Coeffs num = poly::multiply(plant_tf.num, num_c);
  poly::Coeffs den = poly::multiply(plant_tf.den, den_c);
  if (cfg.lowpass_tau > 0.0) den = poly::multiply(den, {cfg.lowpass_tau, 1.0});
  if (cfg.hold_delay > 0.0) {
    num = poly::multiply(num, {-0.5 * cfg.hold_delay, 1.0});
    den = poly::multiply(den, {0.5 * cfg.hold_delay, 1.0});
  }
  poly::cancel_origin(num, den);
  poly::Coeffs chi = poly::trim_leading(poly::add(den, num));
  const double lead = chi.front();
  for (double& c : chi) c /= lead;
  return chi;
}

std::vector<std::complex<double>> closed_loop_poles(const linmodel::StateSpaceModel& model,
                                                    const PidGains& gains,
                                                    const TuningConfig& cfg) {
  return poly::roots(closed_loop_char_poly(model, gains, cfg));
}

bool stabilizes(const linmodel::StateSpaceModel& model, const PidGains& gains,
                const TuningConfig& cfg) {
  const auto poles = closed_loop_poles(model, gains, cfg);
  return std::all_of(poles.begin(), poles.end(), [](auto z) { return z.real() < 0.0; });
}

double ise_cost(const linmodel::StateSpaceModel& model, const PidGains& gains,
                const TuningConfig& cfg) {
  if (!stabilizes(model, gains, cfg)) return kInf;
  const LoopIndex idx = layout(cfg);
  const int n = idx.n;
  const Eigen::MatrixXd acl = loop_matrix(model, gains, cfg, idx);

  // Block exponential of [[-A^T, Q], [0, A]] h gives the Gramian increment
  // W_h = F22^T F12; doubling then extends W to the full horizon.
  const double h = cfg.horizon / static_cast<double>(1 << kDoublings);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -acl.transpose();
  block(2, n + 2) = 1.0;  // Q selects phi
  block.bottomRightCorner(n, n) = acl;
  const Eigen::MatrixXd f = (block * h).exp();
  Eigen::MatrixXd phi = f.bottomRightCorner(n, n);
  Eigen::MatrixXd gram = phi.transpose() * f.topRightCorner(n, n);
  for (int k = 0; k < kDoublings; ++k) {
    gram += phi.transpose() * gram * phi;
    phi = phi * phi;
  }

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  x0(2) = cfg.phi0;
  if (idx.w >= 0) x0(idx.w) = -cfg.phi0;  // derivative filter starts at rest
  const double cost = x0.dot(gram * x0);
  return std::isfinite(cost) ? cost : kInf;
}

TuningResult tune_pid(const linmodel::StateSpaceModel& model, const TuningConfig& cfg) {
  validate(cfg);
  TuningResult best;
  best.cost = kInf;

  const std::array<double, 3> lo{cfg.kp_min, cfg.ki_min, cfg.kd_min};
  const std::array<double, 3> hi{cfg.kp_max, cfg.ki_max, cfg.kd_max};
  auto evaluate = [&](const std::array<double, 3>& k) {
    ++best.evaluated;
    const double cost = ise_cost(model, {k[0], k[1], k[2]}, cfg);
    if (std::isfinite(cost)) ++best.feasible;
    if (cost < best.cost) {
      best.cost = cost;
      best.gains = {k[0], k[1], k[2]};
    }
    return cost;
  };

  const int res = cfg.resolution;
  auto grid = [&](int axis, int i) { return lo[axis] + (hi[axis] - lo[axis]) * i / res; };
  for (int i = 0; i <= res; ++i) {
    for (int j = 0; j <= res; ++j) {
      for (int k = 0; k <= res; ++k) evaluate({grid(0, i), grid(1, j), grid(2, k)});
    }
  }
  if (!std::isfinite(best.cost)) {
    throw TuningFailed("no stabilizing gains in the search space");
  }

  std::array<double, 3> step{};
  for (int a = 0; a < 3; ++a) step[a] = (hi[a] - lo[a]) / res;
  for (int sweep = 0; sweep < cfg.refine_iterations; ++sweep) {
    bool improved = false;
    for (int a = 0; a < 3; ++a) {
      for (double dir : {1.0, -1.0}) {
        std::array<double, 3> k{best.gains.kp, best.gains.ki, best.gains.kd};
        k[a] = std::clamp(k[a] + dir * step[a], lo[a], hi[a]);
        const double before = best.cost;
        evaluate(k);
        if (best.cost < before) improved = true;
      }
    }
    if (!improved) {
      for (double& s : step) s *= 0.5;
    }
  }
  return best;
}

}  // namespace pendubridge::control
