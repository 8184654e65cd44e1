#include "pendubridge/linmodel.hpp"

#include <Eigen/Eigenvalues>

#include "pendubridge/errors.hpp"

namespace pendubridge::linmodel {
namespace {

struct Terms {
  double M, m, b, l, I, g, ml, inertia_sum, q;
};

Terms terms_of(const plant::PlantParams& p) {
  const double ml = p.pend_mass * p.com_length;
  const double inertia_sum = p.pend_inertia + ml * p.com_length;
  return {p.cart_mass, p.pend_mass, p.cart_friction, p.com_length, p.pend_inertia, p.gravity,
          ml,          inertia_sum, q_factor(p)};
}

poly::Coeffs quartic_den(const Terms& t) {
  return {1.0, t.b * t.inertia_sum / t.q, -(t.M + t.m) * t.ml * t.g / t.q,
          -t.b * t.ml * t.g / t.q, 0.0};
}

Eigen::MatrixXd default_outputs() {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2, 4);
  C(0, kCartRow) = 1.0;
  C(1, kAngleRow) = 1.0;
  return C;
}

}  // namespace

double q_factor(const plant::PlantParams& p) {
  const double ml = p.pend_mass * p.com_length;
  return (p.cart_mass + p.pend_mass) * (p.pend_inertia + ml * p.com_length) - ml * ml;
}

double q_factor_expanded(const plant::PlantParams& p) {
  return p.pend_inertia * (p.cart_mass + p.pend_mass) +
         p.cart_mass * p.pend_mass * p.com_length * p.com_length;
}

StateSpaceModel linearize(const plant::PlantParams& params) {
  return linearize(params, default_outputs());
}

StateSpaceModel linearize(const plant::PlantParams& params, const Eigen::MatrixXd& C) {
  if (C.cols() != 4) throw ConfigError("output matrix must have 4 columns", "C");
  const Terms t = terms_of(params);
  StateSpaceModel model;
  model.q = t.q;

  // (I+ml^2) phi_ddot - mgl phi = ml x_ddot
  // (M+m) x_ddot + b x_dot - ml phi_ddot = u
  model.A(0, 1) = 1.0;
  model.A(1, 1) = -t.inertia_sum * t.b / t.q;
  model.A(1, 2) = t.ml * t.ml * t.g / t.q;
  model.A(2, 3) = 1.0;
  model.A(3, 1) = -t.ml * t.b / t.q;
  model.A(3, 2) = t.ml * t.g * (t.M + t.m) / t.q;

  model.B(1) = t.inertia_sum / t.q;
  model.B(3) = t.ml / t.q;

  model.C = C;
  model.D = Eigen::MatrixXd::Zero(C.rows(), 1);
  return model;
}

LinState to_lin_state(const plant::PlantState& s) {
  return {s.x, s.x_dot, plant::phi_of(s.theta), s.theta_dot};
}

LinState linear_deriv(const StateSpaceModel& model, const LinState& s, plant::ForceCommand u) {
  const Eigen::Vector4d v(s.x, s.x_dot, s.phi, s.phi_dot);
  const Eigen::Vector4d d = model.A * v + model.B * u.force;
  return {d(0), d(1), d(2), d(3)};
}

TransferFunction tf_pendulum(const plant::PlantParams& params) {
  const Terms t = terms_of(params);
  TransferFunction tf{{t.ml / t.q, 0.0, 0.0}, quartic_den(t), "rad/N"};
  // One origin factor always cancels; with b = 0 the numerator and the
  // denominator share a second one exactly.
  poly::cancel_origin(tf.num, tf.den, 0.0);
  return tf;
}

TransferFunction tf_cart(const plant::PlantParams& params) {
  const Terms t = terms_of(params);
  return {{t.inertia_sum / t.q, 0.0, -t.ml * t.g / t.q}, quartic_den(t), "m/N"};
}

std::vector<std::complex<double>> poles(const TransferFunction& tf) { return poly::roots(tf.den); }

std::vector<std::complex<double>> eigenvalues(const StateSpaceModel& model) {
  Eigen::EigenSolver<Eigen::Matrix4d> solver(model.A, false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < 4; ++i) out.push_back(solver.eigenvalues()[i]);
  return out;
}

namespace {

// Faddeev-LeVerrier: returns the characteristic coefficients and the
// adjugate terms M_1..M_n with adj(sI - A) = sum_k M_k s^(n-k).
std::pair<poly::Coeffs, std::vector<Eigen::Matrix4d>> leverrier(const Eigen::Matrix4d& A) {
  constexpr int n = 4;
  poly::Coeffs c(n + 1, 0.0);
  c[0] = 1.0;
  std::vector<Eigen::Matrix4d> adj;
  Eigen::Matrix4d Mk = Eigen::Matrix4d::Zero();
  for (int k = 1; k <= n; ++k) {
    Mk = A * Mk + c[k - 1] * Eigen::Matrix4d::Identity();
    adj.push_back(Mk);
    c[k] = -(A * Mk).trace() / k;
  }
  return {c, adj};
}

}  // namespace

poly::Coeffs char_poly(const StateSpaceModel& model) { return leverrier(model.A).first; }

TransferFunction channel_transfer(const StateSpaceModel& model, int output) {
  if (output < 0 || output >= model.C.rows()) {
    throw ConfigError("output row out of range", "output");
  }
  auto [den, adj] = leverrier(model.A);
  const Eigen::RowVector4d c = model.C.row(output);
  poly::Coeffs num;
  for (const auto& Mk : adj) num.push_back(c * Mk * model.B);
  num = poly::trim_leading(std::move(num));
  poly::cancel_origin(num, den);
  return {num, den, ""};
}

}  // namespace pendubridge::linmodel
