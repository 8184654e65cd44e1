#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>
#include <vector>

#include "pendubridge/plant.hpp"
#include "pendubridge/polynomial.hpp"

namespace pendubridge::linmodel {

// Deviation coordinates about the upright equilibrium, phi = theta - pi.
struct LinState {
  double x = 0.0;
  double x_dot = 0.0;
  double phi = 0.0;
  double phi_dot = 0.0;

  bool operator==(const LinState&) const = default;
};

// State order is (x, x_dot, phi, phi_dot). C selects outputs; by default
// rows for x and phi.
struct StateSpaceModel {
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  Eigen::Vector4d B = Eigen::Vector4d::Zero();
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;
  double q = 0.0;
};

struct TransferFunction {
  poly::Coeffs num;
  poly::Coeffs den;  // monic
  std::string units;
};

// Output selector rows for the default C.
inline constexpr int kCartRow = 0;
inline constexpr int kAngleRow = 2;

double q_factor(const plant::PlantParams& params);

// I(M+m) + M m l^2; algebraically identical to q_factor.
double q_factor_expanded(const plant::PlantParams& params);

StateSpaceModel linearize(const plant::PlantParams& params);

// Same dynamics with a caller-chosen output matrix (rows of length 4).
StateSpaceModel linearize(const plant::PlantParams& params, const Eigen::MatrixXd& C);

LinState to_lin_state(const plant::PlantState& state);

// A * state + B * u, returned as the time derivative of each coordinate.
LinState linear_deriv(const StateSpaceModel& model, const LinState& state, plant::ForceCommand u);

// U -> Phi with the single origin pole/zero cancelled (and a second one when
// b = 0 makes it exact). Units rad/N.
TransferFunction tf_pendulum(const plant::PlantParams& params);

// U -> X over the uncancelled quartic. Units m/N.
TransferFunction tf_cart(const plant::PlantParams& params);

// Roots of the denominator. Throws InputDomainError for a constant denominator.
std::vector<std::complex<double>> poles(const TransferFunction& tf);

std::vector<std::complex<double>> eigenvalues(const StateSpaceModel& model);

// Monic characteristic polynomial det(sI - A) by Faddeev-LeVerrier.
poly::Coeffs char_poly(const StateSpaceModel& model);

// Transfer function from u to the C-row `output` computed from (A, B) via the
// Faddeev-LeVerrier adjugate, with common origin factors cancelled.
TransferFunction channel_transfer(const StateSpaceModel& model, int output);

}  // namespace pendubridge::linmodel
