#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "pendubridge/control.hpp"
#include "pendubridge/linmodel.hpp"
#include "pendubridge/polynomial.hpp"

namespace pendubridge::control {

// Search box, resolution and the loop structure the cost is evaluated on.
// The loop model is the continuous equivalent of the discrete controller:
// PID with first-order derivative filter, the actuator low-pass and a
// first-order Pade approximation of the sample-and-hold delay.
struct TuningConfig {
  double kp_min = 0.0, kp_max = 150.0;
  double ki_min = 0.0, ki_max = 60.0;
  double kd_min = 0.0, kd_max = 15.0;
  int resolution = 15;         // grid intervals per axis
  int refine_iterations = 60;  // coordinate-descent sweeps after the grid; 0 disables
  double phi0 = 0.05;          // initial deviation (rad)
  double horizon = 5.0;        // ISE horizon (s)
  double derivative_filter = 0.01;
  double lowpass_tau = 0.005;
  double hold_delay = 0.005;  // Tc/2; 0 drops the delay model

  bool operator==(const TuningConfig&) const = default;
};

void validate(const TuningConfig& cfg);

// Loop-structure fields taken from a controller configuration.
TuningConfig with_loop_of(TuningConfig cfg, const ControllerConfig& controller);

struct TuningResult {
  PidGains gains;
  double cost = 0.0;  // integral of phi^2 over the horizon (rad^2*s)
  std::size_t evaluated = 0;
  std::size_t feasible = 0;
};

// Characteristic polynomial of the angle loop, 1 + G(s) C(s) = 0, after the
// origin factor shared by the plant zero and the integrator is cancelled.
poly::Coeffs closed_loop_char_poly(const linmodel::StateSpaceModel& model, const PidGains& gains,
                                   const TuningConfig& cfg);

std::vector<std::complex<double>> closed_loop_poles(const linmodel::StateSpaceModel& model,
                                                    const PidGains& gains,
                                                    const TuningConfig& cfg);

bool stabilizes(const linmodel::StateSpaceModel& model, const PidGains& gains,
                const TuningConfig& cfg);

// Finite-horizon ISE of phi from phi0, computed exactly from the closed-loop
// state matrix. Returns +infinity when the loop is not stable.
double ise_cost(const linmodel::StateSpaceModel& model, const PidGains& gains,
                const TuningConfig& cfg);

// Grid search followed by coordinate descent. Throws TuningFailed when no
// grid point stabilizes the loop.
TuningResult tune_pid(const linmodel::StateSpaceModel& model, const TuningConfig& cfg);

}  // namespace pendubridge::control
