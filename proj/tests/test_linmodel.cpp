#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "pendubridge/linmodel.hpp"
#include "pendubridge/polynomial.hpp"
#include "support.hpp"

using namespace pendubridge;
using namespace pendubridge::linmodel;
using Complex = std::complex<double>;

namespace {

// Hand-expanded quartic from the Laplace-domain elimination.
poly::Coeffs quartic(const plant::PlantParams& p) {
  const double q = q_factor(p);
  const double inertia = p.pend_inertia + p.pend_mass * p.com_length * p.com_length;
  const double mgl = p.pend_mass * p.gravity * p.com_length;
  return {1.0, p.cart_friction * inertia / q, -(p.cart_mass + p.pend_mass) * mgl / q,
          -p.cart_friction * mgl / q, 0.0};
}

void check_rel(const poly::Coeffs& got, const poly::Coeffs& want, double tol) {
  REQUIRE(got.size() == want.size());
  double scale = 0.0;
  for (double c : want) scale = std::max(scale, std::abs(c));
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol * scale);
}

// C (sI - A)^-1 B for one output row, solved directly.
Complex frequency_response(const StateSpaceModel& m, int row, Complex s) {
  const Eigen::Matrix4cd lhs = s * Eigen::Matrix4cd::Identity() - m.A.cast<Complex>();
  const Eigen::Vector4cd x = lhs.fullPivLu().solve(m.B.cast<Complex>());
  Eigen::RowVector4cd c = Eigen::RowVector4cd::Zero();
  c[row] = 1.0;
  return c * x;
}

Complex ratio(const TransferFunction& tf, Complex s) {
  return poly::evaluate(tf.num, s) / poly::evaluate(tf.den, s);
}

int count_positive(const std::vector<Complex>& zs, double tol = 0.0) {
  return static_cast<int>(std::count_if(zs.begin(), zs.end(), [&](Complex z) { return z.real() > tol; }));
}

}  // namespace

TEST_SUITE("linmodel") {

TEST_CASE("q for the reference parameters") {
  CHECK(q_factor({}) == doctest::Approx(0.0132).epsilon(1e-12));
  plant::PlantParams p;
  p.pend_mass = 0.0;
  CHECK(q_factor(p) == doctest::Approx(p.cart_mass * p.pend_inertia).epsilon(1e-15));
}

TEST_CASE("both forms of q agree") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 1000; ++i) {
    const auto p = testing::random_params(rng);
    CHECK(std::abs(q_factor(p) - q_factor_expanded(p)) <= 1e-12 * std::abs(q_factor(p)));
  }
}

TEST_CASE("state-space structure") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 50; ++i) {
    const auto m = linearize(testing::random_params(rng));
    CHECK(m.A.row(0) == Eigen::RowVector4d(0, 1, 0, 0));
    CHECK(m.A.row(2) == Eigen::RowVector4d(0, 0, 0, 1));
    CHECK(m.A.col(0).isZero(0.0));
    CHECK(m.B[0] == 0.0);
    CHECK(m.B[2] == 0.0);
    CHECK(m.q > 0.0);
  }
  const auto m = linearize({});
  CHECK(m.B[1] == doctest::Approx(0.024 / 0.0132).epsilon(1e-12));
  CHECK(m.B[3] == doctest::Approx(0.06 / 0.0132).epsilon(1e-12));
  REQUIRE(m.C.rows() == 2);
  CHECK(m.C.row(0) == Eigen::RowVector4d(1, 0, 0, 0));
  CHECK(m.C.row(1) == Eigen::RowVector4d(0, 0, 1, 0));
  CHECK(m.D.isZero(0.0));
  CHECK((m.A * Eigen::Vector4d(3.0, 0, 0, 0)).isZero(0.0));
}

TEST_CASE("A and B are the Jacobians of the full dynamics at upright") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const auto p = testing::random_params(rng);
    const auto m = linearize(p);
    const double h = 1e-6;
    const Eigen::Vector4d up(0.0, 0.0, plant::kPi, 0.0);
    for (int j = 0; j < 5; ++j) {
      Eigen::Vector4d hi = up, lo = up;
      double fhi = 0.0, flo = 0.0;
      if (j < 4) {
        hi[j] += h;
        lo[j] -= h;
      } else {
        fhi = h;
        flo = -h;
      }
      const Eigen::Vector4d col = (testing::lagrange_rhs(p, hi, fhi) - testing::lagrange_rhs(p, lo, flo)) / (2 * h);
      const Eigen::Vector4d want = j < 4 ? Eigen::Vector4d(m.A.col(j)) : m.B;
      CHECK((col - want).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, want.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("characteristic polynomial of A is the transfer-function quartic") {
  check_rel(char_poly(linearize({})), {1.0, 0.181818181818, -31.2136363636, -4.45909090909, 0.0}, 1e-9);
  std::mt19937_64 rng(24);
  for (int i = 0; i < 100; ++i) {
    const auto p = testing::random_params(rng);
    check_rel(char_poly(linearize(p)), quartic(p), 1e-9);
    check_rel(tf_cart(p).den, quartic(p), 1e-12);
  }
}

TEST_CASE("characteristic polynomial of simple matrices") {
  StateSpaceModel m;
  CHECK(char_poly(m) == poly::Coeffs{1, 0, 0, 0, 0});
  m.A = Eigen::Matrix4d::Identity();
  check_rel(char_poly(m), {1, -4, 6, -4, 1}, 1e-15);
}

TEST_CASE("pendulum transfer function") {
  const auto tf = tf_pendulum({});
  CHECK(tf.units == "rad/N");
  check_rel(tf.num, {0.06 / 0.0132, 0.0}, 1e-12);
  check_rel(tf.den, {1.0, 0.181818181818, -31.2136363636, -4.45909090909}, 1e-9);
  CHECK(poly::degree(tf.num) == 1);
  CHECK(poly::degree(tf.den) == 3);

  plant::PlantParams p;
  p.cart_friction = 0.0;
  const auto frictionless = tf_pendulum(p);
  REQUIRE(frictionless.num.size() == 1);
  REQUIRE(frictionless.den.size() == 3);
  const double q = q_factor(p);
  CHECK(frictionless.num[0] == doctest::Approx(0.06 / q).epsilon(1e-12));
  CHECK(frictionless.den[1] == 0.0);
  CHECK(frictionless.den[2] == doctest::Approx(-0.7 * 0.2 * 9.81 * 0.3 / q).epsilon(1e-12));
}

TEST_CASE("cart transfer function") {
  const auto tf = tf_cart({});
  CHECK(tf.units == "m/N");
  check_rel(tf.num, {1.818181818181818, 0.0, -44.5909090909}, 1e-9);
  const auto pend = tf_pendulum({});
  check_rel(tf.den, poly::multiply(pend.den, {1.0, 0.0}), 1e-12);
  const auto zeros = poly::roots(tf.num);
  REQUIRE(zeros.size() == 2);
  const double w = std::sqrt(0.2 * 9.81 * 0.3 / 0.024);
  CHECK(std::abs(std::max(zeros[0].real(), zeros[1].real()) - w) < 1e-9);
  CHECK(std::abs(std::min(zeros[0].real(), zeros[1].real()) + w) < 1e-9);
}

TEST_CASE("transfer functions match the state-space frequency response") {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 30; ++i) {
    const auto p = testing::random_params(rng);
    const auto m = linearize(p);
    for (Complex s : {Complex(0.3, 1.1), Complex(-2.0, 5.0), Complex(7.0, -0.4)}) {
      const Complex cart = frequency_response(m, 0, s);
      const Complex angle = frequency_response(m, 2, s);
      CHECK(std::abs(ratio(tf_cart(p), s) - cart) <= 1e-9 * std::abs(cart));
      CHECK(std::abs(ratio(tf_pendulum(p), s) - angle) <= 1e-9 * std::abs(angle));
      CHECK(std::abs(ratio(channel_transfer(m, 1), s) - angle) <= 1e-9 * std::abs(angle));
    }
  }
}

TEST_CASE("poles") {
  CHECK(poles({{1.0}, {1.0, 0.0}, ""}) == std::vector<Complex>{0.0});
  const auto dbl = poles({{1.0}, {1.0, -2.0, 1.0}, ""});
  REQUIRE(dbl.size() == 2);
  for (Complex z : dbl) CHECK(std::abs(z - 1.0) < 1e-7);
  CHECK_THROWS(poles({{1.0}, {2.0}, ""}));

  const auto tf = tf_pendulum({});
  const auto ps = poles(tf);
  REQUIRE(ps.size() == 3);
  CHECK(count_positive(ps) == 1);
  for (Complex z : ps) CHECK(std::abs(poly::evaluate(tf.den, z)) < 1e-8 * poly::scale(tf.den));
  // Descartes: one sign change in the cubic.
  int changes = 0;
  for (std::size_t i = 1; i < tf.den.size(); ++i) changes += (tf.den[i] < 0) != (tf.den[i - 1] < 0);
  CHECK(changes == 1);
}

TEST_CASE("eigenvalues agree with the characteristic polynomial roots") {
  StateSpaceModel zero;
  for (Complex z : eigenvalues(zero)) CHECK(z == Complex(0.0));

  std::mt19937_64 rng(26);
  for (int i = 0; i < 50; ++i) {
    const auto m = linearize(testing::random_params(rng));
    auto ev = eigenvalues(m);
    auto rt = poly::roots(char_poly(m));
    auto by_value = [](Complex a, Complex b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    std::sort(ev.begin(), ev.end(), by_value);
    std::sort(rt.begin(), rt.end(), by_value);
    REQUIRE(ev.size() == 4);
    REQUIRE(rt.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(ev[k] - rt[k]) < 1e-8 * std::max(1.0, std::abs(rt[k])));
    for (Complex z : ev) {
      const Eigen::Matrix4cd shifted = m.A.cast<Complex>() - z * Eigen::Matrix4cd::Identity();
      CHECK(std::abs(shifted.determinant()) < 1e-8 * std::pow(std::max(1.0, m.A.norm()), 4));
    }
  }
}

TEST_CASE("exactly one unstable and one zero eigenvalue") {
  std::mt19937_64 rng(27);
  for (int i = 0; i < 100; ++i) {
    const auto ev = eigenvalues(linearize(testing::random_params(rng)));
    CHECK(count_positive(ev) == 1);
    CHECK(std::count_if(ev.begin(), ev.end(), [](Complex z) { return std::abs(z) < 1e-9; }) == 1);
  }
}

TEST_CASE("linear derivative matches the nonlinear one near upright") {
  const plant::PlantParams p;
  const auto m = linearize(p);
  auto error_at = [&](double phi) {
    const auto nl = plant::deriv(p, {0.0, 0.0, plant::kPi + phi, 0.0}, {0.0});
    const auto lin = linear_deriv(m, {0.0, 0.0, phi, 0.0}, {0.0});
    return std::hypot(nl.x_ddot - lin.x_dot, nl.theta_ddot - lin.phi_dot);
  };
  // The accelerations are odd in phi, so the remainder is cubic.
  for (double phi : {1e-3, 1e-2, 1e-1}) CHECK(error_at(phi) < 20.0 * phi * phi * phi);
  CHECK(error_at(1e-2) / error_at(1e-3) == doctest::Approx(1000.0).epsilon(0.01));
  const auto s = to_lin_state({1.0, 2.0, plant::kPi + 0.25, 3.0});
  CHECK(s == LinState{1.0, 2.0, 0.25, 3.0});
}

TEST_CASE("custom output matrix") {
  Eigen::MatrixXd C(1, 4);
  C << 0, 1, 0, 0;
  const auto m = linearize({}, C);
  CHECK(m.C == C);
  CHECK(m.D.rows() == 1);
  CHECK_THROWS(linearize({}, Eigen::MatrixXd::Zero(1, 3)));
}

}  // TEST_SUITE
