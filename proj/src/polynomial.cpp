#include "pendubridge/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "pendubridge/errors.hpp"

namespace pendubridge::poly {

Complex evaluate(const Coeffs& p, Complex z) {
  Complex acc{0.0, 0.0};
  for (double c : p) acc = acc * z + c;
  return acc;
}

double scale(const Coeffs& p) {
  double s = 0.0;
  for (double c : p) s = std::max(s, std::abs(c));
  return s;
}

Coeffs trim_leading(Coeffs p) {
  auto first = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
  if (first == p.end()) return {0.0};
  p.erase(p.begin(), first);
  return p;
}

std::size_t degree(const Coeffs& p) {
  const Coeffs t = trim_leading(p);
  return t.size() - 1;
}

Coeffs multiply(const Coeffs& a, const Coeffs& b) {
  if (a.empty() || b.empty()) return {0.0};
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Coeffs add(const Coeffs& a, const Coeffs& b) {
  const std::size_t n = std::max(a.size(), b.size());
  Coeffs out(n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
  return out;
}

int cancel_origin(Coeffs& num, Coeffs& den, double rel_tol) {
  int removed = 0;
  auto negligible = [rel_tol](const Coeffs& p) {
    return p.size() > 1 && std::abs(p.back()) <= rel_tol * scale(p);
  };
  while (negligible(num) && negligible(den)) {
    num.pop_back();
    den.pop_back();
    ++removed;
  }
  return removed;
}

std::vector<Complex> roots(const Coeffs& input) {
  Coeffs p = trim_leading(input);
  if (p.size() < 2) throw InputDomainError("polynomial of degree 0 has no roots");

  std::vector<Complex> out;
  while (p.size() > 1 && p.back() == 0.0) {
    out.emplace_back(0.0, 0.0);
    p.pop_back();
  }
  const auto n = static_cast<Eigen::Index>(p.size() - 1);
  if (n == 0) return out;

  // Companion matrix of the monic polynomial: first row -p[1..n]/p[0].
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) companion(0, j) = -p[j + 1] / p[0];
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw InputDomainError("companion eigen-solve failed");

  Coeffs dp(p.size() - 1);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    dp[i] = p[i] * static_cast<double>(p.size() - 1 - i);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex z = solver.eigenvalues()[i];
    // Newton polish; keep a step only if it lowers the residual.
    for (int it = 0; it < 3; ++it) {
      const Complex f = evaluate(p, z);
      const Complex df = evaluate(dp, z);
      if (std::abs(df) == 0.0) break;
      const Complex next = z - f / df;
      if (std::abs(evaluate(p, next)) >= std::abs(f)) break;
      z = next;
    }
    out.push_back(z);
  }
  return out;
}

}  // namespace pendubridge::poly
