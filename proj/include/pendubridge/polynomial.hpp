#pragma once

#include <complex>
#include <vector>

namespace pendubridge::poly {

// Real polynomial, coefficients in descending powers: {1, -2, 1} is s^2 - 2s + 1.
using Coeffs = std::vector<double>;
using Complex = std::complex<double>;

std::complex<double> evaluate(const Coeffs& p, Complex z);

// Largest coefficient magnitude; the scale used for residual checks.
double scale(const Coeffs& p);

// Drops leading (highest-power) zeros; an all-zero input becomes {0}.
Coeffs trim_leading(Coeffs p);

std::size_t degree(const Coeffs& p);

Coeffs multiply(const Coeffs& a, const Coeffs& b);
Coeffs add(const Coeffs& a, const Coeffs& b);

// Removes common factors of s from a ratio num/den. A trailing coefficient
// counts as zero when it is below `rel_tol` times the polynomial's scale.
// Returns how many factors were removed.
int cancel_origin(Coeffs& num, Coeffs& den, double rel_tol = 1e-12);

// All complex roots. Exact zero trailing coefficients give exact zero roots;
// the remainder come from the eigenvalues of the companion matrix, polished by
// Newton iteration. Throws InputDomainError for degree-0 input.
std::vector<Complex> roots(const Coeffs& p);

}  // namespace pendubridge::poly
