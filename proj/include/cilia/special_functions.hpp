#pragma once

#include <vector>

namespace cilia {

/// Hill activation parameters: exponent n and half-bulk concentration K_half.
struct HillParams {
    double n = 2.0;
    double K_half = 0.5;

    void validate() const;
};

/// Complementary error function, 1 - (2/sqrt(pi)) * int_0^z exp(-t^2) dt.
///
/// |z| < 2 uses the all-positive-term series
///   erf(z) = (2/sqrt(pi)) exp(-z^2) sum_n 2^n z^(2n+1) / (2n+1)!!,
/// larger arguments the Laplace continued fraction evaluated by modified
/// Lentz. Absolute error stays below 1e-15 over the double range.
double erfc(double z);

/// Inverse of erfc on (0, 2): bracketing bisection safeguarding Newton
/// steps. Throws DomainError outside (0, 2) and NumericalError when the
/// residual cannot be driven below tolerance (y within a few ulps of 0).
double erfc_inv(double y);

/// x^n / (x^n + K^n). Throws DomainError for x < 0.
double hill(double x, const HillParams& p);

/// Taylor coefficients (alpha_0, ..., alpha_m) of the Hill function about c0,
/// alpha_k = F^(k)(c0) / k!. Computed by truncated power-series arithmetic:
/// the binomial series of (c0 + h)^n followed by series division.
/// Requires c0 > 0 and m <= 8.
std::vector<double> hill_taylor(double c0, int m, const HillParams& p);

/// Horner evaluation of sum_k coeffs[k] * h^k.
double eval_polynomial(const std::vector<double>& coeffs, double h);

}  // namespace cilia
