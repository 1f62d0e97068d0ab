#include "cilia/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "cilia/error.hpp"

namespace cilia {

using detail::require;

void HillParams::validate() const {
    require(std::isfinite(n) && n > 0.0, "HillParams: exponent n must be positive");
    require(std::isfinite(K_half) && K_half > 0.0, "HillParams: K_half must be positive");
}

namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

double erf_series(double z) {
    // Terms 2^n z^(2n+1)/(2n+1)!! are positive; no cancellation.
    const double z2 = z * z;
    double term = z;
    double sum = z;
    for (int n = 1; n < 200; ++n) {
        term *= 2.0 * z2 / (2.0 * n + 1.0);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return kTwoOverSqrtPi * std::exp(-z2) * sum;
}

// erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))), z > 0.
double erfc_continued_fraction(double z) {
    constexpr double tiny = 1e-300;
    double f = z;
    double C = z;
    double D = 0.0;
    for (int k = 1; k < 500; ++k) {
        const double a = 0.5 * k;
        D = z + a * D;
        if (D == 0.0) D = tiny;
        C = z + a / C;
        if (C == 0.0) C = tiny;
        D = 1.0 / D;
        const double delta = C * D;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-z * z) * std::numbers::inv_sqrtpi / f;
}

}  // namespace

double erfc(double z) {
    require(std::isfinite(z), "erfc: argument must be finite");
    if (z < 0.0) return 2.0 - erfc(-z);
    if (z < 2.0) return 1.0 - erf_series(z);
    if (z > 27.3) return 0.0;
    return erfc_continued_fraction(z);
}

double erfc_inv(double y) {
    require(std::isfinite(y) && y > 0.0 && y < 2.0, "erfc_inv: argument must lie in (0, 2)");
    if (y == 1.0) return 0.0;
    // Work on the lower half, erfc_inv(2 - y) = -erfc_inv(y).
    if (y > 1.0) return -erfc_inv(2.0 - y);

    const double tol = 1e-14 * y;
    double lo = 0.0;   // erfc(lo) >= y
    double hi = 27.0;  // erfc(hi) <= y
    double z = 0.5;
    double residual = erfc(z) - y;
    for (int it = 0; it < 300; ++it) {
        if (std::abs(residual) <= tol) return z;
        if (residual > 0.0) {
            lo = z;
        } else {
            hi = z;
        }
        const double slope = -kTwoOverSqrtPi * std::exp(-z * z);
        double next = slope != 0.0 ? z - residual / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == z || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
        z = next;
        residual = erfc(z) - y;
    }
    if (std::abs(residual) <= 1e-11 * y) return z;
    throw NumericalError("erfc_inv: residual tolerance not reached", std::abs(residual));
}

double hill(double x, const HillParams& p) {
    require(std::isfinite(x) && x >= 0.0, "hill: concentration must be nonnegative");
    if (x == 0.0) return 0.0;
    // x^n/(x^n + K^n) = 1/(1 + (K/x)^n), stable for large x.
    return 1.0 / (1.0 + std::pow(p.K_half / x, p.n));
}

std::vector<double> hill_taylor(double c0, int m, const HillParams& p) {
    p.validate();
    require(std::isfinite(c0) && c0 > 0.0, "hill_taylor: c0 must be positive");
    require(m >= 0, "hill_taylor: degree must be nonnegative");
    require(m <= 8, "hill_taylor: degree above 8 is not supported");

    const auto size = static_cast<std::size_t>(m) + 1;
    // u(h) = (c0 + h)^n / c0^n = sum_k binom(n, k) (h/c0)^k
    std::vector<double> u(size);
    u[0] = 1.0;
    for (std::size_t k = 1; k < size; ++k) {
        u[k] = u[k - 1] * (p.n - static_cast<double>(k - 1)) / (static_cast<double>(k) * c0);
    }
    // v(h) = u(h) + (K/c0)^n
    std::vector<double> v = u;
    v[0] += std::pow(p.K_half / c0, p.n);

    // F = u / v by series division.
    std::vector<double> F(size);
    for (std::size_t k = 0; k < size; ++k) {
        double acc = u[k];
        for (std::size_t i = 1; i <= k; ++i) acc -= v[i] * F[k - i];
        F[k] = acc / v[0];
    }
    return F;
}

double eval_polynomial(const std::vector<double>& coeffs, double h) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * h + *it;
    return acc;
}

}  // namespace cilia
