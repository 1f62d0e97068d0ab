#include "cilia/kernel_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cilia/error.hpp"

namespace cilia {

using detail::require;

void PhysicalParams::validate() const {
    require(std::isfinite(D) && D > 0.0, "PhysicalParams: D must be positive");
    require(std::isfinite(L) && L > 0.0, "PhysicalParams: L must be positive");
    require(std::isfinite(c0) && c0 > 0.0, "PhysicalParams: c0 must be positive");
    require(std::isfinite(J0) && J0 > 0.0, "PhysicalParams: J0 must be positive");
    hill.validate();
}

double PhysicalParams::F_c0() const { return cilia::hill(c0, hill); }

void GeometricMeshSpec::validate() const {
    require(std::isfinite(beta) && beta > 0.0 && beta < 1.0,
            "GeometricMeshSpec: beta must lie in (0, 1)");
    require(std::isfinite(beta0) && beta0 > 0.0, "GeometricMeshSpec: beta0 must be positive");
    require(m >= 1, "GeometricMeshSpec: m must be at least 1");
}

StepPartition partition_from_alphas(const std::vector<double>& alphas, const PhysicalParams& pp) {
    pp.validate();
    require(!alphas.empty(), "partition_from_alphas: need at least one threshold");
    require(alphas.front() > 0.0, "partition_from_alphas: thresholds must be positive");
    for (std::size_t j = 1; j < alphas.size(); ++j) {
        require(alphas[j] > alphas[j - 1], "partition_from_alphas: thresholds must be ascending");
    }
    require(alphas.back() < pp.c0, "partition_from_alphas: thresholds must lie below c0");

    StepPartition part;
    part.m = static_cast<int>(alphas.size());
    part.length = pp.L;
    part.alphas = alphas;

    // Midpoint recipe: F_0 = 0, F_j = F((alpha_j + alpha_{j+1})/2), F_m = F(c0).
    const auto m = alphas.size();
    const double Fc0 = pp.F_c0();
    std::vector<double> Fj(m + 1, 0.0);
    for (std::size_t j = 1; j < m; ++j) Fj[j] = hill(0.5 * (alphas[j - 1] + alphas[j]), pp.hill);
    Fj[m] = Fc0;
    part.a.resize(m);
    for (std::size_t j = 0; j < m; ++j) part.a[j] = (Fj[j + 1] - Fj[j]) / Fc0;

    part.betas.resize(m);
    const double two_sqrt_D = 2.0 * std::sqrt(pp.D);
    for (std::size_t j = 0; j < m; ++j) part.betas[j] = two_sqrt_D * erfc_inv(alphas[j] / pp.c0);

    part.Lk.assign(m + 1, 0.0);
    for (std::size_t k = 0; k < m; ++k) part.Lk[k + 1] = pp.L / part.betas[k];
    return part;
}

StepPartition geometric_partition(const GeometricMeshSpec& spec, const PhysicalParams& pp) {
    spec.validate();
    pp.validate();
    std::vector<double> alphas(static_cast<std::size_t>(spec.m));
    const double two_sqrt_D = 2.0 * std::sqrt(pp.D);
    for (int j = 1; j <= spec.m; ++j) {
        alphas[j - 1] = pp.c0 * erfc(spec.beta0 * std::pow(spec.beta, j) / two_sqrt_D);
    }
    return partition_from_alphas(alphas, pp);
}

PolynomialKernel polynomial_kernel(int m, const PhysicalParams& pp) {
    pp.validate();
    PolynomialKernel pk;
    pk.coeffs = hill_taylor(pp.c0, m, pp.hill);
    pk.c0 = pp.c0;
    return pk;
}

double w(double t, double x, const PhysicalParams& pp) {
    require(std::isfinite(t) && t > 0.0, "w: time must be positive");
    require(std::isfinite(x) && x >= 0.0, "w: position must be nonnegative");
    return pp.c0 * erfc(x / (2.0 * std::sqrt(pp.D * t)));
}

double step_F_m(double x, const StepPartition& part, const PhysicalParams& pp) {
    // alphas ascending: count thresholds alpha_j <= x.
    const auto passed = static_cast<std::size_t>(
        std::upper_bound(part.alphas.begin(), part.alphas.end(), x) - part.alphas.begin());
    double sum = 0.0;
    for (std::size_t j = 0; j < passed; ++j) sum += part.a[j];
    return pp.F_c0() * sum;
}

double kernel_K_m(double t, double x, const StepPartition& part, const PhysicalParams& pp) {
    return step_F_m(w(t, x, pp), part, pp);
}

double mu(int k, double L) { return (2.0 * k + 1.0) * std::numbers::pi / (2.0 * L); }

double concentration_series(double t, double x, const PhysicalParams& pp, double tol,
                            int max_terms) {
    require(std::isfinite(t) && t >= 0.0, "concentration_series: time must be nonnegative");
    require(std::isfinite(x) && x >= 0.0 && x <= pp.L,
            "concentration_series: position must lie in [0, L]");
    if (x == 0.0) return pp.c0;

    // c = c0 - c0 (2/L) sum_k exp(-mu_k^2 D t) sin(mu_k x) / mu_k
    const double scale = pp.c0 * 2.0 / pp.L;
    double sum = 0.0;
    for (int k = 0; k < max_terms; ++k) {
        const double mk = mu(k, pp.L);
        sum += std::exp(-mk * mk * pp.D * t) * std::sin(mk * x) / mk;

        // Terms beyond k decay at least geometrically with ratio r.
        const double m1 = mu(k + 1, pp.L);
        const double m2 = mu(k + 2, pp.L);
        const double first = std::exp(-m1 * m1 * pp.D * t) / m1;
        const double r = std::exp(-(m2 * m2 - m1 * m1) * pp.D * t) * (m1 / m2);
        if (r < 1.0 && scale * first / (1.0 - r) < tol) {
            return std::clamp(pp.c0 - scale * sum, 0.0, pp.c0);
        }
    }
    throw NumericalError(
        "concentration_series: tail bound not reached; use the half-space approximation w for "
        "short times",
        tol);
}

double kernel_PK_m(double t, double x, const PolynomialKernel& pk, const PhysicalParams& pp) {
    if (pk.degree() == 0) return pk.coeffs[0];
    const double c = concentration_series(t, x, pp, pk.series_tol, pk.series_max_terms);
    return eval_polynomial(pk.coeffs, c - pk.c0);
}

}  // namespace cilia
