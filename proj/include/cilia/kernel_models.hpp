#pragma once

#include <vector>

#include "cilia/special_functions.hpp"

namespace cilia {

/// Physical constants of the diffusion/current model.
struct PhysicalParams {
    double D = 1.0;   ///< diffusivity, length^2 / time
    double L = 1.0;   ///< cilium length
    double c0 = 1.0;  ///< boundary concentration at the open end
    double J0 = 1.0;  ///< current per unit length
    HillParams hill{};

    void validate() const;
    /// Hill activation at the boundary concentration, F(c0).
    double F_c0() const;
};

/// Step approximation F_m of the Hill function on thresholds alpha_j,
/// together with the induced front speeds beta_j and horizons L_k.
///
/// Indices are zero-based: alphas[j], a[j], betas[j] hold the one-based
/// quantities alpha_{j+1}, a_{j+1}, beta_{j+1}; Lk[k] holds L_k with
/// Lk[0] = 0.
struct StepPartition {
    int m = 0;
    double length = 0.0;          ///< L the partition was built for
    std::vector<double> alphas;   ///< ascending, in (0, c0)
    std::vector<double> a;        ///< positive weights summing to 1
    std::vector<double> betas;    ///< strictly decreasing
    std::vector<double> Lk;       ///< 0 = L_0 < L_1 < ... < L_m

    double a_m() const { return a.back(); }
    double beta_m() const { return betas.back(); }
    double L_m() const { return Lk.back(); }
};

/// Thresholds alpha_j = c0 erfc(beta0 beta^j / (2 sqrt(D))), j = 1..m, for
/// which beta_j = beta0 beta^j.
struct GeometricMeshSpec {
    double beta = 0.8;
    double beta0 = 1.0;
    int m = 8;

    void validate() const;
};

/// Taylor-polynomial approximation of the Hill function about c0.
struct PolynomialKernel {
    std::vector<double> coeffs;  ///< alpha_0 .. alpha_m
    double c0 = 1.0;
    double series_tol = 1e-13;   ///< tail bound for the concentration series
    int series_max_terms = 10000;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

StepPartition partition_from_alphas(const std::vector<double>& alphas, const PhysicalParams& pp);

StepPartition geometric_partition(const GeometricMeshSpec& spec, const PhysicalParams& pp);

PolynomialKernel polynomial_kernel(int m, const PhysicalParams& pp);

/// Half-space concentration c0 erfc(x / (2 sqrt(D t))).
double w(double t, double x, const PhysicalParams& pp);

/// F(c0) sum_j a_j H(x - alpha_j), with H(0) = 1.
double step_F_m(double x, const StepPartition& part, const PhysicalParams& pp);

/// K_m(t, x) = F_m(w(t, x)).
double kernel_K_m(double t, double x, const StepPartition& part, const PhysicalParams& pp);

/// Concentration from the eigenfunction series of the cilium diffusion
/// problem, truncated once the geometric tail bound falls below tol.
/// Throws NumericalError when max_terms terms do not suffice (t -> 0).
double concentration_series(double t, double x, const PhysicalParams& pp, double tol = 1e-13,
                            int max_terms = 10000);

/// mu_k = (2k + 1) pi / (2L).
double mu(int k, double L);

/// PK_m(t, x) = P_m(c(t, x) - c0).
double kernel_PK_m(double t, double x, const PolynomialKernel& pk, const PhysicalParams& pp);

}  // namespace cilia
