#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "cilia/kernel_models.hpp"

namespace cilia {

/// Channel density rho on [0, L]. `kinks` lists points where rho or its
/// derivative jumps; quadratures split there.
struct DensityFn {
    std::function<double(double)> eval;
    std::vector<double> kinks;

    double operator()(double x) const { return eval(x); }
};

/// Cumulative phi(x) = int_0^x rho on [0, L], extended by phi(L) for x > L.
struct CumulativeFn {
    std::function<double(double)> eval;
    double L = 1.0;

    double operator()(double x) const { return eval(x < L ? x : L); }
};

/// Time samples of a current trace.
struct SampledSignal {
    std::vector<double> times;
    std::vector<double> values;

    /// Throws DomainError unless lengths match, times are strictly
    /// increasing and times[0] >= 0.
    void validate() const;
};

// Builtin densities ---------------------------------------------------------

DensityFn constant_density(double value);

/// rho(x) = 8 a^8 x^7 / (x^8 + a^8)^2, whose cumulative is x^8 / (x^8 + a^8).
DensityFn hill8_density(double a);
CumulativeFn hill8_cumulative(double a, double L);

/// Continuous piecewise-linear density through (xs[i], ys[i]), held constant
/// outside [xs.front(), xs.back()].
DensityFn piecewise_linear_density(std::vector<double> xs, std::vector<double> ys);
/// Exact antiderivative of piecewise_linear_density (piecewise quadratic).
CumulativeFn piecewise_linear_cumulative(std::vector<double> xs, std::vector<double> ys, double L);

/// Cumulative built by adaptive quadrature of rho for every evaluation.
CumulativeFn cumulative_from_density(DensityFn rho, double L, double tol = 1e-12);

// Forward maps --------------------------------------------------------------

/// int_0^x rho by adaptive quadrature to absolute tolerance tol.
double phi_from_rho(const DensityFn& rho, double x, double L, double tol = 1e-10);

/// Phi_m[phi](t) = sum_j a_j phi(min(L, beta_j t)).
double Phi_m(const CumulativeFn& phi, double t, const StepPartition& part);

/// J0 F(c0) Phi_m[phi](sqrt t).
double I_m_from_cumulative(const CumulativeFn& phi, double t, const StepPartition& part,
                           const PhysicalParams& pp);

/// Step-kernel current through the cumulative route: the integrals of rho
/// up to each clamped front position beta_j sqrt(t).
double I_m_formula(const DensityFn& rho, double t, const StepPartition& part,
                   const PhysicalParams& pp, double tol = 1e-10);

/// Step-kernel current by direct quadrature of J0 rho(x) K_m(t, x) over
/// [0, L], split at the kernel jumps beta_j sqrt(t).
double I_m_quadrature(const DensityFn& rho, double t, const StepPartition& part,
                      const PhysicalParams& pp, double tol = 1e-10);

/// d/dt I_m[rho](t) = J0 F(c0) / (2 sqrt t) sum_{beta_j sqrt t < L} a_j beta_j rho(beta_j sqrt t).
double I_m_derivative(const DensityFn& rho, double t, const StepPartition& part,
                      const PhysicalParams& pp);

/// Below this value of D t / L^2, I_exact uses w in place of the series.
inline constexpr double kShortTimeThreshold = 0.01;

/// Current for the exact kernel F(c(t, x)).
double I_exact(const DensityFn& rho, double t, const PhysicalParams& pp, double tol = 1e-10);

/// Polynomial-kernel current int_0^L rho PK_m (no J0 factor).
double PI_m(const DensityFn& rho, double t, const PolynomialKernel& pk, const PhysicalParams& pp,
            double tol = 1e-10);

struct StepModel {
    StepPartition partition;
};
struct ExactModel {};
struct PolyModel {
    PolynomialKernel kernel;
};
using ForwardModel = std::variant<StepModel, ExactModel, PolyModel>;

/// Evaluate the chosen forward path on a time grid. Grid points may be
/// evaluated on `threads` worker threads; results are stored by index so the
/// output does not depend on the thread count.
SampledSignal sample_current(const DensityFn& rho, const ForwardModel& model,
                             const std::vector<double>& time_grid, const PhysicalParams& pp,
                             double tol = 1e-10, unsigned threads = 1);

}  // namespace cilia
