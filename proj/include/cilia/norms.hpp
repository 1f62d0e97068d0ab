#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cilia {

/// Continuous-or-jump piecewise-linear function. Abscissae are
/// nondecreasing; a repeated abscissa encodes a jump, and evaluation there
/// returns the right-hand value. Held constant outside the table.
struct PiecewiseLinear {
    std::vector<double> x;
    std::vector<double> y;

    void validate() const;
    double operator()(double t) const;  ///< right-continuous value
    double left_limit(double t) const;
    /// Restriction to [a, b): endpoint values are f(a+) and f(b-).
    PiecewiseLinear restrict(double a, double b) const;
    /// t -> f(t / lambda) on the stretched abscissae.
    PiecewiseLinear dilate(double lambda) const;
};

enum class NormKind { Lp, Linf, BV, Weighted };

/// A family of interval norms ||.||_[a,b). For Lp, `p` is the exponent;
/// for Weighted, `order` is -1, 0 or 1 and `gamma` the weight exponent of
/// sigma_gamma(x) = |x|^gamma.
struct NormFamilySpec {
    NormKind kind = NormKind::Lp;
    double p = 2.0;
    int order = 0;
    double gamma = 0.0;

    static NormFamilySpec lp(double p) { return {NormKind::Lp, p, 0, 0.0}; }
    static NormFamilySpec linf() { return {NormKind::Linf, 0.0, 0, 0.0}; }
    static NormFamilySpec bv() { return {NormKind::BV, 0.0, 0, 0.0}; }
    static NormFamilySpec weighted(int order, double gamma) {
        return {NormKind::Weighted, 0.0, order, gamma};
    }

    void validate() const;
    /// C(lambda) in ||f(./lambda)||_[lambda a, lambda b) <= C(lambda) ||f||_[a,b).
    /// lambda^{1/p} for Lp, 1 for Linf and BV, lambda^{gamma + 1/2} for the
    /// order-0 weighted norm on [0, b). Throws DomainError for the other
    /// weighted orders, which are not interval families.
    double scaling_constant(double lambda) const;
};

/// Exact norm of the restriction of a piecewise-linear function to [a, b),
/// for kinds Lp, Linf and BV.
double family_norm(const PiecewiseLinear& f, const NormFamilySpec& spec, double a, double b);

/// Norm of a general function on [a, b). Lp uses adaptive quadrature of
/// |f|^p split at `kinks`; Linf and BV tabulate f on `samples` uniform
/// points plus the kinks and take the exact piecewise-linear value, which
/// is exact when f is linear between those points.
double family_norm(const std::function<double(double)>& f, const NormFamilySpec& spec, double a,
                   double b, std::span<const double> kinks = {}, int samples = 4001,
                   double tol = 1e-12);

/// Function with a derivative, for the order-1 weighted norm.
struct SmoothFn {
    std::function<double(double)> value;
    std::function<double(double)> derivative;  ///< may be empty unless order 1
    std::vector<double> kinks;
};

struct WeightedNormOptions {
    double rel_tol = 1e-10;
    int grid = 4000;  ///< intervals of the order -1 finite-difference grid
    int max_panels = 20000;
};

/// ||sigma_gamma f|| in L^2(0, b) (order 0), H^1(0, b) (order 1), or the
/// discrete H^{-1}(0, b) dual norm (order -1): the discrete H^1 norm of the
/// solution of -u'' + u = sigma_gamma f, u(0) = u(b) = 0, on a uniform grid.
double weighted_norm(const SmoothFn& f, int order, double gamma, double b,
                     const WeightedNormOptions& opts = {});

}  // namespace cilia
