#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "cilia/forward_operator.hpp"
#include "cilia/norms.hpp"

namespace cilia {

// Mellin symbol ---------------------------------------------------------------

/// |sum_j a_j beta_j^{-(1/2 + gamma)} e^{i s ln beta_j}|.
double lambda_gamma(double s, double gamma, const StepPartition& part);

/// ln(a_m) / ln(beta_m / beta_{m-1}) - 1/2; -infinity when m = 1.
double gamma0_bound(const StepPartition& part);

/// beta_m^{-gamma-1/2} (a_m - (beta_{m-1}/beta_m)^{-(gamma+1/2)}), a lower
/// bound for lambda_gamma; for m = 1 the exact constant a_1 beta_1^{-gamma-1/2}.
double c_gamma_lower_bound(double gamma, const StepPartition& part);

/// 40 pi / |ln(beta_m / beta_1)|, or 2 pi for m = 1.
double default_s_max(const StepPartition& part);

struct CGammaResult {
    double value = 0.0;     ///< refined infimum, <= grid_min
    double grid_min = 0.0;  ///< minimum over the uniform grid
    double s_argmin = 0.0;
    double s_max = 0.0;
    double spacing = 0.0;
    int samples = 0;
    bool certified = false;     ///< gamma exceeds gamma0_bound
    double certificate = 0.0;   ///< c_gamma_lower_bound when certified
};

/// Infimum of lambda_gamma over [0, s_max]: the grid minimum, then a
/// golden-section refinement on the two grid cells around it. The grid is
/// evaluated on up to `threads` threads and reduced in index order.
CGammaResult c_gamma(double gamma, const StepPartition& part, double s_max, int n_samples = 100000,
                     unsigned threads = 1);

/// Samples (s, lambda_gamma(s)) on a uniform grid over [0, s_max].
std::vector<std::pair<double, double>> lambda_profile(double gamma, const StepPartition& part,
                                                      double s_max, int n_samples);

// Mellin transform -------------------------------------------------------------

struct MellinOptions {
    double abs_tol = 1e-12;
    int max_panels = 100000;
    std::vector<double> kinks;  ///< breakpoints of f in (0, support_end)
};

/// int_0^{support_end} f(x) x^{s-1} dx for Re s > 0, computed in the
/// variable u = ln(support_end / x) and truncated where the tail bound
/// sup|f| b^{Re s} e^{-u Re s} / Re s drops below the tolerance.
std::complex<double> mellin_numeric(const std::function<double(double)>& f, double support_end,
                                    std::complex<double> s, const MellinOptions& opts = {});

/// (1 / 2 pi)^{1/2} ||M[f](1/2 + i tau)||_{L^2(-S, S)}; matches ||f||_{L^2}
/// as S grows.
double mellin_critical_line_norm(const std::function<double(double)>& f, double support_end,
                                 double S, const MellinOptions& opts = {});

// Inequality verifiers --------------------------------------------------------

struct Margin {
    double lhs = 0.0;     ///< constant times the left-hand norm
    double rhs = 0.0;
    double margin = 0.0;  ///< rhs - lhs
    bool holds = false;   ///< margin >= -1e-9 rhs
};

inline constexpr double kMarginTolerance = 1e-9;

/// phi continuous on [0, L] with breakpoints `kinks`.
struct ContinuousFn {
    std::function<double(double)> eval;
    std::vector<double> kinks;
};

/// C_gamma ||phi - phi(L)||_{0,gamma,L} <= ||Phi_m[phi] - Phi_m[phi](L_m)||_{0,gamma,L_m}.
/// `cg` is the C_gamma computed for this gamma and partition.
Margin verify_stability_L2(const ContinuousFn& phi, double gamma, const StepPartition& part,
                           const CGammaResult& cg, double rel_tol = 1e-11);

/// Level-wise bound on a geometric partition:
/// ||phi - phi(L)||_[beta^{k+1} L, beta^k L)
///   <= C(beta0) C(beta^m) / a_m^{k+1} ||Phi[phi] - Phi[phi](L_m)||_[beta^{k+1} L_m, L_m).
Margin verify_level_stability(const ContinuousFn& phi, const StepPartition& part,
                              const GeometricMeshSpec& spec, const NormFamilySpec& family, int k);

struct OperatorStabilityReport {
    double gamma = 0.0;
    double norm_I_1_gamma = 0.0;       ///< ||I_m[rho]||_{1,gamma,L_m^2}
    double norm_rho_L2 = 0.0;          ///< ||rho||_{L^2(0,L)}
    double continuity_ratio = 0.0;     ///< first / second
    double norm_rho_minus1 = 0.0;      ///< ||rho||_{-1,gamma+1,L}
    double norm_I_1_half = 0.0;        ///< ||I_m[rho]||_{1,gamma/2-1/4,L_m^2}
    double stability_ratio = 0.0;      ///< first / second
    double continuity_ratio_refined = 0.0;
    double stability_ratio_refined = 0.0;
};

/// Norms entering the continuity and stability estimates of I_m, each at two
/// resolutions so the ratios' sensitivity to refinement can be judged.
OperatorStabilityReport verify_operator_stability(const DensityFn& rho, double gamma,
                                                  const StepPartition& part, const PhysicalParams& pp,
                                                  double rel_tol = 1e-8, int grid = 2000);

// Integer witness for the eigenvalue-sum obstruction ---------------------------

struct SquareSumSolution {
    std::vector<int> n_i;   ///< nondecreasing
    int n = 0;              ///< (2n + 1)^2 = k + 4 sum (n_i^2 + n_i)
    std::int64_t lhs = 0;
};

struct SquareSumScan {
    int k = 0;
    int n_max = 0;
    std::uint64_t multisets = 0;
    std::vector<SquareSumSolution> solutions;
    // Certificate: every multiset gives lhs = k (mod 8) because
    // n^2 + n is even, while odd squares are 1 (mod 8).
    int lhs_residue_mod8 = 0;
    bool residue_checked_for_all = false;
    bool congruence_admits_solutions = false;  ///< k = 1 (mod 8)
};

/// Exhaustive search over multisets {n_1..n_k} of [0, n_max] for the exact
/// identity k + 4 sum (n_i^2 + n_i) = 1 + 4 (n^2 + n). Integer arithmetic.
SquareSumScan square_sum_scan(int k, int n_max);

/// square_sum_scan for k = 1..k_max (k_max <= 8).
std::vector<SquareSumScan> collision_scan(int k_max, int n_max);

}  // namespace cilia
