#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cilia/forward_operator.hpp"

namespace cilia {

/// Geometric reconstruction mesh. Level j (one-based) holds
/// beta^{j-1} * base; P concatenates the levels in order, so it is
/// ascending within a level and descending across levels.
struct ReconstructionMesh {
    int p = 0;                  ///< number of levels
    int q = 0;                  ///< points per level minus one
    double beta = 0.8;
    double L = 1.0;
    std::vector<double> base;   ///< base[0] = beta L < ... < base[q] < L
    std::vector<double> P;      ///< level-major, size p (q + 1)

    std::size_t dim() const { return P.size(); }
    std::size_t index(int level, int s) const {
        return static_cast<std::size_t>(level - 1) * static_cast<std::size_t>(q + 1) +
               static_cast<std::size_t>(s);
    }
};

enum class BaseRule { Uniform };

/// Uniform base x_i = beta L + i (1 - beta) L / (q + 1), i = 0..q.
ReconstructionMesh build_mesh(const GeometricMeshSpec& spec, const PhysicalParams& pp, int p, int q,
                              BaseRule rule = BaseRule::Uniform);

/// Mesh from a caller-supplied base; validated against the invariants.
ReconstructionMesh build_mesh_from_base(const GeometricMeshSpec& spec, const PhysicalParams& pp,
                                        int p, std::vector<double> base);

/// Normalised offset current g on [0, beta0 L_m]. `error_bound(t)` bounds
/// |g(t) - g_true(t)| when the underlying current is nondecreasing; it is 0
/// for exactly evaluated g.
struct GFunction {
    std::function<double(double)> eval;
    std::function<double(double)> error_bound;
    double domain_end = 0.0;
    /// I(L_m^2) / (J0 F(c0)), which equals phi(L) for an exact signal.
    double offset = 0.0;

    double operator()(double t) const;
};

/// g from a sampled current, linearly interpolated in time.
GFunction g_from_signal(const SampledSignal& sig, const StepPartition& part,
                        const GeometricMeshSpec& spec, const PhysicalParams& pp);

/// g from a current that can be evaluated at any time.
GFunction g_from_current(std::function<double(double)> current, const StepPartition& part,
                         const GeometricMeshSpec& spec, const PhysicalParams& pp);

/// Level index k with x in [beta^k L, beta^{k-1} L).
int level_of(double x, double L, double beta);

/// phi_tilde(x) from the explicit recursion, walking the chain
/// x beta^{l-k}, l = 1..k. Throws NumericalError when the level of x
/// exceeds k_max.
double phi_recursion(const GFunction& g, const GeometricMeshSpec& spec, const StepPartition& part,
                     double x, int k_max = 200);

/// G aligned with mesh.P. g is evaluated at P / beta^m on up to `threads`
/// threads; the recursion itself is sequential in the level.
std::vector<double> reconstruct_G(const GFunction& g, const ReconstructionMesh& mesh,
                                  const StepPartition& part, const GeometricMeshSpec& spec,
                                  unsigned threads = 1);

/// Arguments t = P / beta^m at which reconstruct_G evaluates g, and the
/// current sample times t^2 / beta0^2 they correspond to.
std::vector<double> recursion_arguments(const ReconstructionMesh& mesh, const GeometricMeshSpec& spec);
std::vector<double> recursion_sample_times(const ReconstructionMesh& mesh,
                                           const GeometricMeshSpec& spec);

/// Density recovered from G by forward differences on the mesh sorted in x.
/// X and phi_tilde have dim entries; Y and Y_raw have dim - 1, with Y[s]
/// the slope on [X[s], X[s+1]).
struct DensityEstimate {
    std::vector<double> X;
    std::vector<double> phi_tilde;
    std::vector<double> Y;      ///< max(slope, 0)
    std::vector<double> Y_raw;  ///< unclamped slope
    double offset = 0.0;        ///< int_0^x rho = phi_tilde(x) + offset
};

DensityEstimate density_from_G(const ReconstructionMesh& mesh, const std::vector<double>& G,
                               double offset);

/// Cumulative rebuilt from the clamped slopes, anchored at the top mesh
/// point and joined linearly to (L, offset). Constant below X[0].
CumulativeFn cumulative_from_estimate(const DensityEstimate& est, double L);

/// Discretisation of phi -> Phi_tilde_m[phi](t / beta0) at the recursion
/// arguments, columns ordered like mesh.P. Clamped arguments hit phi(L) = 0
/// and drop out. Throws DomainError if an argument misses the mesh.
Eigen::MatrixXd assemble_matrix(const ReconstructionMesh& mesh, const StepPartition& part,
                                const GeometricMeshSpec& spec);

struct MatrixDiagnostics {
    std::size_t dim = 0;
    bool lower_triangular = false;
    bool diagonal_equals_a_m = false;
    double log_abs_det = 0.0;       ///< from an LU factorisation
    double expected_log_det = 0.0;  ///< dim ln a_m
    double det_relative_error = 0.0;
    double condition_1 = 0.0;       ///< ||A||_1 ||A^{-1}||_1
};

MatrixDiagnostics matrix_diagnostics(const Eigen::MatrixXd& A, double a_m);

/// Sum of |h_l| over the first `levels` terms of the recursion's impulse
/// response; equals the infinity norm of the inverse of assemble_matrix.
double recursion_gain(const StepPartition& part, int levels);

/// Forward image of a reconstruction against the current it came from, at
/// the sample times t^2 / beta0^2 of every recursion argument t.
struct ConsistencyReport {
    std::size_t samples = 0;
    std::size_t violations = 0;   ///< |forward - input| > allowed
    double max_abs_diff = 0.0;
    double max_allowed = 0.0;
    double max_excess = 0.0;      ///< largest |forward - input| - allowed, floored at 0
    bool density_nonnegative = false;  ///< of the clamped estimate that is propagated
};

/// The forward image uses cumulative_from_estimate, so clamped slopes are
/// what gets propagated. `allowed` at each sample is the interpolation bound
/// J0 F(c0) g.error_bound(t) plus a rounding allowance proportional to
/// (dim + recursion_gain) eps max|cumulative|.
ConsistencyReport forward_consistency(const DensityEstimate& est, const GFunction& g,
                                      const std::function<double(double)>& input,
                                      const ReconstructionMesh& mesh, const StepPartition& part,
                                      const GeometricMeshSpec& spec, const PhysicalParams& pp);

}  // namespace cilia
