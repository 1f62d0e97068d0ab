#include "cilia/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "cilia/error.hpp"

namespace cilia {

using detail::require;

namespace {

// Rounding slack for points that sit on level boundaries by construction.
constexpr double kAlignTol = 1e-12;

void require_geometric(const StepPartition& part, const GeometricMeshSpec& spec) {
    spec.validate();
    require(part.m == spec.m, "reconstruction: partition size differs from mesh spec");
    for (int j = 0; j < part.m; ++j) {
        const double expected = spec.beta0 * std::pow(spec.beta, j + 1);
        require(std::abs(part.betas[j] - expected) <= 1e-9 * expected,
                "reconstruction: partition is not geometric for this mesh spec");
    }
}

}  // namespace

ReconstructionMesh build_mesh(const GeometricMeshSpec& spec, const PhysicalParams& pp, int p, int q,
                              BaseRule rule) {
    require(q >= 1, "build_mesh: q must be at least 1");
    std::vector<double> base(static_cast<std::size_t>(q) + 1);
    switch (rule) {
        case BaseRule::Uniform: {
            const double step = (1.0 - spec.beta) * pp.L / (q + 1);
            for (int i = 0; i <= q; ++i) base[i] = spec.beta * pp.L + i * step;
            break;
        }
    }
    return build_mesh_from_base(spec, pp, p, std::move(base));
}

ReconstructionMesh build_mesh_from_base(const GeometricMeshSpec& spec, const PhysicalParams& pp,
                                        int p, std::vector<double> base) {
    spec.validate();
    pp.validate();
    require(p >= 1, "build_mesh: p must be at least 1");
    require(base.size() >= 2, "build_mesh: q must be at least 1");
    require(base.front() == spec.beta * pp.L, "build_mesh: base must start at beta L");
    for (std::size_t i = 1; i < base.size(); ++i) {
        require(base[i] > base[i - 1], "build_mesh: base must be strictly ascending");
    }
    require(base.back() < pp.L, "build_mesh: base must lie below L");

    ReconstructionMesh mesh;
    mesh.p = p;
    mesh.q = static_cast<int>(base.size()) - 1;
    mesh.beta = spec.beta;
    mesh.L = pp.L;
    mesh.base = std::move(base);
    mesh.P.reserve(static_cast<std::size_t>(p) * mesh.base.size());
    mesh.P.insert(mesh.P.end(), mesh.base.begin(), mesh.base.end());
    for (int level = 2; level <= p; ++level) {
        const std::size_t prev = mesh.index(level - 1, 0);
        for (int s = 0; s <= mesh.q; ++s) mesh.P.push_back(spec.beta * mesh.P[prev + s]);
    }
    return mesh;
}

double GFunction::operator()(double t) const {
    require(std::isfinite(t) && t >= 0.0 && t <= domain_end * (1.0 + kAlignTol),
            "g: argument outside [0, beta0 L_m]");
    return eval(std::min(t, domain_end));
}

GFunction g_from_signal(const SampledSignal& sig, const StepPartition& part,
                        const GeometricMeshSpec& spec, const PhysicalParams& pp) {
    require_geometric(part, spec);
    sig.validate();
    const double horizon = part.L_m() * part.L_m();
    require(sig.times.size() >= 2, "g_from_signal: need at least two samples");
    require(sig.times.front() == 0.0, "g_from_signal: signal must start at t = 0");
    require(sig.times.back() >= horizon * (1.0 - kAlignTol),
            "g_from_signal: signal must cover [0, L_m^2]");

    // Value and bracket width of the linear interpolant at time T.
    struct Interp {
        std::vector<double> t, v;
        std::pair<double, double> operator()(double T) const {
            T = std::min(T, t.back());
            const auto it = std::lower_bound(t.begin(), t.end(), T);
            const auto i = static_cast<std::size_t>(it - t.begin());
            if (*it == T) return {v[i], 0.0};
            const double s = (T - t[i - 1]) / (t[i] - t[i - 1]);
            return {v[i - 1] + s * (v[i] - v[i - 1]), std::abs(v[i] - v[i - 1])};
        }
    };
    const Interp interp{sig.times, sig.values};

    const double scale = 1.0 / (pp.J0 * pp.F_c0());
    const auto [end_value, end_bound] = interp(horizon);
    const double beta0_sq = spec.beta0 * spec.beta0;

    GFunction g;
    g.domain_end = spec.beta0 * part.L_m();
    g.offset = end_value * scale;
    g.eval = [=](double t) { return (interp(t * t / beta0_sq).first - end_value) * scale; };
    g.error_bound = [=](double t) { return (interp(t * t / beta0_sq).second + end_bound) * scale; };
    return g;
}

GFunction g_from_current(std::function<double(double)> current, const StepPartition& part,
                         const GeometricMeshSpec& spec, const PhysicalParams& pp) {
    require_geometric(part, spec);
    const double horizon = part.L_m() * part.L_m();
    const double end_value = current(horizon);
    const double scale = 1.0 / (pp.J0 * pp.F_c0());
    const double beta0_sq = spec.beta0 * spec.beta0;

    GFunction g;
    g.domain_end = spec.beta0 * part.L_m();
    g.offset = end_value * scale;
    g.eval = [current = std::move(current), end_value, scale, beta0_sq](double t) {
        return (current(t * t / beta0_sq) - end_value) * scale;
    };
    g.error_bound = [](double) { return 0.0; };
    return g;
}

int level_of(double x, double L, double beta) {
    require(std::isfinite(x) && x > 0.0 && x < L, "level_of: x must lie in (0, L)");
    // Boundaries beta^k L count as level k even when x misses them by rounding.
    const auto below = [&](int k) { return x < std::pow(beta, k) * L * (1.0 - kAlignTol); };
    int k = std::max(1, static_cast<int>(std::ceil(std::log(x / L) / std::log(beta))));
    while (k > 1 && !below(k - 1)) --k;
    while (below(k)) ++k;
    return k;
}

double phi_recursion(const GFunction& g, const GeometricMeshSpec& spec, const StepPartition& part,
                     double x, int k_max) {
    require_geometric(part, spec);
    require(std::isfinite(x) && x > 0.0 && x < part.length, "phi_recursion: x must lie in (0, L)");
    const int k = level_of(x, part.length, spec.beta);
    if (k > k_max) {
        throw NumericalError("phi_recursion: level of x exceeds k_max", static_cast<double>(k));
    }

    const double beta_m = std::pow(spec.beta, spec.m);
    const double a_m = part.a_m();
    const int m = spec.m;
    // chain[l-1] = phi_l(x beta^{l-k}); each point lies in level l.
    std::vector<double> chain(static_cast<std::size_t>(k));
    for (int l = 1; l <= k; ++l) {
        const double y = x * std::pow(spec.beta, l - k);
        double acc = g(y / beta_m);
        for (int i = 1; i <= std::min(l - 1, m - 1); ++i) acc -= part.a[m - i - 1] * chain[l - i - 1];
        chain[l - 1] = acc / a_m;
    }
    return chain.back();
}

std::vector<double> recursion_arguments(const ReconstructionMesh& mesh,
                                        const GeometricMeshSpec& spec) {
    const double beta_m = std::pow(spec.beta, spec.m);
    std::vector<double> args(mesh.P.size());
    std::transform(mesh.P.begin(), mesh.P.end(), args.begin(), [&](double x) { return x / beta_m; });
    return args;
}

std::vector<double> recursion_sample_times(const ReconstructionMesh& mesh,
                                           const GeometricMeshSpec& spec) {
    auto times = recursion_arguments(mesh, spec);
    const double beta0_sq = spec.beta0 * spec.beta0;
    for (double& t : times) t = t * t / beta0_sq;
    return times;
}

std::vector<double> reconstruct_G(const GFunction& g, const ReconstructionMesh& mesh,
                                  const StepPartition& part, const GeometricMeshSpec& spec,
                                  unsigned threads) {
    require_geometric(part, spec);
    require(mesh.beta == spec.beta, "reconstruct_G: mesh was built for a different beta");
    const auto args = recursion_arguments(mesh, spec);
    const std::size_t n = args.size();

    std::vector<double> gvals(n);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) gvals[i] = g(args[i]);
    } else {
        std::vector<std::exception_ptr> failures(threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < threads; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t i = w; i < n; i += threads) gvals[i] = g(args[i]);
                    } catch (...) {
                        failures[w] = std::current_exception();
                    }
                });
            }
        }
        for (auto& f : failures) {
            if (f) std::rethrow_exception(f);
        }
    }

    const int m = spec.m;
    const double a_m = part.a_m();
    std::vector<double> G(n);
    for (int k = 1; k <= mesh.p; ++k) {
        for (int s = 0; s <= mesh.q; ++s) {
            double acc = gvals[mesh.index(k, s)];
            for (int i = 1; i <= std::min(k - 1, m - 1); ++i) {
                acc -= part.a[m - i - 1] * G[mesh.index(k - i, s)];
            }
            G[mesh.index(k, s)] = acc / a_m;
        }
    }
    return G;
}

DensityEstimate density_from_G(const ReconstructionMesh& mesh, const std::vector<double>& G,
                               double offset) {
    require(G.size() == mesh.P.size(), "density_from_G: G is not aligned with the mesh");
    std::vector<std::size_t> order(G.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return mesh.P[i] < mesh.P[j]; });

    DensityEstimate est;
    est.offset = offset;
    est.X.reserve(order.size());
    est.phi_tilde.reserve(order.size());
    for (auto i : order) {
        est.X.push_back(mesh.P[i]);
        est.phi_tilde.push_back(G[i]);
    }
    for (std::size_t s = 0; s + 1 < est.X.size(); ++s) {
        const double slope = (est.phi_tilde[s + 1] - est.phi_tilde[s]) / (est.X[s + 1] - est.X[s]);
        est.Y_raw.push_back(slope);
        est.Y.push_back(std::max(slope, 0.0));
    }
    return est;
}

CumulativeFn cumulative_from_estimate(const DensityEstimate& est, double L) {
    require(!est.X.empty() && est.X.back() < L, "cumulative_from_estimate: empty or invalid mesh");
    std::vector<double> xs = est.X;
    std::vector<double> cs(xs.size());
    cs.back() = est.phi_tilde.back() + est.offset;
    for (std::size_t s = xs.size() - 1; s-- > 0;) cs[s] = cs[s + 1] - est.Y[s] * (xs[s + 1] - xs[s]);
    xs.push_back(L);
    cs.push_back(est.offset);

    auto eval = [xs = std::move(xs), cs = std::move(cs)](double x) {
        if (x <= xs.front()) return cs.front();
        if (x >= xs.back()) return cs.back();
        const auto i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
        const double s = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return cs[i - 1] + s * (cs[i] - cs[i - 1]);
    };
    return {std::move(eval), L};
}

Eigen::MatrixXd assemble_matrix(const ReconstructionMesh& mesh, const StepPartition& part,
                                const GeometricMeshSpec& spec) {
    require_geometric(part, spec);
    const std::size_t n = mesh.dim();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return mesh.P[i] < mesh.P[j]; });

    auto column_of = [&](double y) {
        const auto it = std::lower_bound(order.begin(), order.end(), y,
                                         [&](std::size_t i, double v) { return mesh.P[i] < v; });
        std::size_t best = n;
        for (auto cand : {it, it == order.begin() ? it : std::prev(it)}) {
            if (cand == order.end()) continue;
            if (std::abs(mesh.P[*cand] - y) <= kAlignTol * y) best = *cand;
        }
        require(best != n, "assemble_matrix: recursion argument does not land on a mesh point");
        return best;
    };

    const auto args = recursion_arguments(mesh, spec);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (int j = 1; j <= spec.m; ++j) {
            const double y = std::pow(spec.beta, j) * args[r];
            if (y >= mesh.L * (1.0 - kAlignTol)) continue;  // phi_tilde(L) = 0
            A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(column_of(y))) += part.a[j - 1];
        }
    }
    return A;
}

MatrixDiagnostics matrix_diagnostics(const Eigen::MatrixXd& A, double a_m) {
    require(A.rows() == A.cols() && A.rows() > 0, "matrix_diagnostics: matrix must be square");
    MatrixDiagnostics d;
    d.dim = static_cast<std::size_t>(A.rows());
    d.lower_triangular = A.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero(0.0);
    d.diagonal_equals_a_m = (A.diagonal().array() == a_m).all();

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const auto& U = lu.matrixLU();
    for (Eigen::Index i = 0; i < U.rows(); ++i) d.log_abs_det += std::log(std::abs(U(i, i)));
    d.expected_log_det = static_cast<double>(d.dim) * std::log(a_m);
    d.det_relative_error = std::abs(std::expm1(d.log_abs_det - d.expected_log_det));

    const Eigen::MatrixXd inv = lu.inverse();
    const double norm_a = A.cwiseAbs().colwise().sum().maxCoeff();
    const double norm_inv = inv.cwiseAbs().colwise().sum().maxCoeff();
    d.condition_1 = norm_a * norm_inv;
    return d;
}

double recursion_gain(const StepPartition& part, int levels) {
    require(levels >= 1, "recursion_gain: levels must be positive");
    const int m = part.m;
    std::vector<double> h(static_cast<std::size_t>(levels));
    double gain = 0.0;
    for (int l = 0; l < levels; ++l) {
        double acc = l == 0 ? 1.0 : 0.0;
        for (int i = 1; i <= std::min(l, m - 1); ++i) acc -= part.a[m - i - 1] * h[l - i];
        h[l] = acc / part.a_m();
        gain += std::abs(h[l]);
    }
    return gain;
}

ConsistencyReport forward_consistency(const DensityEstimate& est, const GFunction& g,
                                      const std::function<double(double)>& input,
                                      const ReconstructionMesh& mesh, const StepPartition& part,
                                      const GeometricMeshSpec& spec, const PhysicalParams& pp) {
    const auto phi = cumulative_from_estimate(est, pp.L);
    double scale = std::abs(est.offset);
    for (double x : est.X) scale = std::max(scale, std::abs(phi(x)));
    const double JF = pp.J0 * pp.F_c0();
    const double gain = recursion_gain(part, mesh.p);
    const double rounding = 4.0 * (static_cast<double>(mesh.dim()) + gain) *
                            std::numeric_limits<double>::epsilon() * JF * scale;

    ConsistencyReport r;
    r.density_nonnegative = std::all_of(est.Y.begin(), est.Y.end(), [](double y) { return y >= 0.0; });
    const double beta0_sq = spec.beta0 * spec.beta0;
    for (double t : recursion_arguments(mesh, spec)) {
        const double T = t * t / beta0_sq;
        const double diff = std::abs(I_m_from_cumulative(phi, T, part, pp) - input(T));
        const double allowed = JF * g.error_bound(t) + rounding;
        ++r.samples;
        if (diff > allowed) ++r.violations;
        r.max_abs_diff = std::max(r.max_abs_diff, diff);
        r.max_allowed = std::max(r.max_allowed, allowed);
        r.max_excess = std::max(r.max_excess, diff - allowed);
    }
    return r;
}

}  // namespace cilia
