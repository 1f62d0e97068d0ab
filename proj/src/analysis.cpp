#include "cilia/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "cilia/error.hpp"
#include "cilia/quadrature.hpp"

namespace cilia {

using detail::require;

namespace {

struct Symbol {
    std::vector<double> coeff;  // a_j beta_j^{-(1/2 + gamma)}
    std::vector<double> freq;   // ln beta_j

    Symbol(double gamma, const StepPartition& part) {
        for (int j = 0; j < part.m; ++j) {
            coeff.push_back(part.a[j] * std::pow(part.betas[j], -(0.5 + gamma)));
            freq.push_back(std::log(part.betas[j]));
        }
    }

    double operator()(double s) const {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t j = 0; j < coeff.size(); ++j) {
            re += coeff[j] * std::cos(s * freq[j]);
            im += coeff[j] * std::sin(s * freq[j]);
        }
        return std::hypot(re, im);
    }
};

std::vector<double> front_kinks(const std::vector<double>& kinks, const StepPartition& part,
                                bool squared) {
    std::vector<double> out;
    for (double b : part.betas) {
        out.push_back(part.length / b);
        for (double k : kinks) out.push_back(k / b);
    }
    if (squared) {
        for (double& t : out) t *= t;
    }
    return out;
}

double Phi(const ContinuousFn& phi, const StepPartition& part, double t) {
    double sum = 0.0;
    for (int j = 0; j < part.m; ++j) sum += part.a[j] * phi.eval(std::min(part.length, part.betas[j] * t));
    return sum;
}

}  // namespace

double lambda_gamma(double s, double gamma, const StepPartition& part) {
    return Symbol(gamma, part)(s);
}

double gamma0_bound(const StepPartition& part) {
    if (part.m == 1) return -std::numeric_limits<double>::infinity();
    const double ratio = part.betas[part.m - 1] / part.betas[part.m - 2];
    return std::log(part.a_m()) / std::log(ratio) - 0.5;
}

double c_gamma_lower_bound(double gamma, const StepPartition& part) {
    const double e = gamma + 0.5;
    if (part.m == 1) return part.a[0] * std::pow(part.betas[0], -e);
    const double bm = part.betas[part.m - 1];
    const double bm1 = part.betas[part.m - 2];
    return std::pow(bm, -e) * (part.a_m() - std::pow(bm1 / bm, -e));
}

double default_s_max(const StepPartition& part) {
    if (part.m == 1) return 2.0 * std::numbers::pi;
    return 40.0 * std::numbers::pi / std::abs(std::log(part.betas.back() / part.betas.front()));
}

std::vector<std::pair<double, double>> lambda_profile(double gamma, const StepPartition& part,
                                                      double s_max, int n_samples) {
    require(s_max > 0.0 && n_samples >= 2, "lambda_profile: need s_max > 0 and two samples");
    const Symbol sym(gamma, part);
    std::vector<std::pair<double, double>> out(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const double s = s_max * i / (n_samples - 1);
        out[i] = {s, sym(s)};
    }
    return out;
}

CGammaResult c_gamma(double gamma, const StepPartition& part, double s_max, int n_samples,
                     unsigned threads) {
    require(std::isfinite(s_max) && s_max > 0.0, "c_gamma: s_max must be positive");
    require(n_samples >= 1000, "c_gamma: need at least 1000 samples");
    const Symbol sym(gamma, part);
    const double h = s_max / (n_samples - 1);
    std::vector<double> values(static_cast<std::size_t>(n_samples));

    threads = std::max(1u, threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (int i = static_cast<int>(w); i < n_samples; i += static_cast<int>(threads)) {
                    values[i] = sym(i * h);
                }
            });
        }
    }
    const auto best = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());

    CGammaResult r;
    r.s_max = s_max;
    r.samples = n_samples;
    r.spacing = h;
    r.grid_min = values[best];
    r.s_argmin = best * h;
    r.value = r.grid_min;

    // Golden-section search on the two cells around the grid minimum.
    double lo = std::max(0.0, (best - 1) * h);
    double hi = std::min(s_max, (best + 1) * h);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = sym(x1);
    double f2 = sym(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = sym(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = sym(x2);
        }
    }
    const double s_ref = f1 <= f2 ? x1 : x2;
    const double v_ref = std::min(f1, f2);
    if (v_ref < r.value) {
        r.value = v_ref;
        r.s_argmin = s_ref;
    }

    r.certified = gamma > gamma0_bound(part);
    if (r.certified) r.certificate = c_gamma_lower_bound(gamma, part);
    return r;
}

std::complex<double> mellin_numeric(const std::function<double(double)>& f, double support_end,
                                    std::complex<double> s, const MellinOptions& opts) {
    require(std::isfinite(support_end) && support_end > 0.0, "mellin_numeric: bad support");
    const double sigma = s.real();
    require(sigma > 0.0, "mellin_numeric: Re(s) must be positive");

    double fmax = 0.0;
    constexpr int probes = 2001;
    for (int i = 1; i <= probes; ++i) fmax = std::max(fmax, std::abs(f(support_end * i / probes)));
    if (fmax == 0.0) return {0.0, 0.0};

    const double b = support_end;
    const double tail_tol = 0.5 * opts.abs_tol;
    // sup|f| b^sigma e^{-sigma U} / sigma <= tail_tol, with a safety factor 2 on sup|f|.
    const double U =
        std::max(1.0, std::log(2.0 * fmax * std::pow(b, sigma) / (sigma * tail_tol)) / sigma);

    std::vector<double> cuts;
    for (double k : opts.kinks) {
        if (k > 0.0 && k < b) cuts.push_back(std::log(b / k));
    }
    const std::complex<double> scale = std::exp(s * std::log(b));
    auto integrand = [&](double u) -> std::complex<double> {
        return f(b * std::exp(-u)) * std::exp(-u * s);
    };
    const auto res = quad::integrate<std::complex<double>>(
        integrand, 0.0, U, cuts, {.abs_tol = tail_tol, .rel_tol = 0.0, .max_panels = opts.max_panels});
    return scale * res.value;
}

double mellin_critical_line_norm(const std::function<double(double)>& f, double support_end,
                                 double S, const MellinOptions& opts) {
    require(S > 0.0, "mellin_critical_line_norm: S must be positive");
    auto power = [&](double tau) { return std::norm(mellin_numeric(f, support_end, {0.5, tau}, opts)); };
    // |M[f](1/2 + i tau)| is even in tau for real f.
    const double half =
        quad::integrate(power, 0.0, S, {}, {.abs_tol = 0.0, .rel_tol = 1e-8, .max_panels = 4000}).value;
    return std::sqrt(half / std::numbers::pi);
}

Margin verify_stability_L2(const ContinuousFn& phi, double gamma, const StepPartition& part,
                           const CGammaResult& cg, double rel_tol) {
    require(gamma > gamma0_bound(part), "verify_stability_L2: gamma must exceed gamma0_bound");
    const double L = part.length;
    const double L_m = part.L_m();
    const double phi_L = phi.eval(L);
    const WeightedNormOptions wopts{.rel_tol = rel_tol};

    const SmoothFn left{[&](double x) { return phi.eval(x) - phi_L; }, {}, phi.kinks};
    const double left_norm = weighted_norm(left, 0, gamma, L, wopts);

    const double at_horizon = Phi(phi, part, L_m);
    const SmoothFn right{[&](double t) { return Phi(phi, part, t) - at_horizon; }, {},
                         front_kinks(phi.kinks, part, false)};
    const double right_norm = weighted_norm(right, 0, gamma, L_m, wopts);

    Margin m;
    m.lhs = cg.value * left_norm;
    m.rhs = right_norm;
    m.margin = m.rhs - m.lhs;
    m.holds = m.margin >= -kMarginTolerance * m.rhs;
    return m;
}

Margin verify_level_stability(const ContinuousFn& phi, const StepPartition& part,
                              const GeometricMeshSpec& spec, const NormFamilySpec& family, int k) {
    require(family.kind != NormKind::Weighted, "verify_level_stability: interval families only");
    require(k >= 0, "verify_level_stability: k must be nonnegative");
    spec.validate();
    const double L = part.length;
    const double L_m = part.L_m();
    const double phi_L = phi.eval(L);
    const double bk = std::pow(spec.beta, k);
    const double constant = family.scaling_constant(spec.beta0) *
                            family.scaling_constant(std::pow(spec.beta, spec.m)) /
                            std::pow(part.a_m(), k + 1);

    const double left = family_norm([&](double x) { return phi.eval(x) - phi_L; }, family,
                                    spec.beta * bk * L, bk * L, phi.kinks);
    const double at_horizon = Phi(phi, part, L_m);
    const auto kinks = front_kinks(phi.kinks, part, false);
    const double right = family_norm([&](double t) { return Phi(phi, part, t) - at_horizon; }, family,
                                     spec.beta * bk * L_m, L_m, kinks);

    Margin m;
    m.lhs = left;
    m.rhs = constant * right;
    m.margin = m.rhs - m.lhs;
    m.holds = m.margin >= -kMarginTolerance * m.rhs;
    return m;
}

OperatorStabilityReport verify_operator_stability(const DensityFn& rho, double gamma,
                                                  const StepPartition& part, const PhysicalParams& pp,
                                                  double rel_tol, int grid) {
    require(gamma >= 0.75, "verify_operator_stability: gamma must be at least 3/4");
    const double horizon = part.L_m() * part.L_m();
    const auto t_kinks = front_kinks(rho.kinks, part, true);

    auto norms = [&](double tol, int n, OperatorStabilityReport& r, bool refined) {
        const double inner = 1e-3 * tol;
        const SmoothFn current{
            [&, inner](double t) { return I_m_formula(rho, t, part, pp, inner); },
            [&](double t) { return I_m_derivative(rho, t, part, pp); }, t_kinks};
        const SmoothFn density{rho.eval, {}, rho.kinks};
        const WeightedNormOptions w{.rel_tol = tol, .grid = n};

        const double n1 = weighted_norm(current, 1, gamma, horizon, w);
        const double n2 = weighted_norm(density, 0, 0.0, pp.L, w);
        const double n3 = weighted_norm(density, -1, gamma + 1.0, pp.L, w);
        const double n4 = weighted_norm(current, 1, gamma / 2.0 - 0.25, horizon, w);
        const double c = n2 > 0.0 ? n1 / n2 : 0.0;
        const double s = n4 > 0.0 ? n3 / n4 : 0.0;
        if (refined) {
            r.continuity_ratio_refined = c;
            r.stability_ratio_refined = s;
        } else {
            r.norm_I_1_gamma = n1;
            r.norm_rho_L2 = n2;
            r.norm_rho_minus1 = n3;
            r.norm_I_1_half = n4;
            r.continuity_ratio = c;
            r.stability_ratio = s;
        }
    };

    OperatorStabilityReport r;
    r.gamma = gamma;
    norms(rel_tol, grid, r, false);
    norms(rel_tol * 1e-2, 2 * grid, r, true);
    return r;
}

namespace {

struct Enumerator {
    int k;
    int n_max;
    std::vector<std::int64_t> weight;  // 4 (n^2 + n)
    std::vector<int> current;
    SquareSumScan* out;

    void run(int depth, int start, std::int64_t partial) {
        if (depth == k) {
            const std::int64_t lhs = k + partial;
            ++out->multisets;
            if (lhs % 8 != out->lhs_residue_mod8) out->residue_checked_for_all = false;
            // lhs = (2n + 1)^2 for some n >= 0?
            auto root = static_cast<std::int64_t>(std::sqrt(static_cast<double>(lhs)));
            while (root * root > lhs) --root;
            while ((root + 1) * (root + 1) <= lhs) ++root;
            if (root * root == lhs && root % 2 == 1) {
                out->solutions.push_back({current, static_cast<int>((root - 1) / 2), lhs});
            }
            return;
        }
        for (int n = start; n <= n_max; ++n) {
            current[depth] = n;
            run(depth + 1, n, partial + weight[n]);
        }
    }
};

}  // namespace

SquareSumScan square_sum_scan(int k, int n_max) {
    require(k >= 1 && k <= 8, "square_sum_scan: k must lie in 1..8");
    require(n_max >= 1, "square_sum_scan: n_max must be positive");
    SquareSumScan scan;
    scan.k = k;
    scan.n_max = n_max;
    scan.lhs_residue_mod8 = k % 8;
    scan.residue_checked_for_all = true;
    scan.congruence_admits_solutions = k % 8 == 1;

    Enumerator e{k, n_max, {}, std::vector<int>(static_cast<std::size_t>(k)), &scan};
    for (std::int64_t n = 0; n <= n_max; ++n) e.weight.push_back(4 * (n * n + n));
    e.run(0, 0, 0);
    return scan;
}

std::vector<SquareSumScan> collision_scan(int k_max, int n_max) {
    require(k_max >= 1 && k_max <= 8, "collision_scan: k_max must lie in 1..8");
    std::vector<SquareSumScan> out;
    for (int k = 1; k <= k_max; ++k) out.push_back(square_sum_scan(k, n_max));
    return out;
}

}  // namespace cilia
