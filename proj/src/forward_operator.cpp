#include "cilia/forward_operator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cilia/error.hpp"
#include "cilia/quadrature.hpp"

namespace cilia {

using detail::require;

void SampledSignal::validate() const {
    require(times.size() == values.size(), "SampledSignal: times and values differ in length");
    if (times.empty()) return;
    require(std::isfinite(times[0]) && times[0] >= 0.0, "SampledSignal: times must be >= 0");
    for (std::size_t i = 1; i < times.size(); ++i) {
        require(times[i] > times[i - 1], "SampledSignal: times must be strictly increasing");
    }
    for (double v : values) require(std::isfinite(v), "SampledSignal: non-finite value");
}

DensityFn constant_density(double value) {
    return {[value](double) { return value; }, {}};
}

DensityFn hill8_density(double a) {
    require(a > 0.0, "hill8_density: a must be positive");
    const double a8 = std::pow(a, 8);
    return {[a8](double x) {
                const double x7 = std::pow(x, 7);
                const double den = x7 * x + a8;
                return 8.0 * a8 * x7 / (den * den);
            },
            {}};
}

CumulativeFn hill8_cumulative(double a, double L) {
    require(a > 0.0, "hill8_cumulative: a must be positive");
    const double a8 = std::pow(a, 8);
    return {[a8](double x) {
                const double x8 = std::pow(x, 8);
                return x8 / (x8 + a8);
            },
            L};
}

namespace {

void check_table(const std::vector<double>& xs, const std::vector<double>& ys) {
    require(xs.size() == ys.size() && !xs.empty(), "piecewise-linear table: bad sizes");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        require(xs[i] > xs[i - 1], "piecewise-linear table: abscissae must increase");
    }
}

// Index i with xs[i] <= x < xs[i+1], clamped to valid segments.
std::size_t segment(const std::vector<double>& xs, double x) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return 0;
    return std::min(static_cast<std::size_t>(it - xs.begin()) - 1, xs.size() - 2);
}

}  // namespace

DensityFn piecewise_linear_density(std::vector<double> xs, std::vector<double> ys) {
    check_table(xs, ys);
    auto kinks = xs;
    auto eval = [xs = std::move(xs), ys = std::move(ys)](double x) {
        if (xs.size() == 1 || x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        const auto i = segment(xs, x);
        const double s = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return ys[i] + s * (ys[i + 1] - ys[i]);
    };
    return {std::move(eval), std::move(kinks)};
}

CumulativeFn piecewise_linear_cumulative(std::vector<double> xs, std::vector<double> ys,
                                         double L) {
    check_table(xs, ys);
    // prefix[i] = int_0^{xs[i]} rho
    std::vector<double> prefix(xs.size());
    prefix[0] = ys[0] * xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) {
        prefix[i] = prefix[i - 1] + 0.5 * (ys[i - 1] + ys[i]) * (xs[i] - xs[i - 1]);
    }
    auto eval = [xs = std::move(xs), ys = std::move(ys), prefix = std::move(prefix)](double x) {
        if (x <= xs.front()) return ys.front() * x;
        if (x >= xs.back()) return prefix.back() + ys.back() * (x - xs.back());
        const auto i = segment(xs, x);
        const double h = x - xs[i];
        const double slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        return prefix[i] + ys[i] * h + 0.5 * slope * h * h;
    };
    return {std::move(eval), L};
}

CumulativeFn cumulative_from_density(DensityFn rho, double L, double tol) {
    return {[rho = std::move(rho), L, tol](double x) { return phi_from_rho(rho, x, L, tol); }, L};
}

double phi_from_rho(const DensityFn& rho, double x, double L, double tol) {
    require(std::isfinite(x) && x >= 0.0 && x <= L, "phi_from_rho: x must lie in [0, L]");
    return quad::integrate(rho.eval, 0.0, x, rho.kinks, {.abs_tol = tol}).value;
}

double Phi_m(const CumulativeFn& phi, double t, const StepPartition& part) {
    require(std::isfinite(t) && t >= 0.0, "Phi_m: argument must be nonnegative");
    double sum = 0.0;
    for (int j = 0; j < part.m; ++j) {
        sum += part.a[j] * phi(std::min(part.length, part.betas[j] * t));
    }
    return sum;
}

double I_m_from_cumulative(const CumulativeFn& phi, double t, const StepPartition& part,
                           const PhysicalParams& pp) {
    require(std::isfinite(t) && t >= 0.0, "I_m: time must be nonnegative");
    return pp.J0 * pp.F_c0() * Phi_m(phi, std::sqrt(t), part);
}

double I_m_formula(const DensityFn& rho, double t, const StepPartition& part,
                   const PhysicalParams& pp, double tol) {
    require(std::isfinite(t) && t >= 0.0, "I_m_formula: time must be nonnegative");
    const double s = std::sqrt(t);
    // Front positions h_j, ascending for j = m..1. Integrate rho piecewise
    // between consecutive fronts and accumulate.
    double prev = 0.0;
    double cumulative = 0.0;
    double sum = 0.0;
    const double piece_tol = tol / part.m;
    for (int j = part.m - 1; j >= 0; --j) {
        const double h = std::min(pp.L, part.betas[j] * s);
        if (h > prev) {
            cumulative += quad::integrate(rho.eval, prev, h, rho.kinks, {.abs_tol = piece_tol}).value;
            prev = h;
        }
        sum += part.a[j] * cumulative;
    }
    return pp.J0 * pp.F_c0() * sum;
}

double I_m_quadrature(const DensityFn& rho, double t, const StepPartition& part,
                      const PhysicalParams& pp, double tol) {
    require(std::isfinite(t) && t > 0.0, "I_m_quadrature: time must be positive");
    std::vector<double> cuts = rho.kinks;
    const double s = std::sqrt(t);
    for (double b : part.betas) cuts.push_back(b * s);
    auto integrand = [&](double x) { return rho(x) * kernel_K_m(t, x, part, pp); };
    return pp.J0 * quad::integrate(integrand, 0.0, pp.L, cuts, {.abs_tol = tol / pp.J0}).value;
}

double I_m_derivative(const DensityFn& rho, double t, const StepPartition& part,
                      const PhysicalParams& pp) {
    require(std::isfinite(t) && t > 0.0, "I_m_derivative: time must be positive");
    const double s = std::sqrt(t);
    double sum = 0.0;
    for (int j = 0; j < part.m; ++j) {
        const double x = part.betas[j] * s;
        if (x < pp.L) sum += part.a[j] * part.betas[j] * rho(x);
    }
    return pp.J0 * pp.F_c0() * sum / (2.0 * s);
}

double I_exact(const DensityFn& rho, double t, const PhysicalParams& pp, double tol) {
    require(std::isfinite(t) && t >= 0.0, "I_exact: time must be nonnegative");
    if (t == 0.0) return 0.0;  // c(0, x) = 0 inside the cilium
    const bool short_time = pp.D * t / (pp.L * pp.L) < kShortTimeThreshold;
    auto integrand = [&](double x) {
        const double c = short_time ? w(t, x, pp) : concentration_series(t, x, pp);
        return rho(x) * hill(c, pp.hill);
    };
    return pp.J0 * quad::integrate(integrand, 0.0, pp.L, rho.kinks, {.abs_tol = tol / pp.J0}).value;
}

double PI_m(const DensityFn& rho, double t, const PolynomialKernel& pk, const PhysicalParams& pp,
            double tol) {
    require(std::isfinite(t) && t >= 0.0, "PI_m: time must be nonnegative");
    if (t == 0.0 || pk.degree() == 0) {
        // c(0, x) = 0 for x > 0, so the kernel is the constant P_m(-c0).
        const double k0 = t == 0.0 ? eval_polynomial(pk.coeffs, -pk.c0) : pk.coeffs[0];
        return k0 * phi_from_rho(rho, pp.L, pp.L, tol);
    }
    auto integrand = [&](double x) { return rho(x) * kernel_PK_m(t, x, pk, pp); };
    return quad::integrate(integrand, 0.0, pp.L, rho.kinks, {.abs_tol = tol}).value;
}

SampledSignal sample_current(const DensityFn& rho, const ForwardModel& model,
                             const std::vector<double>& time_grid, const PhysicalParams& pp,
                             double tol, unsigned threads) {
    SampledSignal out{time_grid, std::vector<double>(time_grid.size())};
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        require(std::isfinite(time_grid[i]) && time_grid[i] >= 0.0,
                "sample_current: times must be nonnegative");
        require(i == 0 || time_grid[i] > time_grid[i - 1],
                "sample_current: times must be strictly increasing");
    }

    auto eval = [&](double t) {
        return std::visit(
            [&](const auto& mdl) -> double {
                using M = std::decay_t<decltype(mdl)>;
                if constexpr (std::is_same_v<M, StepModel>) {
                    return I_m_formula(rho, t, mdl.partition, pp, tol);
                } else if constexpr (std::is_same_v<M, ExactModel>) {
                    return I_exact(rho, t, pp, tol);
                } else {
                    return PI_m(rho, t, mdl.kernel, pp, tol);
                }
            },
            model);
    };

    const std::size_t n = time_grid.size();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) out.values[i] = eval(time_grid[i]);
        return out;
    }

    std::vector<std::exception_ptr> failures(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += threads) out.values[i] = eval(time_grid[i]);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return out;
}

}  // namespace cilia
