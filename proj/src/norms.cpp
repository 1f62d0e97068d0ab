#include "cilia/norms.hpp"

#include <algorithm>
#include <cmath>

#include "cilia/error.hpp"
#include "cilia/quadrature.hpp"

namespace cilia {

using detail::require;

void PiecewiseLinear::validate() const {
    require(x.size() == y.size() && !x.empty(), "PiecewiseLinear: bad table sizes");
    for (std::size_t i = 1; i < x.size(); ++i) {
        require(x[i] >= x[i - 1], "PiecewiseLinear: abscissae must be nondecreasing");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(std::isfinite(x[i]) && std::isfinite(y[i]), "PiecewiseLinear: non-finite entry");
    }
}

namespace {

double lerp_at(const std::vector<double>& x, const std::vector<double>& y, std::size_t i, double t) {
    if (x[i + 1] == x[i]) return y[i + 1];
    const double s = (t - x[i]) / (x[i + 1] - x[i]);
    return y[i] + s * (y[i + 1] - y[i]);
}

}  // namespace

double PiecewiseLinear::operator()(double t) const {
    if (t < x.front()) return y.front();
    // Last node with x_i <= t; duplicates resolve to the right-hand value.
    const auto i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
    if (i + 1 == x.size()) return y.back();
    return lerp_at(x, y, i, t);
}

double PiecewiseLinear::left_limit(double t) const {
    if (t <= x.front()) return y.front();
    // First node with x_j >= t; duplicates resolve to the left-hand value.
    const auto j = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), t) - x.begin());
    if (j == x.size()) return y.back();
    return lerp_at(x, y, j - 1, t);
}

PiecewiseLinear PiecewiseLinear::restrict(double a, double b) const {
    require(a < b, "PiecewiseLinear::restrict: need a < b");
    PiecewiseLinear r;
    r.x.push_back(a);
    r.y.push_back((*this)(a));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > a && x[i] < b) {
            r.x.push_back(x[i]);
            r.y.push_back(y[i]);
        }
    }
    r.x.push_back(b);
    r.y.push_back(left_limit(b));
    return r;
}

PiecewiseLinear PiecewiseLinear::dilate(double lambda) const {
    require(lambda > 0.0, "PiecewiseLinear::dilate: lambda must be positive");
    PiecewiseLinear d = *this;
    for (double& t : d.x) t *= lambda;
    return d;
}

void NormFamilySpec::validate() const {
    switch (kind) {
        case NormKind::Lp:
            require(std::isfinite(p) && p >= 1.0, "NormFamilySpec: Lp needs p >= 1");
            break;
        case NormKind::Weighted:
            require(order == -1 || order == 0 || order == 1,
                    "NormFamilySpec: weighted order must be -1, 0 or 1");
            require(std::isfinite(gamma), "NormFamilySpec: gamma must be finite");
            break;
        case NormKind::Linf:
        case NormKind::BV:
            break;
    }
}

double NormFamilySpec::scaling_constant(double lambda) const {
    validate();
    require(lambda > 0.0, "scaling_constant: lambda must be positive");
    switch (kind) {
        case NormKind::Lp:
            return std::pow(lambda, 1.0 / p);
        case NormKind::Linf:
        case NormKind::BV:
            return 1.0;
        case NormKind::Weighted:
            require(order == 0 && gamma > -0.5,
                    "scaling_constant: only order-0 weighted norms with gamma > -1/2 qualify");
            return std::pow(lambda, gamma + 0.5);
    }
    return 1.0;
}

namespace {

// int_0^h |y0 + (y1 - y0) s / h|^p ds, exact.
double segment_power_integral(double h, double y0, double y1, double p) {
    if (h == 0.0) return 0.0;
    if (y0 * y1 < 0.0) {
        const double z = h * std::abs(y0) / (std::abs(y0) + std::abs(y1));
        return (z * std::pow(std::abs(y0), p) + (h - z) * std::pow(std::abs(y1), p)) / (p + 1.0);
    }
    const double hi = std::max(std::abs(y0), std::abs(y1));
    if (hi == 0.0) return 0.0;
    const double lo = std::min(std::abs(y0), std::abs(y1));
    // h hi^p (1 - r^{p+1}) / ((p + 1)(1 - r)), r = lo / hi, evaluated stably.
    double ratio = p + 1.0;
    if (lo == 0.0) {
        ratio = 1.0;
    } else if (lo < hi) {
        const double lr = std::log(lo / hi);
        ratio = std::expm1((p + 1.0) * lr) / std::expm1(lr);
    }
    return h * std::pow(hi, p) * ratio / (p + 1.0);
}

double table_norm(const PiecewiseLinear& f, const NormFamilySpec& spec) {
    switch (spec.kind) {
        case NormKind::Lp: {
            double sum = 0.0;
            for (std::size_t i = 0; i + 1 < f.x.size(); ++i) {
                sum += segment_power_integral(f.x[i + 1] - f.x[i], f.y[i], f.y[i + 1], spec.p);
            }
            return std::pow(sum, 1.0 / spec.p);
        }
        case NormKind::Linf:
        case NormKind::BV: {
            double sup = 0.0;
            double variation = 0.0;
            for (std::size_t i = 0; i < f.y.size(); ++i) {
                sup = std::max(sup, std::abs(f.y[i]));
                if (i > 0) variation += std::abs(f.y[i] - f.y[i - 1]);
            }
            return spec.kind == NormKind::Linf ? sup : sup + variation;
        }
        case NormKind::Weighted:
            break;
    }
    throw DomainError("family_norm: weighted norms are computed by weighted_norm");
}

}  // namespace

double family_norm(const PiecewiseLinear& f, const NormFamilySpec& spec, double a, double b) {
    f.validate();
    spec.validate();
    return table_norm(f.restrict(a, b), spec);
}

double family_norm(const std::function<double(double)>& f, const NormFamilySpec& spec, double a,
                   double b, std::span<const double> kinks, int samples, double tol) {
    spec.validate();
    require(a < b, "family_norm: need a < b");
    if (spec.kind == NormKind::Lp) {
        const double p = spec.p;
        auto integrand = [&](double t) { return std::pow(std::abs(f(t)), p); };
        const double v =
            quad::integrate(integrand, a, b, kinks, {.abs_tol = 0.0, .rel_tol = tol, .max_panels = 20000})
                .value;
        return std::pow(v, 1.0 / p);
    }
    require(samples >= 2, "family_norm: need at least two samples");
    PiecewiseLinear table;
    std::vector<double> xs;
    for (int i = 0; i < samples; ++i) xs.push_back(a + (b - a) * i / (samples - 1));
    for (double k : kinks) {
        if (k > a && k < b) xs.push_back(k);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    // The right end is open: sample just inside it.
    xs.back() = std::nextafter(b, a);
    for (double t : xs) {
        table.x.push_back(t);
        table.y.push_back(f(t));
    }
    return table_norm(table, spec);
}

double weighted_norm(const SmoothFn& f, int order, double gamma, double b,
                     const WeightedNormOptions& opts) {
    NormFamilySpec::weighted(order, gamma).validate();
    require(std::isfinite(b) && b > 0.0, "weighted_norm: b must be positive");
    const quad::Options qopts{.abs_tol = 0.0, .rel_tol = opts.rel_tol, .max_panels = opts.max_panels};
    auto sigma = [gamma](double x) { return std::pow(x, gamma); };

    if (order == 0) {
        auto integrand = [&](double x) {
            const double v = sigma(x) * f.value(x);
            return v * v;
        };
        return std::sqrt(quad::integrate(integrand, 0.0, b, f.kinks, qopts).value);
    }
    if (order == 1) {
        require(static_cast<bool>(f.derivative), "weighted_norm: order 1 needs a derivative");
        auto integrand = [&](double x) {
            const double s = sigma(x);
            const double v = s * f.value(x);
            const double dv = gamma * std::pow(x, gamma - 1.0) * f.value(x) + s * f.derivative(x);
            return v * v + dv * dv;
        };
        return std::sqrt(quad::integrate(integrand, 0.0, b, f.kinks, qopts).value);
    }

    // order -1: -u'' + u = sigma f with homogeneous Dirichlet data, solved
    // by the Thomas algorithm on the interior nodes.
    require(opts.grid >= 2, "weighted_norm: grid needs at least two intervals");
    const int n = opts.grid - 1;
    const double h = b / opts.grid;
    const double off = -1.0 / (h * h);
    const double diag = 2.0 / (h * h) + 1.0;
    std::vector<double> c(n), d(n);
    for (int i = 0; i < n; ++i) {
        const double x = (i + 1) * h;
        d[i] = sigma(x) * f.value(x);
    }
    c[0] = off / diag;
    d[0] /= diag;
    for (int i = 1; i < n; ++i) {
        const double denom = diag - off * c[i - 1];
        c[i] = off / denom;
        d[i] = (d[i] - off * d[i - 1]) / denom;
    }
    for (int i = n - 2; i >= 0; --i) d[i] -= c[i] * d[i + 1];

    double sum = 0.0;
    double prev = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = i < n ? d[i] : 0.0;
        const double du = (u - prev) / h;
        sum += h * (u * u + du * du);
        prev = u;
    }
    return std::sqrt(sum);
}

}  // namespace cilia
