#pragma once

// Adaptive Gauss-Kronrod (G7/K15) integration with caller-supplied
// breakpoints. Panels are refined globally by largest error estimate, and
// the final sum is taken in left-to-right panel order so results do not
// depend on refinement history.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cilia/error.hpp"

namespace cilia::quad {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_panels = 4000;
};

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    int panels = 0;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T>
struct Panel {
    double a, b;
    T value;
    double error;
};

template <class T, class F>
Panel<T> kronrod15(const F& f, double a, double b) {
    using K = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = K::abscissa();
    const auto& wk = K::weights();
    const auto& wg = G::weights();

    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    const T fc = f(c);
    T kronrod = fc * wk[0];
    T gauss = fc * wg[0];
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double dx = h * xk[i];
        const T pair = f(c - dx) + f(c + dx);
        kronrod += pair * wk[i];
        if (i % 2 == 0) gauss += pair * wg[i / 2];
    }
    kronrod *= h;
    gauss *= h;
    return {a, b, kronrod, magnitude(kronrod - gauss)};
}

}  // namespace detail

/// Integrate f over [a, b], splitting first at every breakpoint strictly
/// inside (a, b). Throws NumericalError if the tolerance is not met within
/// opts.max_panels panels.
template <class T = double, class F>
Result<T> integrate(const F& f, double a, double b, std::span<const double> breakpoints = {},
                    const Options& opts = {}) {
    using cilia::detail::require;
    require(std::isfinite(a) && std::isfinite(b), "integrate: non-finite interval");
    if (a == b) return {};
    const double sign = b > a ? 1.0 : -1.0;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);

    std::vector<double> cuts{lo};
    for (double p : breakpoints) {
        if (p > lo && p < hi) cuts.push_back(p);
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<detail::Panel<T>> panels;
    panels.reserve(static_cast<std::size_t>(opts.max_panels) + cuts.size());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        panels.push_back(detail::kronrod15<T>(f, cuts[i], cuts[i + 1]));
    }

    T value{};
    double error = 0.0;
    for (const auto& p : panels) {
        value += p.value;
        error += p.error;
    }
    while (error > std::max(opts.abs_tol, opts.rel_tol * detail::magnitude(value))) {
        if (static_cast<int>(panels.size()) >= opts.max_panels) {
            throw NumericalError("integrate: tolerance not reached on [" + std::to_string(lo) +
                                     ", " + std::to_string(hi) + "], achieved error " +
                                     std::to_string(error),
                                 error);
        }
        const auto worst = static_cast<std::size_t>(
            std::max_element(panels.begin(), panels.end(),
                             [](const auto& x, const auto& y) { return x.error < y.error; }) -
            panels.begin());
        const double left = panels[worst].a;
        const double right = panels[worst].b;
        const double mid = 0.5 * (left + right);
        if (!(mid > left && mid < right)) {
            throw NumericalError("integrate: panel width reached machine resolution", error);
        }
        value -= panels[worst].value;
        error -= panels[worst].error;
        panels[worst] = detail::kronrod15<T>(f, left, mid);
        panels.push_back(detail::kronrod15<T>(f, mid, right));
        value += panels[worst].value + panels.back().value;
        error += panels[worst].error + panels.back().error;
    }

    // Final sum in left-to-right order, independent of refinement history.
    std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    value = T{};
    error = 0.0;
    for (const auto& p : panels) {
        value += p.value;
        error += p.error;
    }
    return {sign * value, error, static_cast<int>(panels.size())};
}

}  // namespace cilia::quad
