#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <doctest.h>

#include "cilia/analysis.hpp"
#include "cilia/error.hpp"

using namespace cilia;

namespace {

StepPartition default_partition(double L = 1.0) {
    PhysicalParams pp;
    pp.L = L;
    return geometric_partition({}, pp);
}

double direct_sum(double s, double gamma, const StepPartition& part) {
    std::complex<double> sum = 0.0;
    for (int j = 0; j < part.m; ++j) {
        sum += part.a[j] * std::pow(part.betas[j], -(0.5 + gamma)) * std::polar(1.0, s * std::log(part.betas[j]));
    }
    return std::abs(sum);
}

}  // namespace

TEST_CASE("Mellin symbol") {
    const auto part = default_partition();
    const double gamma = 2.0;
    double at_zero = 0.0;
    for (int j = 0; j < part.m; ++j) at_zero += part.a[j] * std::pow(part.betas[j], -(0.5 + gamma));
    CHECK(lambda_gamma(0.0, gamma, part) == doctest::Approx(at_zero).epsilon(1e-14));
    for (double s : {0.3, 7.0, 55.5}) CHECK(lambda_gamma(s, gamma, part) == doctest::Approx(direct_sum(s, gamma, part)).epsilon(1e-12));

    double tail = 0.0;
    for (int j = 0; j + 1 < part.m; ++j) tail += part.a[j] * std::pow(part.betas[j], -(gamma + 0.5));
    const double floor = part.a_m() * std::pow(part.beta_m(), -gamma - 0.5) - tail;
    for (int i = 0; i < 500; ++i) CHECK(lambda_gamma(0.37 * i, gamma, part) >= floor * (1 + 1e-12) - 1e-12 * std::abs(floor));

    PhysicalParams pp;
    const auto single = geometric_partition({0.8, 1.0, 1}, pp);
    const double expected = std::pow(0.8, -(0.5 + gamma));
    for (double s : {0.0, 1.0, 9.0}) CHECK(lambda_gamma(s, gamma, single) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(c_gamma(gamma, single, default_s_max(single), 1000).value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gamma0 bound") {
    const auto part = default_partition();
    CHECK(gamma0_bound(part) == doctest::Approx(std::log(part.a_m()) / std::log(0.8) - 0.5).epsilon(1e-9));
    CHECK(gamma0_bound(geometric_partition({0.8, 1.0, 1}, PhysicalParams{})) == -std::numeric_limits<double>::infinity());

    StepPartition heavy = part;
    heavy.a.assign(heavy.a.size(), 1e-12);
    heavy.a.back() = 1.0 - 1e-12 * (heavy.m - 1);
    CHECK(gamma0_bound(heavy) == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(gamma0_bound(heavy) > -0.5);
}

TEST_CASE("C_gamma above the analytic lower bound") {
    const auto part = default_partition();
    const double gamma = gamma0_bound(part) + 1.0;
    const double certificate = std::pow(part.beta_m(), -gamma - 0.5) *
                               (part.a_m() - std::pow(part.betas[part.m - 2] / part.beta_m(), -(gamma + 0.5)));
    CHECK(c_gamma_lower_bound(gamma, part) == doctest::Approx(certificate).epsilon(1e-12));
    CHECK(certificate > 0.0);

    const auto cg = c_gamma(gamma, part, default_s_max(part), 20000, 2);
    CHECK(cg.certified);
    CHECK(cg.value >= certificate);
    CHECK(cg.value <= cg.grid_min);
    for (const auto& [s, value] : lambda_profile(gamma, part, cg.s_max, 2001)) CHECK(cg.value <= value * (1 + 1e-14));
    CHECK(c_gamma(gamma, part, default_s_max(part), 20000, 1).value == cg.value);
    CHECK_THROWS_AS(c_gamma(gamma, part, 10.0, 10), DomainError);
}

TEST_CASE("Mellin transform") {
    const std::function<double(double)> indicator = [](double x) { return x < 1.0 ? 1.0 : 0.0; };
    for (double s : {0.5, 1.0, 2.5}) {
        const auto m = mellin_numeric(indicator, 1.0, s);
        CHECK(m.real() == doctest::Approx(1.0 / s).epsilon(1e-10));
        CHECK(std::abs(m.imag()) <= 1e-12);
    }

    const std::function<double(double)> f = [](double x) { return x < 2.0 ? (2.0 - x) * x : 0.0; };
    const double beta = 0.6;
    const std::function<double(double)> squeezed = [&f, beta](double x) { return f(beta * x); };
    for (const std::complex<double> s : {std::complex<double>(0.5, 0.0), {0.5, 3.0}, {1.5, -7.0}}) {
        const auto lhs = mellin_numeric(squeezed, 2.0 / beta, s);
        const auto rhs = std::pow(beta, -s) * mellin_numeric(f, 2.0, s);
        CHECK(std::abs(lhs - rhs) <= 1e-8 * std::abs(rhs));
    }
}

TEST_CASE("Mellin factorisation of the forward operator") {
    PhysicalParams pp;
    pp.L = 2.0;
    const auto part = geometric_partition({0.7, 1.0, 4}, pp);
    const auto phi = hill8_cumulative(0.9, pp.L);
    const double phiL = phi(pp.L);
    const std::function<double(double)> tilde = [&](double x) { return phi(x) - phiL; };
    const CumulativeFn tilde_cum{tilde, pp.L};
    const std::function<double(double)> image = [&](double t) { return Phi_m(tilde_cum, t, part); };
    MellinOptions opts;
    for (int j = 0; j < part.m; ++j) opts.kinks.push_back(part.Lk[j + 1]);
    for (const std::complex<double> s : {std::complex<double>(0.5, 0.0), {0.5, 2.0}, {1.0, -4.0}}) {
        std::complex<double> symbol = 0.0;
        for (int j = 0; j < part.m; ++j) symbol += part.a[j] * std::pow(part.betas[j], -s);
        const auto lhs = mellin_numeric(image, part.L_m(), s, opts);
        const auto rhs = symbol * mellin_numeric(tilde, pp.L, s);
        CHECK(std::abs(lhs - rhs) <= 1e-7 * std::abs(rhs));
    }
}

TEST_CASE("Plancherel on the critical line") {
    const std::vector<std::pair<std::function<double(double)>, double>> cases = {
        {[](double x) { return x < 1.0 ? 1.0 : 0.0; }, 1.0},
        {[](double x) { return x < 1.0 ? 1.0 - x : 0.0; }, std::sqrt(1.0 / 3.0)},
        {[](double x) { return x < 2.0 ? std::sin(std::numbers::pi * x / 2.0) : 0.0; }, 1.0},
    };
    for (const auto& [f, norm] : cases) CHECK(mellin_critical_line_norm(f, 2.0, 400.0) == doctest::Approx(norm).epsilon(0.01));
}

TEST_CASE("stability inequality verifiers") {
    const auto part = default_partition(1.0);
    const double gamma = gamma0_bound(part) + 1.0;
    const auto cg = c_gamma(gamma, part, default_s_max(part), 20000);

    const ContinuousFn constant{[](double) { return 0.7; }, {}};
    const auto flat = verify_stability_L2(constant, gamma, part, cg);
    CHECK(flat.lhs == 0.0);
    CHECK(flat.rhs == 0.0);
    CHECK(flat.holds);

    const ContinuousFn linear{[](double x) { return x - 1.0; }, {}};
    const auto lin = verify_stability_L2(linear, gamma, part, cg);
    CHECK(lin.margin > 0.0);
    CHECK_THROWS_AS(verify_stability_L2(linear, gamma0_bound(part) - 0.1, part, cg), DomainError);

    const GeometricMeshSpec spec;
    for (const auto family : {NormFamilySpec::lp(1), NormFamilySpec::lp(2), NormFamilySpec::linf(), NormFamilySpec::bv()}) {
        for (int k = 0; k < 4; ++k) CHECK(verify_level_stability(linear, part, spec, family, k).holds);
    }
    CHECK_THROWS_AS(verify_level_stability(linear, part, spec, NormFamilySpec::weighted(0, 1.0), 0), DomainError);
}

TEST_CASE("operator continuity and stability norms") {
    PhysicalParams pp;
    const auto part = geometric_partition({}, pp);
    const auto zero = verify_operator_stability(constant_density(0.0), 1.0, part, pp, 1e-6, 400);
    CHECK(zero.norm_I_1_gamma == 0.0);
    CHECK(zero.norm_rho_L2 == 0.0);
    CHECK(zero.norm_rho_minus1 == 0.0);
    CHECK(zero.norm_I_1_half == 0.0);

    const auto rho = hill8_density(0.5);
    const auto r = verify_operator_stability(rho, 1.0, part, pp, 1e-7, 1000);
    CHECK(std::isfinite(r.continuity_ratio));
    CHECK(r.continuity_ratio > 0.0);
    CHECK(r.continuity_ratio_refined == doctest::Approx(r.continuity_ratio).epsilon(0.01));
    CHECK(r.stability_ratio_refined == doctest::Approx(r.stability_ratio).epsilon(0.01));

    const DensityFn doubled{[&rho](double x) { return 2.0 * rho(x); }, rho.kinks};
    const auto d = verify_operator_stability(doubled, 1.0, part, pp, 1e-7, 1000);
    CHECK(d.norm_I_1_gamma == doctest::Approx(2.0 * r.norm_I_1_gamma).epsilon(1e-6));
    CHECK(d.norm_rho_minus1 == doctest::Approx(2.0 * r.norm_rho_minus1).epsilon(1e-12));
    CHECK_THROWS_AS(verify_operator_stability(rho, 0.5, part, pp), DomainError);
}

TEST_CASE("square-sum collisions") {
    const auto one = square_sum_scan(1, 30);
    CHECK(one.solutions.size() == 31);
    for (const auto& s : one.solutions) CHECK(s.n_i == std::vector<int>{s.n});
    CHECK(one.congruence_admits_solutions);

    for (const auto& scan : collision_scan(8, 12)) {
        CHECK(scan.lhs_residue_mod8 == scan.k % 8);
        CHECK(scan.residue_checked_for_all);
        if (scan.k >= 2) CHECK(scan.solutions.empty());
    }
    // multisets of size k from 13 values: C(13 + k - 1, k)
    CHECK(square_sum_scan(3, 12).multisets == 455);
    CHECK_THROWS_AS(collision_scan(9, 5), DomainError);
}
