#include <cmath>

#include <doctest.h>

#include "cilia/error.hpp"
#include "cilia/kernel_models.hpp"

using namespace cilia;

TEST_CASE("partition_from_alphas: weights telescope to one") {
    const PhysicalParams pp;
    const auto single = partition_from_alphas({0.37}, pp);
    CHECK(single.a == std::vector<double>{1.0});

    const auto two = partition_from_alphas({0.2, 0.6}, pp);
    const double F1 = hill(0.4, pp.hill);
    CHECK(F1 == doctest::Approx(0.16 / 0.41));
    CHECK(two.a[0] == doctest::Approx(F1 / hill(1.0, pp.hill)));
    CHECK(two.a[1] == doctest::Approx(1.0 - two.a[0]));
    CHECK(two.betas[0] == doctest::Approx(2.0 * erfc_inv(0.2)));
    CHECK(two.Lk == std::vector<double>{0.0, pp.L / two.betas[0], pp.L / two.betas[1]});

    CHECK_THROWS_AS(partition_from_alphas({}, pp), DomainError);
    CHECK_THROWS_AS(partition_from_alphas({0.5, 0.4}, pp), DomainError);
    CHECK_THROWS_AS(partition_from_alphas({0.5, 1.0}, pp), DomainError);
    CHECK_THROWS_AS(partition_from_alphas({0.0, 0.5}, pp), DomainError);
}

TEST_CASE("geometric_partition reproduces beta0 beta^j") {
    const PhysicalParams pp;
    const auto part = geometric_partition({0.8, 1.0, 3}, pp);
    CHECK(part.betas[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(part.betas[1] == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(part.betas[2] == doctest::Approx(0.512).epsilon(1e-12));
    CHECK(part.L_m() == doctest::Approx(1.953125).epsilon(1e-12));

    for (const GeometricMeshSpec spec : {GeometricMeshSpec{}, GeometricMeshSpec{0.5, 2.0, 5}, GeometricMeshSpec{0.95, 0.3, 20}}) {
        const PhysicalParams q{0.7, 2.0, 1.3, 2.0, {2.5, 0.6}};
        const auto p = geometric_partition(spec, q);
        double sum = 0.0;
        for (int j = 0; j < p.m; ++j) {
            CHECK(p.betas[j] == doctest::Approx(spec.beta0 * std::pow(spec.beta, j + 1)).epsilon(1e-12));
            CHECK(p.a[j] > 0.0);
            if (j > 0) {
                CHECK(p.alphas[j] > p.alphas[j - 1]);
                CHECK(p.Lk[j + 1] > p.Lk[j]);
            }
            sum += p.a[j];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p.Lk[0] == 0.0);
    }
    CHECK_THROWS_AS(geometric_partition({1.0, 1.0, 3}, pp), DomainError);
    CHECK_THROWS_AS(geometric_partition({0.5, 0.0, 3}, pp), DomainError);
    CHECK_THROWS_AS(geometric_partition({0.5, 1.0, 0}, pp), DomainError);
}

TEST_CASE("step kernel jumps at the front positions") {
    const PhysicalParams pp;
    const auto part = geometric_partition({}, pp);
    const double Fc0 = pp.F_c0();
    CHECK(w(0.3, 0.0, pp) == pp.c0);
    CHECK(w(1.0, 2.0, pp) == doctest::Approx(0.157299207050285130658779364917).epsilon(1e-15));

    CHECK(step_F_m(0.5 * part.alphas[0], part, pp) == 0.0);
    CHECK(step_F_m(part.alphas[0], part, pp) == doctest::Approx(Fc0 * part.a[0]));
    CHECK(step_F_m(pp.c0, part, pp) == doctest::Approx(Fc0));

    const double t = 2.5;
    CHECK(kernel_K_m(t, 0.0, part, pp) == doctest::Approx(Fc0));
    CHECK(kernel_K_m(t, 1.0001 * part.betas[0] * std::sqrt(t), part, pp) == 0.0);
    for (int j = 0; j < part.m; ++j) {
        const double front = part.betas[j] * std::sqrt(t);
        CHECK(w(t, front, pp) == doctest::Approx(part.alphas[j]).epsilon(1e-13));
        // The kernel drops by F(c0) a_j just past the front.
        const double inside = kernel_K_m(t, front * (1 - 1e-9), part, pp);
        const double outside = kernel_K_m(t, front * (1 + 1e-9), part, pp);
        CHECK(inside - outside == doctest::Approx(Fc0 * part.a[j]).epsilon(1e-12));
    }
}

TEST_CASE("concentration series solves the cilium diffusion problem") {
    const PhysicalParams pp{0.8, 1.5, 2.0, 1.0, {}};
    const double L = pp.L;
    for (double t : {0.05 * L * L / pp.D, 0.3, 2.0}) {
        CHECK(concentration_series(t, 0.0, pp) == pp.c0);
        // zero flux at the closed end
        const double h = 1e-5;
        CHECK(std::abs(concentration_series(t, L, pp) - concentration_series(t, L - h, pp)) / h <= 1e-4);

        // fourth-order central differences in both variables
        const auto c = [&pp](double tt, double xx) { return concentration_series(tt, xx, pp); };
        const double dt = 1e-3 * t;
        const double dx = 1e-2 * L;
        for (double x : {0.1 * L, 0.4 * L, 0.75 * L}) {
            const double ct = (-c(t + 2 * dt, x) + 8 * c(t + dt, x) - 8 * c(t - dt, x) + c(t - 2 * dt, x)) / (12 * dt);
            const double cxx = (-c(t, x + 2 * dx) + 16 * c(t, x + dx) - 30 * c(t, x) + 16 * c(t, x - dx) - c(t, x - 2 * dx)) /
                               (12 * dx * dx);
            CHECK(std::abs(ct - pp.D * cxx) <= 1e-6 * pp.c0);
        }
    }
    CHECK_THROWS_AS(concentration_series(0.1, 1.6, pp), DomainError);
}

TEST_CASE("half-space profile matches the series before the front reaches the end") {
    const PhysicalParams pp;
    for (double t : {1e-3, 3e-3, 0.01}) {
        for (double x : {0.0, 0.02, 0.1, 0.3}) {
            CHECK(std::abs(w(t, x, pp) - concentration_series(t, x, pp, 1e-15, 100000)) <= 1e-12);
        }
    }
}

TEST_CASE("polynomial kernel") {
    const PhysicalParams pp;
    const auto flat = polynomial_kernel(0, pp);
    CHECK(kernel_PK_m(0.4, 0.7, flat, pp) == doctest::Approx(pp.F_c0()));

    const auto pk = polynomial_kernel(4, pp);
    CHECK(pk.coeffs[0] == doctest::Approx(pp.F_c0()));
    CHECK(kernel_PK_m(0.4, 0.0, pk, pp) == doctest::Approx(pp.F_c0()));

    // e^{-mu_0^2 D t} < 1e-9 once t > ln(1e9) / mu_0^2
    const double mu0 = mu(0, pp.L);
    const double t = std::log(1e9) / (mu0 * mu0 * pp.D) * 1.01;
    for (double x : {0.2, 0.6, 1.0}) CHECK(std::abs(kernel_PK_m(t, x, pk, pp) - pp.F_c0()) < 1e-8);
}
