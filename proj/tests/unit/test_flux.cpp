#include <cmath>
#include <random>

#include "doctest.h"
#include "llab/error.hpp"
#include "llab/flux.hpp"
#include "support.hpp"

using llab::FluxParams;
using llab::SpatialVector;

namespace {

bool same(const SpatialVector& a, const SpatialVector& b, double tol = 0.0) {
    if (a.size() != b.size()) return false;
    return testsupport::max_abs_diff(a, b) <= tol;
}

// Central differences of the flux, column by column.
llab::SmallMatrix fd_jacobian(const SpatialVector& xi, const FluxParams& prm, double step) {
    llab::SmallMatrix J;
    J.n = xi.size();
    for (std::size_t j = 0; j < xi.size(); ++j) {
        SpatialVector a = xi;
        SpatialVector b = xi;
        a[j] += step;
        b[j] -= step;
        const SpatialVector fa = llab::regularized_flux(a, prm);
        const SpatialVector fb = llab::regularized_flux(b, prm);
        for (std::size_t i = 0; i < xi.size(); ++i) J(i, j) = (fa[i] - fb[i]) / (2.0 * step);
    }
    return J;
}

double jacobian_rel_error(const llab::SmallMatrix& J, const llab::SmallMatrix& F) {
    double diff = 0.0;
    double mag = 0.0;
    for (std::size_t i = 0; i < J.n; ++i)
        for (std::size_t j = 0; j < J.n; ++j) {
            diff = std::max(diff, std::fabs(J(i, j) - F(i, j)));
            mag = std::max(mag, std::fabs(J(i, j)));
        }
    return diff / (1.0 + mag);
}

}  // namespace

TEST_CASE("h_lambda on the documented points") {
    CHECK(same(llab::h_lambda({0.0, 0.0}, 1.5, 1.0), {0.0, 0.0}));
    CHECK(same(llab::h_lambda({0.5, 0.5}, 2.0, 1.0), {0.0, 0.0}));
    CHECK(same(llab::h_lambda({2.0, 0.0}, 1.0, 1.0), {1.0, 0.0}, 1e-15));
}

TEST_CASE("h_lambda rejects bad input") {
    CHECK_THROWS_AS(llab::h_lambda({NAN, 0.0}, 1.0, 1.0), llab::InvalidInput);
    CHECK_THROWS_AS(llab::h_lambda({INFINITY, 0.0}, 1.0, 1.0), llab::InvalidInput);
    CHECK_THROWS_AS(llab::h_lambda({1.0, 0.0}, 0.0, 1.0), llab::ParameterError);
    CHECK_THROWS_AS(SpatialVector(0), llab::InvalidInput);
    CHECK_THROWS_AS(SpatialVector(4), llab::InvalidInput);
}

TEST_CASE("v_p values") {
    CHECK(same(llab::v_p({3.0, 4.0}, 2.0), {3.0, 4.0}));
    CHECK(same(llab::v_p({0.0, 0.0}, 4.0), {0.0, 0.0}));
    CHECK(same(llab::v_p({3.0, 4.0}, 4.0), {15.0, 20.0}, 1e-13));
}

TEST_CASE("regularized flux values") {
    CHECK(same(llab::regularized_flux({0.5, 0.0}, {2.0, 1.0, 0.0}), {0.0, 0.0}));
    CHECK(same(llab::regularized_flux({0.5, 0.0}, {2.0, 1.0, 0.1}), {0.05, 0.0}, 1e-16));
    CHECK(same(llab::regularized_flux({2.0, 0.0}, {3.0, 1.0, 0.0}), {1.0, 0.0}, 1e-15));
}

TEST_CASE("flux parameter validation") {
    CHECK_THROWS_AS((FluxParams{1.5, 1.0, 0.0}.validate()), llab::ParameterError);
    CHECK_THROWS_AS((FluxParams{2.0, -1.0, 0.0}.validate()), llab::ParameterError);
    CHECK_THROWS_AS((FluxParams{2.0, 1.0, 1.5}.validate()), llab::ParameterError);
    CHECK_NOTHROW((FluxParams{2.0, 0.0, 0.0}.validate()));
    CHECK_NOTHROW((FluxParams{4.0, 1.0, 1.0}.validate()));
}

TEST_CASE("jacobian at documented points") {
    const auto J = llab::regularized_flux_jacobian({2.0, 0.0}, {2.0, 1.0, 0.0});
    CHECK(J(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(J(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::fabs(J(0, 1)) < 1e-15);
    CHECK(std::fabs(J(1, 0)) < 1e-15);
    const auto F = fd_jacobian({2.0, 0.0}, {2.0, 1.0, 0.0}, 1e-6);
    CHECK(jacobian_rel_error(J, F) <= 1e-6);

    const auto K = llab::regularized_flux_jacobian({0.3, 0.4}, {2.0, 1.0, 0.2});
    CHECK(K(0, 0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(K(1, 1) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(K(0, 1) == 0.0);
}

TEST_CASE("jacobian singular points with epsilon zero") {
    CHECK_THROWS_AS(llab::regularized_flux_jacobian({0.0, 0.0}, {3.0, 1.0, 0.0}), llab::SingularPoint);
    CHECK_THROWS_AS(llab::regularized_flux_jacobian({0.6, 0.8}, {3.0, 1.0, 0.0}), llab::SingularPoint);
    CHECK_NOTHROW(llab::regularized_flux_jacobian({0.6, 0.8}, {3.0, 1.0, 0.1}));
    CHECK_NOTHROW(llab::regularized_flux_jacobian({0.0, 0.0}, {3.0, 1.0, 0.1}));
}

TEST_CASE("jacobian matches finite differences, is symmetric and PSD") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double eps_values[] = {0.01, 0.1, 1.0};
    const double p_values[] = {2.0, 3.0, 4.0};
    int checked = 0;
    for (int s = 0; s < 3000; ++s) {
        const FluxParams prm{p_values[s % 3], 0.5 + u01(rng), eps_values[(s / 3) % 3]};
        const std::size_t n = 2 + static_cast<std::size_t>(s % 2);
        SpatialVector xi = testsupport::random_vector(rng, n, 3.0);
        // keep the FD stencil off the kink sphere |xi| = nu
        if (std::fabs(xi.norm() - prm.nu) < 1e-4 || xi.norm() < 1e-4) continue;
        const auto J = llab::regularized_flux_jacobian(xi, prm);
        const auto F = fd_jacobian(xi, prm, 1e-6);
        REQUIRE(jacobian_rel_error(J, F) <= 1e-6);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) CHECK(J(i, j) == doctest::Approx(J(j, i)).epsilon(1e-14));
        // PSD: x^T J x >= -1e-10 |x|^2 for random directions
        for (int d = 0; d < 4; ++d) {
            const SpatialVector x = testsupport::random_vector(rng, n, 1.0);
            double q = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) q += x[i] * J(i, j) * x[j];
            CHECK(q >= -1e-10 * dot(x, x));
        }
        ++checked;
    }
    CHECK(checked > 2900);
}

TEST_CASE("degenerate ball gives bit-exact zero and continuity across the sphere") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int s = 0; s < 20000; ++s) {
        const double nu = u01(rng) * 2.0;
        const double lambda = 0.5 + 3.0 * u01(rng);
        SpatialVector xi = testsupport::random_vector(rng, 2 + s % 2, 3.0);
        const SpatialVector h = llab::h_lambda(xi, lambda, nu);
        const double r = xi.norm();
        if (r <= nu) {
            for (std::size_t i = 0; i < h.size(); ++i) REQUIRE(h[i] == 0.0);
        }
        const double bound = std::pow(std::max(r - nu, 0.0), lambda);
        REQUIRE(h.norm() <= bound * (1.0 + 1e-14) + 1e-300);
    }
}

TEST_CASE("rotation invariance") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
    for (int s = 0; s < 2000; ++s) {
        const double a = ang(rng);
        const double c = std::cos(a);
        const double sn = std::sin(a);
        const SpatialVector xi = testsupport::random_vector(rng, 2, 3.0);
        const SpatialVector rxi{c * xi[0] - sn * xi[1], sn * xi[0] + c * xi[1]};
        auto rot = [&](const SpatialVector& v) { return SpatialVector{c * v[0] - sn * v[1], sn * v[0] + c * v[1]}; };
        const FluxParams prm{3.0, 0.7, 0.1};
        CHECK(testsupport::max_abs_diff(llab::h_lambda(rxi, 2.5, 0.7), rot(llab::h_lambda(xi, 2.5, 0.7))) <= 1e-12);
        CHECK(testsupport::max_abs_diff(llab::v_p(rxi, 3.0), rot(llab::v_p(xi, 3.0))) <= 1e-12);
        CHECK(testsupport::max_abs_diff(llab::regularized_flux(rxi, prm), rot(llab::regularized_flux(xi, prm))) <=
              1e-12);
    }
}

TEST_CASE("half-to-full identity and squared norm of H_{p/2}") {
    std::mt19937_64 rng(5);
    for (double p : {2.5, 3.0, 4.0, 5.0}) {
        for (int s = 0; s < 2000; ++s) {
            const double nu = (s % 3) * 0.5;
            const SpatialVector xi = testsupport::random_vector(rng, 2 + s % 2, 3.0);
            const SpatialVector half = llab::h_lambda(xi, p / 2.0, nu);
            const SpatialVector full = llab::h_lambda(xi, p - 1.0, nu);
            const SpatialVector composed = llab::compose_half_to_full(half, p);
            CHECK(testsupport::max_abs_diff(full, composed) <= 1e-12 * (1.0 + full.norm()));
            const double excess = std::max(xi.norm() - nu, 0.0);
            CHECK(dot(half, half) == doctest::Approx(std::pow(excess, p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("gap pairs on trivial inputs") {
    const auto m = llab::flux_monotonicity_gap({5.0, 1.0}, {5.0, 1.0}, 3.0, 0.5);
    CHECK(m.lhs == 0.0);
    CHECK(m.rhs == 0.0);
    const auto z = llab::flux_monotonicity_gap({0.2, 0.0}, {0.0, 0.3}, 2.0, 1.0);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
    const auto l = llab::flux_lipschitz_gap({1.0, 3.0}, {1.0, 3.0}, 4.0, 1.0);
    CHECK(l.lhs == 0.0);
    CHECK(l.rhs == 0.0);
    const auto g = llab::vp_gaps({1.0, 2.0}, {1.0, 2.0}, 3.0);
    CHECK(g.mono_lhs == 0.0);
    CHECK(g.mono_rhs == 0.0);
    CHECK(g.lip_lhs == 0.0);
    CHECK(g.lip_rhs == 0.0);
}

TEST_CASE("p = 2 collapse of the gap pairs") {
    std::mt19937_64 rng(9);
    for (int s = 0; s < 1000; ++s) {
        const SpatialVector xi = testsupport::random_vector(rng, 2, 3.0);
        const SpatialVector eta = testsupport::random_vector(rng, 2, 3.0);
        const auto l = llab::flux_lipschitz_gap(xi, eta, 2.0, 1.0);
        CHECK(l.rhs == doctest::Approx(2.0 * l.lhs).epsilon(1e-14));
        const auto g = llab::vp_gaps(xi, eta, 2.0);
        const SpatialVector d = xi - eta;
        CHECK(g.mono_lhs == doctest::Approx(dot(d, d)).epsilon(1e-14));
        CHECK(g.mono_rhs == doctest::Approx(dot(d, d)).epsilon(1e-14));
    }
}

TEST_CASE("gap inequalities on random pairs") {
    std::mt19937_64 rng(13);
    for (double p : {2.0, 3.0, 4.0, 5.0}) {
        for (double nu : {0.0, 0.5, 1.0}) {
            for (std::size_t n : {2u, 3u}) {
                for (int s = 0; s < 3000; ++s) {
                    const SpatialVector xi = testsupport::random_vector(rng, n, 3.0);
                    const SpatialVector eta = testsupport::random_vector(rng, n, 3.0);
                    const auto m = llab::flux_monotonicity_gap(xi, eta, p, nu);
                    REQUIRE(m.lhs >= m.rhs - 1e-9 * (1.0 + std::fabs(m.lhs)));
                    const auto l = llab::flux_lipschitz_gap(xi, eta, p, nu);
                    REQUIRE(l.lhs <= l.rhs + 1e-9 * (1.0 + std::fabs(l.rhs)));
                    const auto g = llab::vp_gaps(xi, eta, p);
                    REQUIRE(g.mono_lhs <= g.mono_rhs + 1e-9 * (1.0 + std::fabs(g.mono_rhs)));
                    REQUIRE(g.lip_lhs <= g.lip_rhs + 1e-9 * (1.0 + std::fabs(g.lip_rhs)));
                }
            }
        }
    }
}

TEST_CASE("relative tolerance floor") {
    CHECK(llab::relative_tolerance(0.0, 1e-20) == 1e-12);
    CHECK(llab::relative_tolerance(1.0, 1e-9) == doctest::Approx(2e-9));
}
