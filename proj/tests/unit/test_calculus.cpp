#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "llab/calculus.hpp"
#include "llab/error.hpp"

using llab::ParabolicCylinder;
using llab::ScalarField;
using llab::SpaceTimeGrid;
using llab::SpatialGrid;

namespace {

SpatialGrid square(double lo, double hi, std::size_t n) {
    return llab::make_spatial_grid(2, {lo, lo}, {hi, hi}, {n, n});
}

template <class Fn>
std::vector<double> sample(const SpatialGrid& g, Fn fn) {
    std::vector<double> v(g.node_count());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(g.coord(k, 0), g.dim == 2 ? g.coord(k, 1) : 0.0);
    return v;
}

// Random field vanishing within `margin` nodes of the boundary.
std::vector<double> compact_random(const SpatialGrid& g, std::mt19937_64& rng, std::size_t margin) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(g.node_count(), 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) {
        const std::size_t i = g.ix(k), j = g.jy(k);
        if (i < margin || j < margin || i + margin >= g.extents[0] || j + margin >= g.extents[1]) continue;
        v[k] = d(rng);
    }
    return v;
}

bool interior(const SpatialGrid& g, std::size_t k, std::size_t layers = 1) {
    const std::size_t i = g.ix(k), j = g.jy(k);
    return i >= layers && j >= layers && i + layers < g.extents[0] && j + layers < g.extents[1];
}

SpaceTimeGrid spacetime(const SpatialGrid& s, double tau, std::size_t steps) {
    SpaceTimeGrid g;
    g.space = s;
    g.tau = tau;
    g.steps = steps;
    return g;
}

}  // namespace

TEST_CASE("grid validation and budget") {
    CHECK_THROWS_AS(llab::make_spatial_grid(2, {0, 0}, {1, 1}, {1, 5}), llab::ParameterError);
    CHECK_THROWS_AS(llab::make_spatial_grid(3, {0, 0}, {1, 1}, {5, 5}), llab::ParameterError);
    CHECK_THROWS_AS(llab::make_spatial_grid(2, {0, 0}, {1, 2}, {5, 5}), llab::ParameterError);
    SpaceTimeGrid g = spacetime(square(0, 1, 5), 0.1, 10);
    CHECK_NOTHROW(g.validate());
    CHECK_THROWS_AS(g.validate(100), llab::ParameterError);
    g.tau = 0.0;
    CHECK_THROWS_AS(g.validate(), llab::ParameterError);
}

TEST_CASE("gradient is exact on affine fields and kills constants") {
    const SpatialGrid g = square(-1.0, 1.0, 17);
    const auto u = sample(g, [](double x, double y) { return 3.0 * x + 2.0 * y; });
    const auto du = llab::gradient(g, u);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
        CHECK(du.comp[0][k] == doctest::Approx(3.0).epsilon(1e-13));
        CHECK(du.comp[1][k] == doctest::Approx(2.0).epsilon(1e-13));
    }
    const std::vector<double> c(g.node_count(), 4.25);
    const auto dc = llab::gradient(g, c);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
        CHECK(dc.comp[0][k] == 0.0);
        CHECK(dc.comp[1][k] == 0.0);
    }
    const llab::VectorSlice flat{2, g.node_count()};
    llab::VectorSlice cf = flat;
    std::fill(cf.comp[0].begin(), cf.comp[0].end(), 1.5);
    std::fill(cf.comp[1].begin(), cf.comp[1].end(), -0.5);
    const auto dv = llab::divergence(g, cf);
    for (std::size_t k = 0; k < g.node_count(); ++k)
        if (interior(g, k)) CHECK(dv[k] == 0.0);
}

TEST_CASE("gradient converges at second order in the interior") {
    double errs[3];
    int idx = 0;
    for (std::size_t n : {21u, 41u, 81u}) {  // h = 0.1, 0.05, 0.025
        const SpatialGrid g = square(0.0, 2.0, n);
        const auto u = sample(g, [](double x, double) { return std::sin(x); });
        const auto du = llab::gradient(g, u);
        double e = 0.0;
        for (std::size_t k = 0; k < g.node_count(); ++k)
            if (interior(g, k)) e = std::max(e, std::fabs(du.comp[0][k] - std::cos(g.coord(k, 0))));
        errs[idx++] = e;
    }
    CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
    CHECK(std::log2(errs[1] / errs[2]) >= 1.9);
}

TEST_CASE("1D gradient and divergence") {
    const SpatialGrid g = llab::make_spatial_grid(1, {0.0, 0.0}, {1.0, 0.0}, {11, 1});
    CHECK(g.node_count() == 11);
    const auto u = sample(g, [](double x, double) { return 5.0 * x - 1.0; });
    const auto du = llab::gradient(g, u);
    for (double v : du.comp[0]) CHECK(v == doctest::Approx(5.0).epsilon(1e-13));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    llab::VectorSlice f(1, g.node_count());
    std::vector<double> w(g.node_count());
    for (auto& x : f.comp[0]) x = d(rng);
    for (auto& x : w) x = d(rng);
    const double a = llab::inner(g, llab::divergence(g, f), w);
    const double b = llab::inner(g, f, llab::gradient(g, w));
    CHECK(std::fabs(a + b) <= 1e-13 * (std::fabs(a) + std::fabs(b)));
}

TEST_CASE("summation by parts holds to round-off") {
    std::mt19937_64 rng(42);
    for (std::size_t n : {32u, 64u}) {
        const SpatialGrid g = square(0.0, 1.0, n);
        for (int s = 0; s < 100; ++s) {
            const auto u = compact_random(g, rng, 2);
            llab::VectorSlice f(2, g.node_count());
            f.comp[0] = compact_random(g, rng, 2);
            f.comp[1] = compact_random(g, rng, 2);
            const double a = llab::inner(g, llab::divergence(g, f), u);
            const double b = llab::inner(g, f, llab::gradient(g, u));
            REQUIRE(std::fabs(a + b) <= 1e-12 * (std::fabs(a) + std::fabs(b)));
        }
        // the weighted identity also holds without compact support
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        std::vector<double> u(g.node_count());
        llab::VectorSlice f(2, g.node_count());
        for (auto& x : u) x = d(rng);
        for (auto& c : f.comp)
            for (auto& x : c) x = d(rng);
        const double a = llab::inner(g, llab::divergence(g, f), u);
        const double b = llab::inner(g, f, llab::gradient(g, u));
        CHECK(std::fabs(a + b) <= 1e-12 * (std::fabs(a) + std::fabs(b)));
    }
}

TEST_CASE("divergence of an analytic gradient converges to the Laplacian") {
    double errs[3];
    int idx = 0;
    for (std::size_t n : {21u, 41u, 81u}) {
        const SpatialGrid g = square(0.0, std::numbers::pi, n);
        llab::VectorSlice f(2, g.node_count());
        for (std::size_t k = 0; k < g.node_count(); ++k) {
            const double x = g.coord(k, 0), y = g.coord(k, 1);
            f.comp[0][k] = std::cos(x) * std::sin(y);
            f.comp[1][k] = std::sin(x) * std::cos(y);
        }
        const auto dv = llab::divergence(g, f);
        double e = 0.0;
        for (std::size_t k = 0; k < g.node_count(); ++k)
            if (interior(g, k))
                e = std::max(e, std::fabs(dv[k] + 2.0 * std::sin(g.coord(k, 0)) * std::sin(g.coord(k, 1))));
        errs[idx++] = e;
    }
    CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
    CHECK(std::log2(errs[1] / errs[2]) >= 1.9);
}

TEST_CASE("difference quotients") {
    const SpatialGrid g = square(0.0, 1.0, 17);  // h = 1/16
    const auto u = sample(g, [](double x, double y) { return 0.75 * x - 2.0 * y + 1.0; });
    for (double hs : {g.h, -g.h, 2.0 * g.h, 3.0 * g.h}) {
        const auto dx = llab::difference_quotient(g, u, 0, hs);
        const auto dy = llab::difference_quotient(g, u, 1, hs);
        CHECK(dx.valid_count > 0);
        for (std::size_t k = 0; k < g.node_count(); ++k) {
            if (dx.valid[k]) CHECK(dx.values[k] == doctest::Approx(0.75).epsilon(1e-12));
            if (dy.valid[k]) CHECK(dy.values[k] == doctest::Approx(-2.0).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(llab::tau_shift(g, u, 0, 0.0), llab::AlignmentError);
    CHECK_THROWS_AS(llab::tau_shift(g, u, 0, 0.7 * g.h), llab::AlignmentError);
    CHECK_THROWS_AS(llab::tau_shift(g, u, 0, 8.0 * g.h), llab::DegenerateRegion);
    CHECK_THROWS_AS(llab::tau_shift(g, u, 2, g.h), llab::InvalidInput);
}

TEST_CASE("product rule for shifts is exact on integer data") {
    const SpatialGrid g = square(0.0, 1.0, 33);  // h = 2^-5
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> d(-50, 50);
    for (int s = 0; s < 20; ++s) {
        std::vector<double> f(g.node_count()), h(g.node_count()), fh(g.node_count());
        for (std::size_t k = 0; k < f.size(); ++k) {
            f[k] = d(rng);
            h[k] = d(rng);
            fh[k] = f[k] * h[k];
        }
        const int axis = s % 2;
        const double step = static_cast<double>(1 << (s % 3)) * g.h * (s % 4 < 2 ? 1.0 : -1.0);
        const long stride = (axis == 0 ? 1 : static_cast<long>(g.extents[0])) * std::lround(step / g.h);
        const auto dfh = llab::difference_quotient(g, fh, axis, step);
        const auto dh = llab::difference_quotient(g, h, axis, step);
        const auto df = llab::difference_quotient(g, f, axis, step);
        for (std::size_t k = 0; k < f.size(); ++k) {
            if (!dfh.valid[k]) continue;
            const double shifted_f = f[static_cast<std::size_t>(static_cast<long>(k) + stride)];
            REQUIRE(dfh.values[k] == shifted_f * dh.values[k] + h[k] * df.values[k]);
        }
    }
}

TEST_CASE("difference quotient lemma: fitted constant stable and translation bound") {
    const SpatialGrid g = square(0.0, 1.0, 129);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> a(0.5, 2.0), ph(0.0, 6.0);
    for (int s = 0; s < 5; ++s) {
        const double k1 = a(rng), k2 = a(rng), p1 = ph(rng), p2 = ph(rng);
        const auto f = sample(g, [&](double x, double y) { return std::sin(k1 * 3 * x + p1) * std::cos(k2 * 3 * y + p2); });
        double c[3];
        int idx = 0;
        for (int m : {1, 2, 4}) {
            const auto r = llab::difference_quotient_check(g, f, s % 2, m * g.h, {0.5, 0.5}, 0.3, 2.0);
            CHECK(r.translate.lhs <= r.translate.rhs * (1.0 + 1e-12));
            c[idx++] = r.shift.lhs / r.shift.rhs;
        }
        CHECK(c[1] / c[0] == doctest::Approx(1.0).epsilon(0.2));
        CHECK(c[2] / c[0] == doctest::Approx(1.0).epsilon(0.2));
    }
}

TEST_CASE("mollifier kernel normalization") {
    const SpaceTimeGrid g = spacetime(square(0.0, 1.0, 65), 0.01, 50);
    for (double eps : {0.02, 0.05, 0.1, 0.2}) {
        const auto m = llab::make_mollifier(g, eps);
        double s = 0.0;
        for (const auto& t : m.spatial) {
            CHECK(t.w >= 0.0);
            s += t.w;
        }
        CHECK(s == 1.0);
        double st = 0.0;
        for (const auto& t : m.temporal) {
            CHECK(t.w >= 0.0);
            st += t.w;
        }
        CHECK(st == 1.0);
        CHECK(m.spatial_radius <= eps);
        CHECK(m.temporal_radius <= eps);
    }
}

TEST_CASE("mollification") {
    const SpaceTimeGrid g = spacetime(square(0.0, 1.0, 41), 0.01, 60);
    ScalarField f(g, 0.0);
    for (std::size_t l = 0; l < g.levels(); ++l) {
        auto s = f.slice(l);
        for (std::size_t k = 0; k < s.size(); ++k)
            s[k] = std::sin(3.0 * g.space.coord(k, 0)) * std::exp(g.space.coord(k, 1)) * std::cos(2.0 * g.time(l));
    }
    const ScalarField same = llab::mollify(f, 0.0);
    CHECK(std::equal(same.values().begin(), same.values().end(), f.values().begin()));

    const ScalarField ones(g, 1.0);
    const ScalarField m1 = llab::mollify(ones, 0.1);
    for (std::size_t l = 10; l + 10 < g.levels(); ++l)
        for (std::size_t k = 0; k < g.space.node_count(); ++k)
            if (interior(g.space, k, 4)) CHECK(m1.at(l, k) == doctest::Approx(1.0).epsilon(1e-14));

    const ParabolicCylinder q{{0.5, 0.5}, 0.5, 0.25};
    double prev = INFINITY;
    for (double eps : {0.2, 0.1, 0.05}) {
        const ScalarField fe = llab::mollify(f, eps);
        ScalarField diff(g, 0.0);
        for (std::size_t i = 0; i < diff.values().size(); ++i) diff.mutable_values()[i] = fe.values()[i] - f.values()[i];
        const double e = llab::cylinder_norm(diff, q, 2.0);
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("cylinder realization and norms") {
    const SpaceTimeGrid g = spacetime(square(0.0, 1.0, 41), 0.01, 40);
    const ParabolicCylinder q{{0.5, 0.5}, 0.3, 0.2};
    const auto c = llab::realize(g, q);
    CHECK(c.levels.size() == 4);  // t in (0.26, 0.3]
    for (std::size_t n : c.nodes) {
        const double dx = g.space.coord(n, 0) - 0.5, dy = g.space.coord(n, 1) - 0.5;
        CHECK(dx * dx + dy * dy < 0.04);
    }
    const ScalarField one(g, 1.0);
    CHECK(llab::cylinder_norm(one, q, 1.0) == doctest::Approx(c.measure()).epsilon(1e-14));
    CHECK(llab::cylinder_norm(ScalarField(g, 0.0), q, 3.0) == 0.0);

    // indicator of the left half (x < 0.5) of the cylinder
    ScalarField half(g, 0.0);
    std::size_t count = 0;
    for (std::size_t l = 0; l < g.levels(); ++l)
        for (std::size_t n = 0; n < g.space.node_count(); ++n)
            if (g.space.coord(n, 0) < 0.5 - 1e-12) half.at(l, n) = 1.0;
    for (std::size_t n : c.nodes)
        if (g.space.coord(n, 0) < 0.5 - 1e-12) ++count;
    const double by_count = std::sqrt(static_cast<double>(count * c.levels.size()) * c.node_measure);
    CHECK(llab::cylinder_norm(half, q, 2.0) == doctest::Approx(by_count).epsilon(1e-14));
    // within one cell layer of |Q|/2
    const double layer = 2.0 * q.rho * g.space.h * g.tau * static_cast<double>(c.levels.size());
    CHECK(std::fabs(by_count * by_count - 0.5 * c.measure()) <= layer);

    CHECK(llab::sup_time_slice_norm(one, q) == doctest::Approx(std::sqrt(c.nodes.size() * c.spatial_measure)));

    CHECK_THROWS_AS(llab::realize(g, {{0.5, 0.5}, 0.3, 0.6}), llab::GeometryError);
    CHECK_THROWS_AS(llab::realize(g, {{0.1, 0.5}, 0.3, 0.2}), llab::GeometryError);
    CHECK_THROWS_AS(llab::realize(g, {{0.5 + 0.5 * g.space.h, 0.5 + 0.5 * g.space.h}, 0.3, 0.004}), llab::DegenerateRegion);
}

TEST_CASE("normalized cylinder norm is nondecreasing in q") {
    const SpaceTimeGrid g = spacetime(square(0.0, 1.0, 33), 0.01, 30);
    const ParabolicCylinder q{{0.5, 0.5}, 0.3, 0.25};
    const auto c = llab::realize(g, q);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int s = 0; s < 20; ++s) {
        ScalarField f(g, 0.0);
        for (auto& v : f.mutable_values()) v = d(rng);
        double prev = 0.0;
        for (double e : {1.0, 1.5, 2.0, 3.0, 4.0, 6.0}) {
            const double mean = llab::cylinder_integral(f, c, e) / c.measure();
            const double norm = std::pow(mean, 1.0 / e);
            CHECK(norm >= prev * (1.0 - 1e-14));
            prev = norm;
        }
    }
}

TEST_CASE("interpolation inequality check") {
    auto make = [](std::size_t n, double scale) {
        const SpaceTimeGrid g = spacetime(square(0.0, 1.0, n), 0.4 / 40.0, 40);
        ScalarField v(g, 0.0);
        for (std::size_t l = 0; l < g.levels(); ++l)
            for (std::size_t k = 0; k < g.space.node_count(); ++k) {
                const double x = g.space.coord(k, 0) - 0.5, y = g.space.coord(k, 1) - 0.5;
                const double r2 = (x * x + y * y) / 0.09;
                v.at(l, k) = r2 < 1.0 ? scale * (1.0 + g.time(l)) * std::exp(-1.0 / (1.0 - r2)) : 0.0;
            }
        return v;
    };
    const ParabolicCylinder q{{0.5, 0.5}, 0.4, 0.35};
    const auto zero = llab::interpolation_check(ScalarField(make(33, 1.0).grid(), 0.0), q, 2.0, 2.0);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);

    const auto coarse = llab::interpolation_check(make(65, 1.0), q, 2.0, 2.0);
    const auto fine = llab::interpolation_check(make(129, 1.0), q, 2.0, 2.0);
    const double c0 = coarse.lhs / coarse.rhs;
    const double c1 = fine.lhs / fine.rhs;
    CHECK(c1 / c0 == doctest::Approx(1.0).epsilon(0.3));

    const auto doubled = llab::interpolation_check(make(65, 2.0), q, 2.0, 2.0);
    const double factor = std::pow(2.0, 2.0 + 2.0 * 2.0 / 2.0);
    CHECK(doubled.lhs / coarse.lhs == doctest::Approx(factor).epsilon(1e-10));
    CHECK(doubled.rhs / coarse.rhs == doctest::Approx(factor).epsilon(1e-10));
}
