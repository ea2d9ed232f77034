#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "llab/flux.hpp"
#include "llab/kernels.hpp"

namespace k = llab::kernels;

namespace {

std::vector<double> random_array(std::mt19937_64& rng, std::size_t n, double scale) {
    std::uniform_real_distribution<double> d(-scale, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    // sprinkle exact zeros so the r == 0 branch is exercised
    for (std::size_t i = 0; i < n; i += 7) v[i] = 0.0;
    return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

const k::KernelTable* vector_table() {
    const k::KernelTable* t = k::avx2_table();
    if (t == nullptr) MESSAGE("AVX2 variant unavailable on this host; equivalence checks skipped");
    return t;
}

}  // namespace

TEST_CASE("dispatcher") {
    const std::string before = k::active().name;
    CHECK(std::string(k::scalar_table().name) == "scalar");
    CHECK(k::select("scalar"));
    CHECK(std::string(k::active().name) == "scalar");
    CHECK_FALSE(k::select("neon"));
    if (k::avx2_table() != nullptr) {
        CHECK(k::select("avx2"));
        CHECK(std::string(k::active().name) == "avx2");
    }
    CHECK(k::select(before));
}

TEST_CASE("centered differences: scalar and avx2 agree bit for bit") {
    const k::KernelTable* v = vector_table();
    if (v == nullptr) return;
    const auto& s = k::scalar_table();
    std::mt19937_64 rng(1);
    for (std::size_t nx : {2u, 3u, 4u, 5u, 6u, 9u, 17u, 33u, 64u}) {
        for (std::size_t ny : {1u, 2u, 3u, 8u, 13u}) {
            const auto u = random_array(rng, nx * ny, 5.0);
            std::vector<double> a(nx * ny, -1.0), b(nx * ny, -1.0);
            s.centered_diff_x(u.data(), a.data(), nx, ny, 0.37);
            v->centered_diff_x(u.data(), b.data(), nx, ny, 0.37);
            CHECK(bit_equal(a, b));
            std::fill(a.begin(), a.end(), -1.0);
            std::fill(b.begin(), b.end(), -1.0);
            s.centered_diff_y(u.data(), a.data(), nx, ny, 0.37);
            v->centered_diff_y(u.data(), b.data(), nx, ny, 0.37);
            CHECK(bit_equal(a, b));
        }
    }
}

TEST_CASE("radial kernels: scalar and avx2 agree bit for bit") {
    const k::KernelTable* v = vector_table();
    if (v == nullptr) return;
    const auto& s = k::scalar_table();
    std::mt19937_64 rng(2);
    const k::RadialCoefficient coeffs[] = {
        {1.0, 1.0, 0.0, 0.0}, {1.0, 1.0, 0.1, 0.0}, {0.0, 1.0, 0.0, 0.0},  {0.5, 2.0, 0.01, 1.0},
        {1.0, 1.5, 0.0, 0.0}, {0.5, 3.0, 1.0, 2.0}, {0.0, 0.5, 0.2, 0.5},
    };
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 11u, 100u, 1027u}) {
        for (bool two : {false, true}) {
            const auto gx = random_array(rng, n, 3.0);
            const auto gy = random_array(rng, n, 3.0);
            const double* py = two ? gy.data() : nullptr;
            std::vector<double> ra(n), rb(n);
            s.radial_norm(gx.data(), py, ra.data(), n);
            v->radial_norm(gx.data(), py, rb.data(), n);
            CHECK(bit_equal(ra, rb));
            for (const auto& c : coeffs) {
                std::vector<double> ax(n), ay(n), bx(n), by(n);
                s.radial_map(gx.data(), py, ax.data(), two ? ay.data() : nullptr, n, c);
                v->radial_map(gx.data(), py, bx.data(), two ? by.data() : nullptr, n, c);
                CHECK(bit_equal(ax, bx));
                if (two) CHECK(bit_equal(ay, by));
            }
        }
    }
}

TEST_CASE("power sums: scalar and avx2 agree bit for bit") {
    const k::KernelTable* v = vector_table();
    if (v == nullptr) return;
    const auto& s = k::scalar_table();
    std::mt19937_64 rng(3);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 64u, 999u}) {
        const auto x = random_array(rng, n, 4.0);
        for (double q : {1.0, 2.0, 2.5, 3.0, 4.0, 1.5}) CHECK(bit_equal(s.power_sum(x.data(), n, q), v->power_sum(x.data(), n, q)));
    }
}

TEST_CASE("batched radial map matches the pointwise flux") {
    const std::string before = k::active().name;
    std::mt19937_64 rng(4);
    const std::size_t n = 513;
    const auto gx = random_array(rng, n, 3.0);
    const auto gy = random_array(rng, n, 3.0);
    for (const char* name : {"scalar", "avx2"}) {
        if (!k::select(name)) continue;
        for (double p : {2.0, 3.0, 4.0}) {
            for (double eps : {0.0, 0.01, 1.0}) {
                const llab::FluxParams prm{p, 0.8, eps};
                const k::RadialCoefficient c{prm.nu, p - 1.0, eps, p - 2.0};
                std::vector<double> ox(n), oy(n);
                k::active().radial_map(gx.data(), gy.data(), ox.data(), oy.data(), n, c);
                for (std::size_t i = 0; i < n; ++i) {
                    const auto f = llab::regularized_flux({gx[i], gy[i]}, prm);
                    CHECK(ox[i] == doctest::Approx(f[0]).epsilon(1e-13));
                    CHECK(oy[i] == doctest::Approx(f[1]).epsilon(1e-13));
                }
            }
        }
    }
    k::select(before);
}
