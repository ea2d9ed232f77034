// Scalar reference kernels and the runtime dispatcher.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string_view>

#include "kernels_detail.hpp"
#include "llab/kernels.hpp"

namespace llab::kernels {

namespace {

void centered_diff_x_scalar(const double* u, double* out, std::size_t nx, std::size_t ny, double inv2h) {
    for (std::size_t j = 0; j < ny; ++j) {
        const double* row = u + j * nx;
        double* o = out + j * nx;
        for (std::size_t i = 1; i + 1 < nx; ++i) o[i] = (row[i + 1] - row[i - 1]) * inv2h;
    }
}

void centered_diff_y_scalar(const double* u, double* out, std::size_t nx, std::size_t ny, double inv2h) {
    for (std::size_t j = 1; j + 1 < ny; ++j) {
        const double* up = u + (j + 1) * nx;
        const double* dn = u + (j - 1) * nx;
        double* o = out + j * nx;
        for (std::size_t i = 0; i < nx; ++i) o[i] = (up[i] - dn[i]) * inv2h;
    }
}

void radial_norm_scalar(const double* gx, const double* gy, double* r, std::size_t n) {
    if (gy == nullptr) {
        for (std::size_t k = 0; k < n; ++k) r[k] = std::fabs(gx[k]);
        return;
    }
    for (std::size_t k = 0; k < n; ++k) r[k] = std::sqrt(gx[k] * gx[k] + gy[k] * gy[k]);
}

void radial_map_scalar(const double* gx, const double* gy, double* ox, double* oy, std::size_t n,
                       const RadialCoefficient& coeff) {
    for (std::size_t k = 0; k < n; ++k) {
        const double r = gy == nullptr ? std::fabs(gx[k]) : std::sqrt(gx[k] * gx[k] + gy[k] * gy[k]);
        const double excess = std::max(r - coeff.nu, 0.0);
        const double c = detail::radial_coefficient(r, excess, coeff);
        ox[k] = c * gx[k];
        if (gy != nullptr) oy[k] = c * gy[k];
    }
}

double power_sum_scalar(const double* v, std::size_t n, double q) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) lane[k & 3u] += detail::power_term(v[k], q);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

const KernelTable kScalar{
    "scalar", centered_diff_x_scalar, centered_diff_y_scalar, radial_norm_scalar, radial_map_scalar, power_sum_scalar,
};

const KernelTable* initial_table() {
    const char* env = std::getenv("LLAB_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return &kScalar;
    if (const KernelTable* t = avx2_table()) return t;
    return &kScalar;
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(LLAB_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &detail::avx2_kernels() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
    if (name == "scalar") {
        current().store(&kScalar, std::memory_order_release);
        return true;
    }
    if (name == "avx2") {
        if (const KernelTable* t = avx2_table()) {
            current().store(t, std::memory_order_release);
            return true;
        }
    }
    return false;
}

}  // namespace llab::kernels
