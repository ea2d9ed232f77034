// AVX2 kernel variants. Compiled with -mavx2 only; never called unless the
// dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "kernels_detail.hpp"

namespace llab::kernels::detail {

namespace {

void centered_diff_x_avx2(const double* u, double* out, std::size_t nx, std::size_t ny, double inv2h) {
    const __m256d s = _mm256_set1_pd(inv2h);
    for (std::size_t j = 0; j < ny; ++j) {
        const double* row = u + j * nx;
        double* o = out + j * nx;
        std::size_t i = 1;
        for (; i + 4 < nx; i += 4) {
            const __m256d right = _mm256_loadu_pd(row + i + 1);
            const __m256d left = _mm256_loadu_pd(row + i - 1);
            _mm256_storeu_pd(o + i, _mm256_mul_pd(_mm256_sub_pd(right, left), s));
        }
        for (; i + 1 < nx; ++i) o[i] = (row[i + 1] - row[i - 1]) * inv2h;
    }
}

void centered_diff_y_avx2(const double* u, double* out, std::size_t nx, std::size_t ny, double inv2h) {
    const __m256d s = _mm256_set1_pd(inv2h);
    for (std::size_t j = 1; j + 1 < ny; ++j) {
        const double* up = u + (j + 1) * nx;
        const double* dn = u + (j - 1) * nx;
        double* o = out + j * nx;
        std::size_t i = 0;
        for (; i + 4 <= nx; i += 4) {
            const __m256d a = _mm256_loadu_pd(up + i);
            const __m256d b = _mm256_loadu_pd(dn + i);
            _mm256_storeu_pd(o + i, _mm256_mul_pd(_mm256_sub_pd(a, b), s));
        }
        for (; i < nx; ++i) o[i] = (up[i] - dn[i]) * inv2h;
    }
}

inline __m256d abs_pd(__m256d x) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    return _mm256_andnot_pd(sign, x);
}

inline __m256d norm_pd(const double* gx, const double* gy, std::size_t k) {
    const __m256d x = _mm256_loadu_pd(gx + k);
    if (gy == nullptr) return abs_pd(x);
    const __m256d y = _mm256_loadu_pd(gy + k);
    return _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y)));
}

void radial_norm_avx2(const double* gx, const double* gy, double* r, std::size_t n) {
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) _mm256_storeu_pd(r + k, norm_pd(gx, gy, k));
    for (; k < n; ++k) r[k] = gy == nullptr ? std::fabs(gx[k]) : std::sqrt(gx[k] * gx[k] + gy[k] * gy[k]);
}

void radial_map_avx2(const double* gx, const double* gy, double* ox, double* oy, std::size_t n,
                     const RadialCoefficient& coeff) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d nu = _mm256_set1_pd(coeff.nu);
    const __m256d eps = _mm256_set1_pd(coeff.eps);
    // p = 2: every step of the coefficient is a plain IEEE operation.
    const bool linear = coeff.lambda == 1.0 && coeff.eps_power == 0.0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d r = norm_pd(gx, gy, k);
        const __m256d excess = _mm256_max_pd(_mm256_sub_pd(r, nu), zero);
        __m256d c;
        if (linear) {
            c = _mm256_add_pd(_mm256_div_pd(excess, r), eps);
            const __m256d at_origin = _mm256_cmp_pd(r, zero, _CMP_EQ_OQ);
            c = _mm256_blendv_pd(c, zero, at_origin);
        } else {
            alignas(32) double rl[4];
            alignas(32) double el[4];
            alignas(32) double cl[4];
            _mm256_store_pd(rl, r);
            _mm256_store_pd(el, excess);
            for (int l = 0; l < 4; ++l) cl[l] = radial_coefficient(rl[l], el[l], coeff);
            c = _mm256_load_pd(cl);
        }
        _mm256_storeu_pd(ox + k, _mm256_mul_pd(c, _mm256_loadu_pd(gx + k)));
        if (gy != nullptr) _mm256_storeu_pd(oy + k, _mm256_mul_pd(c, _mm256_loadu_pd(gy + k)));
    }
    for (; k < n; ++k) {
        const double r = gy == nullptr ? std::fabs(gx[k]) : std::sqrt(gx[k] * gx[k] + gy[k] * gy[k]);
        const double c = radial_coefficient(r, std::max(r - coeff.nu, 0.0), coeff);
        ox[k] = c * gx[k];
        if (gy != nullptr) oy[k] = c * gy[k];
    }
}

double power_sum_avx2(const double* v, std::size_t n, double q) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    if (q == 2.0 || q == 1.0) {
        for (; k + 4 <= n; k += 4) {
            const __m256d a = abs_pd(_mm256_loadu_pd(v + k));
            acc = _mm256_add_pd(acc, q == 2.0 ? _mm256_mul_pd(a, a) : a);
        }
    } else {
        alignas(32) double t[4];
        for (; k + 4 <= n; k += 4) {
            for (int l = 0; l < 4; ++l) t[l] = power_term(v[k + l], q);
            acc = _mm256_add_pd(acc, _mm256_load_pd(t));
        }
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (; k < n; ++k) lane[k & 3u] += power_term(v[k], q);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

const KernelTable kAvx2{
    "avx2", centered_diff_x_avx2, centered_diff_y_avx2, radial_norm_avx2, radial_map_avx2, power_sum_avx2,
};

}  // namespace

const KernelTable& avx2_kernels() { return kAvx2; }

}  // namespace llab::kernels::detail
