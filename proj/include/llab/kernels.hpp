/// @file kernels.hpp
/// @brief Data-parallel inner loops behind the grid operators and the flux field
/// evaluation. A scalar reference table is always present; an AVX2 table is
/// compiled on x86 and selected at runtime when the CPU supports it.
///
/// Both tables perform the same IEEE operations in the same order (including the
/// four-lane split of reductions), so their outputs are bit-identical. The
/// equivalence tests depend on this.
#pragma once

#include <cstddef>
#include <string_view>

namespace llab::kernels {

/// Coefficient of a radial map xi -> c(|xi|) xi with
/// c(r) = (r - nu)_+^lambda / r + eps * r^eps_power, and c(0) = 0.
///
/// The c(0) = 0 convention is harmless: the map sends the origin to the origin.
struct RadialCoefficient {
    double nu = 0.0;
    double lambda = 1.0;
    double eps = 0.0;
    double eps_power = 0.0;
};

struct KernelTable {
    const char* name;

    /// out[j*nx + i] = (u[j*nx + i + 1] - u[j*nx + i - 1]) * inv2h for 1 <= i <= nx-2.
    void (*centered_diff_x)(const double* u, double* out, std::size_t nx, std::size_t ny, double inv2h);

    /// out[j*nx + i] = (u[(j+1)*nx + i] - u[(j-1)*nx + i]) * inv2h for 1 <= j <= ny-2.
    void (*centered_diff_y)(const double* u, double* out, std::size_t nx, std::size_t ny, double inv2h);

    /// Euclidean norm of (gx, gy) per node; gy == nullptr means one component.
    void (*radial_norm)(const double* gx, const double* gy, double* r, std::size_t n);

    /// (ox, oy) = c(|g|) (gx, gy); gy/oy may be null for one component.
    void (*radial_map)(const double* gx, const double* gy, double* ox, double* oy, std::size_t n,
                       const RadialCoefficient& coeff);

    /// sum |v|^q accumulated in four interleaved lanes.
    double (*power_sum)(const double* v, std::size_t n, double q);
};

const KernelTable& scalar_table();

/// Null when the AVX2 variant is not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// Table used by the library. Defaults to the best available variant;
/// LLAB_SIMD=scalar in the environment pins the scalar reference.
const KernelTable& active();

/// Override the active table ("scalar" or "avx2"). Returns false if unavailable.
bool select(std::string_view name);

}  // namespace llab::kernels
