#pragma once

// Data-parallel inner loops with a scalar reference and SIMD variants.
//
// Every variant performs the same floating-point operations in the same order
// per output element (vectorization runs across independent outputs, never
// across a reduction), so all variants are bitwise-equivalent. The project is
// compiled with -ffp-contract=off to keep it that way.

#include <cstddef>
#include <string_view>

namespace instrecon::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
    Isa isa;

    /// y[r][o] = bias[o] + sum_i x[r][i] * w[i][o]; w is input-major (in x out).
    void (*dense_forward)(const double* x, std::size_t rows, std::size_t in, const double* w, const double* bias,
                          std::size_t out, double* y);

    /// dw[i][o] += sum_r x[r][i] * dy[r][o]; db[o] += sum_r dy[r][o].
    void (*dense_backward_params)(const double* x, const double* dy, std::size_t rows, std::size_t in,
                                  std::size_t out, double* dw, double* db);

    /// dx[r][i] = sum_o w[i][o] * dy[r][o], given the transposed weights wt (out x in).
    void (*dense_backward_input)(const double* dy, std::size_t rows, const double* wt, std::size_t in,
                                 std::size_t out, double* dx);

    /// Nearest of n structure-of-arrays points to q. Updates best_sq / best_index
    /// only on strict improvement; ties keep the lowest index.
    void (*nearest_sq)(const double* xs, const double* ys, const double* zs, std::size_t n, const double* q,
                       double* best_sq, std::size_t* best_index);
};

bool isa_available(Isa isa) noexcept;

/// Kernels for a specific ISA. Throws std::invalid_argument if unavailable.
const KernelTable& kernels(Isa isa);

/// Kernels selected at first use: the widest available ISA, unless the
/// INSTRECON_ISA environment variable is set to "scalar".
const KernelTable& kernels();

namespace detail {
const KernelTable& scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;  // nullptr when not compiled in
}  // namespace detail

}  // namespace instrecon::simd
