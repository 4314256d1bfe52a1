#include "instrecon/simd/kernels.hpp"

#include <algorithm>

namespace instrecon::simd {
namespace {

void dense_forward(const double* x, std::size_t rows, std::size_t in, const double* w, const double* bias,
                   std::size_t out, double* y)
{
    for (std::size_t r = 0; r < rows; ++r) {
        double* yr = y + r * out;
        const double* xr = x + r * in;
        std::copy(bias, bias + out, yr);
        for (std::size_t i = 0; i < in; ++i) {
            const double xi = xr[i];
            const double* wi = w + i * out;
            for (std::size_t o = 0; o < out; ++o) {
                yr[o] = yr[o] + xi * wi[o];
            }
        }
    }
}

void dense_backward_params(const double* x, const double* dy, std::size_t rows, std::size_t in, std::size_t out,
                           double* dw, double* db)
{
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * in;
        const double* dyr = dy + r * out;
        for (std::size_t i = 0; i < in; ++i) {
            const double xi = xr[i];
            double* dwi = dw + i * out;
            for (std::size_t o = 0; o < out; ++o) {
                dwi[o] = dwi[o] + xi * dyr[o];
            }
        }
        for (std::size_t o = 0; o < out; ++o) {
            db[o] = db[o] + dyr[o];
        }
    }
}

void dense_backward_input(const double* dy, std::size_t rows, const double* wt, std::size_t in, std::size_t out,
                          double* dx)
{
    for (std::size_t r = 0; r < rows; ++r) {
        double* dxr = dx + r * in;
        const double* dyr = dy + r * out;
        std::fill(dxr, dxr + in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double g = dyr[o];
            const double* wto = wt + o * in;
            for (std::size_t i = 0; i < in; ++i) {
                dxr[i] = dxr[i] + wto[i] * g;
            }
        }
    }
}

void nearest_sq(const double* xs, const double* ys, const double* zs, std::size_t n, const double* q,
                double* best_sq, std::size_t* best_index)
{
    double best = *best_sq;
    std::size_t index = *best_index;
    for (std::size_t j = 0; j < n; ++j) {
        const double dx = xs[j] - q[0];
        const double dy = ys[j] - q[1];
        const double dz = zs[j] - q[2];
        const double d = dx * dx + dy * dy + dz * dz;
        if (d < best) {
            best = d;
            index = j;
        }
    }
    *best_sq = best;
    *best_index = index;
}

constexpr KernelTable kTable{Isa::Scalar, dense_forward, dense_backward_params, dense_backward_input, nearest_sq};

}  // namespace

namespace detail {
const KernelTable& scalar_table() noexcept { return kTable; }
}  // namespace detail

}  // namespace instrecon::simd
