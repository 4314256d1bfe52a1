// Compiled with -mavx2 only; reached exclusively through the dispatch table.

#include "instrecon/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <limits>

namespace instrecon::simd {
namespace {

void dense_forward(const double* x, std::size_t rows, std::size_t in, const double* w, const double* bias,
                   std::size_t out, double* y)
{
    const std::size_t vec_end = out - out % 4;
    for (std::size_t r = 0; r < rows; ++r) {
        double* yr = y + r * out;
        const double* xr = x + r * in;
        std::size_t o = 0;
        // Register-block 16 outputs at a time.
        for (; o + 16 <= out; o += 16) {
            __m256d a0 = _mm256_loadu_pd(bias + o);
            __m256d a1 = _mm256_loadu_pd(bias + o + 4);
            __m256d a2 = _mm256_loadu_pd(bias + o + 8);
            __m256d a3 = _mm256_loadu_pd(bias + o + 12);
            for (std::size_t i = 0; i < in; ++i) {
                const __m256d xi = _mm256_set1_pd(xr[i]);
                const double* wi = w + i * out + o;
                a0 = _mm256_add_pd(a0, _mm256_mul_pd(xi, _mm256_loadu_pd(wi)));
                a1 = _mm256_add_pd(a1, _mm256_mul_pd(xi, _mm256_loadu_pd(wi + 4)));
                a2 = _mm256_add_pd(a2, _mm256_mul_pd(xi, _mm256_loadu_pd(wi + 8)));
                a3 = _mm256_add_pd(a3, _mm256_mul_pd(xi, _mm256_loadu_pd(wi + 12)));
            }
            _mm256_storeu_pd(yr + o, a0);
            _mm256_storeu_pd(yr + o + 4, a1);
            _mm256_storeu_pd(yr + o + 8, a2);
            _mm256_storeu_pd(yr + o + 12, a3);
        }
        for (; o < vec_end; o += 4) {
            __m256d a = _mm256_loadu_pd(bias + o);
            for (std::size_t i = 0; i < in; ++i) {
                a = _mm256_add_pd(a, _mm256_mul_pd(_mm256_set1_pd(xr[i]), _mm256_loadu_pd(w + i * out + o)));
            }
            _mm256_storeu_pd(yr + o, a);
        }
        for (; o < out; ++o) {
            double a = bias[o];
            for (std::size_t i = 0; i < in; ++i) {
                a = a + xr[i] * w[i * out + o];
            }
            yr[o] = a;
        }
    }
}

void dense_backward_params(const double* x, const double* dy, std::size_t rows, std::size_t in, std::size_t out,
                           double* dw, double* db)
{
    const std::size_t vec_end = out - out % 4;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * in;
        const double* dyr = dy + r * out;
        for (std::size_t i = 0; i < in; ++i) {
            const double xi_s = xr[i];
            const __m256d xi = _mm256_set1_pd(xi_s);
            double* dwi = dw + i * out;
            std::size_t o = 0;
            for (; o < vec_end; o += 4) {
                const __m256d acc = _mm256_loadu_pd(dwi + o);
                _mm256_storeu_pd(dwi + o, _mm256_add_pd(acc, _mm256_mul_pd(xi, _mm256_loadu_pd(dyr + o))));
            }
            for (; o < out; ++o) {
                dwi[o] = dwi[o] + xi_s * dyr[o];
            }
        }
        std::size_t o = 0;
        for (; o < vec_end; o += 4) {
            _mm256_storeu_pd(db + o, _mm256_add_pd(_mm256_loadu_pd(db + o), _mm256_loadu_pd(dyr + o)));
        }
        for (; o < out; ++o) {
            db[o] = db[o] + dyr[o];
        }
    }
}

void dense_backward_input(const double* dy, std::size_t rows, const double* wt, std::size_t in, std::size_t out,
                          double* dx)
{
    const std::size_t vec_end = in - in % 4;
    for (std::size_t r = 0; r < rows; ++r) {
        double* dxr = dx + r * in;
        const double* dyr = dy + r * out;
        std::fill(dxr, dxr + in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double g_s = dyr[o];
            const __m256d g = _mm256_set1_pd(g_s);
            const double* wto = wt + o * in;
            std::size_t i = 0;
            for (; i < vec_end; i += 4) {
                const __m256d acc = _mm256_loadu_pd(dxr + i);
                _mm256_storeu_pd(dxr + i, _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(wto + i), g)));
            }
            for (; i < in; ++i) {
                dxr[i] = dxr[i] + wto[i] * g_s;
            }
        }
    }
}

void nearest_sq(const double* xs, const double* ys, const double* zs, std::size_t n, const double* q,
                double* best_sq, std::size_t* best_index)
{
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const __m256d qx = _mm256_set1_pd(q[0]);
    const __m256d qy = _mm256_set1_pd(q[1]);
    const __m256d qz = _mm256_set1_pd(q[2]);
    __m256d lane_best = _mm256_set1_pd(kInf);
    __m256i lane_index = _mm256_set1_epi64x(-1);
    __m256i index = _mm256_setr_epi64x(0, 1, 2, 3);
    const __m256i step = _mm256_set1_epi64x(4);

    const std::size_t vec_end = n - n % 4;
    for (std::size_t j = 0; j < vec_end; j += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + j), qx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + j), qy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + j), qz);
        const __m256d d = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                                        _mm256_mul_pd(dz, dz));
        const __m256d better = _mm256_cmp_pd(d, lane_best, _CMP_LT_OQ);
        lane_best = _mm256_blendv_pd(lane_best, d, better);
        lane_index = _mm256_castpd_si256(
            _mm256_blendv_pd(_mm256_castsi256_pd(lane_index), _mm256_castsi256_pd(index), better));
        index = _mm256_add_epi64(index, step);
    }

    alignas(32) double values[4];
    alignas(32) long long indices[4];
    _mm256_store_pd(values, lane_best);
    _mm256_store_si256(reinterpret_cast<__m256i*>(indices), lane_index);

    double best = kInf;
    std::size_t found = 0;
    bool any = false;
    for (int lane = 0; lane < 4; ++lane) {
        if (indices[lane] < 0) {
            continue;
        }
        const auto lane_j = static_cast<std::size_t>(indices[lane]);
        if (!any || values[lane] < best || (values[lane] == best && lane_j < found)) {
            best = values[lane];
            found = lane_j;
            any = true;
        }
    }
    for (std::size_t j = vec_end; j < n; ++j) {
        const double dx = xs[j] - q[0];
        const double dy = ys[j] - q[1];
        const double dz = zs[j] - q[2];
        const double d = dx * dx + dy * dy + dz * dz;
        if (!any || d < best) {
            best = d;
            found = j;
            any = true;
        }
    }
    if (any && best < *best_sq) {
        *best_sq = best;
        *best_index = found;
    }
}

constexpr KernelTable kTable{Isa::Avx2, dense_forward, dense_backward_params, dense_backward_input, nearest_sq};

}  // namespace

namespace detail {
const KernelTable* avx2_table() noexcept { return &kTable; }
}  // namespace detail

}  // namespace instrecon::simd
