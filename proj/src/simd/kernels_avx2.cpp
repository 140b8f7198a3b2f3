// AVX2 + FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and is only entered after a CPUID check. It deliberately uses
// no standard-library templates: an inline instantiation emitted here could
// be merged by the linker with one used on the generic path.

#include <immintrin.h>

#include "v2v/simd/kernels.hpp"

namespace v2v::simd {
namespace {

inline __m256d load4(const double* p) { return _mm256_loadu_pd(p); }
inline __m256d load4(const float* p) { return _mm256_cvtps_pd(_mm_loadu_ps(p)); }

inline void store4(double* p, __m256d v) { _mm256_storeu_pd(p, v); }
inline void store4(float* p, __m256d v) { _mm_storeu_ps(p, _mm256_cvtpd_ps(v)); }

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(load4(a + i), load4(b + i), acc0);
        acc1 = _mm256_fmadd_pd(load4(a + i + 4), load4(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(load4(a + i + 8), load4(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(load4(a + i + 12), load4(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(load4(a + i), load4(b + i), acc0);
    double total = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

void dot_rows(const double* rows, std::size_t n_rows, std::size_t dim, const double* q, double* scores) {
    for (std::size_t r = 0; r < n_rows; ++r) scores[r] = dot(rows + r * dim, q, dim);
}

// RO weight rows against RB activation rows; one accumulator per pair.
template <int RO, int RB, typename T>
inline void affine_block(const T* w, const T* bias, std::size_t out, std::size_t in, const double* x,
                         std::size_t o0, std::size_t b0, double* y) {
    __m256d acc[RO][RB];
    for (int r = 0; r < RO; ++r)
        for (int c = 0; c < RB; ++c) acc[r][c] = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= in; i += 4) {
        __m256d xv[RB];
        for (int c = 0; c < RB; ++c) xv[c] = load4(x + (b0 + c) * in + i);
        for (int r = 0; r < RO; ++r) {
            const __m256d wv = load4(w + (o0 + r) * in + i);
            for (int c = 0; c < RB; ++c) acc[r][c] = _mm256_fmadd_pd(wv, xv[c], acc[r][c]);
        }
    }
    for (int r = 0; r < RO; ++r) {
        const T* wo = w + (o0 + r) * in;
        for (int c = 0; c < RB; ++c) {
            const double* xb = x + (b0 + c) * in;
            double total = hsum(acc[r][c]);
            for (std::size_t t = i; t < in; ++t) total += static_cast<double>(wo[t]) * xb[t];
            y[(b0 + c) * out + o0 + r] = total + static_cast<double>(bias[o0 + r]);
        }
    }
}

template <int RO, typename T>
inline void affine_rows(const T* w, const T* bias, std::size_t out, std::size_t in, const double* x,
                        std::size_t batch, std::size_t o0, double* y) {
    std::size_t b = 0;
    for (; b + 2 <= batch; b += 2) affine_block<RO, 2>(w, bias, out, in, x, o0, b, y);
    for (; b < batch; ++b) affine_block<RO, 1>(w, bias, out, in, x, o0, b, y);
}

template <typename T>
void affine_batch(const T* w, const T* bias, std::size_t out, std::size_t in, const double* x, std::size_t batch,
                  double* y) {
    std::size_t o = 0;
    for (; o + 4 <= out; o += 4) affine_rows<4>(w, bias, out, in, x, batch, o, y);
    for (; o < out; ++o) affine_rows<1>(w, bias, out, in, x, batch, o, y);
}

// RB gradient rows times a strip of NV*4 input columns, summed over all outputs.
template <int RB, int NV, typename T>
inline void backprop_block(const T* w, std::size_t out, std::size_t in, const double* g, std::size_t b0,
                           std::size_t i0, double* gx) {
    __m256d acc[RB][NV];
    for (int r = 0; r < RB; ++r)
        for (int v = 0; v < NV; ++v) acc[r][v] = _mm256_setzero_pd();
    for (std::size_t o = 0; o < out; ++o) {
        __m256d wv[NV];
        for (int v = 0; v < NV; ++v) wv[v] = load4(w + o * in + i0 + 4 * v);
        for (int r = 0; r < RB; ++r) {
            const __m256d scale = _mm256_broadcast_sd(g + (b0 + r) * out + o);
            for (int v = 0; v < NV; ++v) acc[r][v] = _mm256_fmadd_pd(scale, wv[v], acc[r][v]);
        }
    }
    for (int r = 0; r < RB; ++r)
        for (int v = 0; v < NV; ++v) store4(gx + (b0 + r) * in + i0 + 4 * v, acc[r][v]);
}

template <int RB, typename T>
inline void backprop_rows(const T* w, std::size_t out, std::size_t in, const double* g, std::size_t b0,
                          double* gx) {
    std::size_t i = 0;
    for (; i + 8 <= in; i += 8) backprop_block<RB, 2>(w, out, in, g, b0, i, gx);
    for (; i + 4 <= in; i += 4) backprop_block<RB, 1>(w, out, in, g, b0, i, gx);
    for (; i < in; ++i) {
        for (int r = 0; r < RB; ++r) {
            double total = 0.0;
            for (std::size_t o = 0; o < out; ++o) total += g[(b0 + r) * out + o] * static_cast<double>(w[o * in + i]);
            gx[(b0 + r) * in + i] = total;
        }
    }
}

template <typename T>
void backprop_input(const T* w, std::size_t out, std::size_t in, const double* g, std::size_t batch, double* gx) {
    std::size_t b = 0;
    for (; b + 4 <= batch; b += 4) backprop_rows<4>(w, out, in, g, b, gx);
    for (; b < batch; ++b) backprop_rows<1>(w, out, in, g, b, gx);
}

// RO weight-gradient rows times a strip of NV*4 columns, summed over the batch.
template <int RO, int NV>
inline void weight_grad_block(const double* g, const double* x, std::size_t batch, std::size_t out,
                              std::size_t in, std::size_t o0, std::size_t i0, double* gw) {
    __m256d acc[RO][NV];
    for (int r = 0; r < RO; ++r)
        for (int v = 0; v < NV; ++v) acc[r][v] = _mm256_setzero_pd();
    for (std::size_t b = 0; b < batch; ++b) {
        __m256d xv[NV];
        for (int v = 0; v < NV; ++v) xv[v] = load4(x + b * in + i0 + 4 * v);
        for (int r = 0; r < RO; ++r) {
            const __m256d scale = _mm256_broadcast_sd(g + b * out + o0 + r);
            for (int v = 0; v < NV; ++v) acc[r][v] = _mm256_fmadd_pd(scale, xv[v], acc[r][v]);
        }
    }
    for (int r = 0; r < RO; ++r)
        for (int v = 0; v < NV; ++v) store4(gw + (o0 + r) * in + i0 + 4 * v, acc[r][v]);
}

template <int RO>
inline void weight_grad_rows(const double* g, const double* x, std::size_t batch, std::size_t out,
                             std::size_t in, std::size_t o0, double* gw) {
    std::size_t i = 0;
    for (; i + 8 <= in; i += 8) weight_grad_block<RO, 2>(g, x, batch, out, in, o0, i, gw);
    for (; i + 4 <= in; i += 4) weight_grad_block<RO, 1>(g, x, batch, out, in, o0, i, gw);
    for (; i < in; ++i) {
        for (int r = 0; r < RO; ++r) {
            double total = 0.0;
            for (std::size_t b = 0; b < batch; ++b) total += g[b * out + o0 + r] * x[b * in + i];
            gw[(o0 + r) * in + i] = total;
        }
    }
}

void weight_grad(const double* g, const double* x, std::size_t batch, std::size_t out, std::size_t in, double* gw,
                 double* gb) {
    std::size_t o = 0;
    for (; o + 4 <= out; o += 4) weight_grad_rows<4>(g, x, batch, out, in, o, gw);
    for (; o < out; ++o) weight_grad_rows<1>(g, x, batch, out, in, o, gw);
    for (std::size_t r = 0; r < out; ++r) {
        double total = 0.0;
        for (std::size_t b = 0; b < batch; ++b) total += g[b * out + r];
        gb[r] = total;
    }
}

// Same operation sequence as the scalar kernel (no fused multiply-add), so
// the two variants agree bitwise.
template <typename T>
void adam_update(T* p, const double* g, double* m, double* v, std::size_t n, double lr, double b1, double b2,
                 double eps, double c1, double c2) {
    const __m256d vb1 = _mm256_set1_pd(b1);
    const __m256d vb2 = _mm256_set1_pd(b2);
    const __m256d one_b1 = _mm256_set1_pd(1.0 - b1);
    const __m256d one_b2 = _mm256_set1_pd(1.0 - b2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vc1 = _mm256_set1_pd(c1);
    const __m256d vc2 = _mm256_set1_pd(c2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = load4(g + i);
        const __m256d mv = _mm256_add_pd(_mm256_mul_pd(vb1, load4(m + i)), _mm256_mul_pd(one_b1, gv));
        const __m256d vv =
            _mm256_add_pd(_mm256_mul_pd(vb2, load4(v + i)), _mm256_mul_pd(one_b2, _mm256_mul_pd(gv, gv)));
        store4(m + i, mv);
        store4(v + i, vv);
        const __m256d m_hat = _mm256_div_pd(mv, vc1);
        const __m256d v_hat = _mm256_div_pd(vv, vc2);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), veps));
        store4(p + i, _mm256_sub_pd(load4(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * (g[i] * g[i]);
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * m_hat / (__builtin_sqrt(v_hat) + eps));
    }
}

}  // namespace

namespace detail {

const KernelTable kAvx2Table{
    Isa::avx2,
    &dot,
    &dot_rows,
    DenseKernels<float>{&affine_batch<float>, &backprop_input<float>, &weight_grad, &adam_update<float>},
    DenseKernels<double>{&affine_batch<double>, &backprop_input<double>, &weight_grad, &adam_update<double>},
};

}  // namespace detail
}  // namespace v2v::simd
