#include <cmath>

#include "v2v/simd/kernels.hpp"

namespace v2v::simd {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void dot_rows(const double* rows, std::size_t n_rows, std::size_t dim, const double* q, double* scores) {
    for (std::size_t r = 0; r < n_rows; ++r) scores[r] = dot(rows + r * dim, q, dim);
}

template <typename T>
void affine_batch(const T* w, const T* bias, std::size_t out, std::size_t in, const double* x, std::size_t batch,
                  double* y) {
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xb = x + b * in;
        for (std::size_t o = 0; o < out; ++o) {
            const T* wo = w + o * in;
            double acc = 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += static_cast<double>(wo[i]) * xb[i];
            y[b * out + o] = acc + static_cast<double>(bias[o]);
        }
    }
}

template <typename T>
void backprop_input(const T* w, std::size_t out, std::size_t in, const double* g, std::size_t batch, double* gx) {
    for (std::size_t b = 0; b < batch; ++b) {
        double* gxb = gx + b * in;
        for (std::size_t i = 0; i < in; ++i) gxb[i] = 0.0;
        for (std::size_t o = 0; o < out; ++o) {
            const double scale = g[b * out + o];
            const T* wo = w + o * in;
            for (std::size_t i = 0; i < in; ++i) gxb[i] += scale * static_cast<double>(wo[i]);
        }
    }
}

void weight_grad(const double* g, const double* x, std::size_t batch, std::size_t out, std::size_t in, double* gw,
                 double* gb) {
    for (std::size_t o = 0; o < out; ++o) {
        double* gwo = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) gwo[i] = 0.0;
        double bias_acc = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const double scale = g[b * out + o];
            const double* xb = x + b * in;
            for (std::size_t i = 0; i < in; ++i) gwo[i] += scale * xb[i];
            bias_acc += scale;
        }
        gb[o] = bias_acc;
    }
}

template <typename T>
void adam_update(T* p, const double* g, double* m, double* v, std::size_t n, double lr, double b1, double b2,
                 double eps, double c1, double c2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * (g[i] * g[i]);
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * m_hat / (std::sqrt(v_hat) + eps));
    }
}

}  // namespace

namespace detail {

const KernelTable kScalarTable{
    Isa::scalar,
    &dot,
    &dot_rows,
    DenseKernels<float>{&affine_batch<float>, &backprop_input<float>, &weight_grad, &adam_update<float>},
    DenseKernels<double>{&affine_batch<double>, &backprop_input<double>, &weight_grad, &adam_update<double>},
};

}  // namespace detail
}  // namespace v2v::simd
