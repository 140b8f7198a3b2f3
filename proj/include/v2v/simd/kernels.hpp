#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2+FMA version; the table in use is chosen once at startup
// from CPUID and can be overridden with V2V_KERNELS=scalar|avx2 or
// set_active_isa(). All accumulation is in double regardless of the weight
// storage type. Within one table, results are a deterministic function of the
// inputs (fixed summation order); tables differ from each other only by
// floating-point reassociation.

#include <cstddef>
#include <string_view>

namespace v2v::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Dense-layer kernels for weight storage type T. Matrices are row-major;
/// W is out x in, activations are batch x width.
template <typename T>
struct DenseKernels {
    /// y[b, o] = bias[o] + sum_i w[o, i] * x[b, i]
    void (*affine_batch)(const T* w, const T* bias, std::size_t out, std::size_t in, const double* x,
                         std::size_t batch, double* y);
    /// gx[b, i] = sum_o g[b, o] * w[o, i]
    void (*backprop_input)(const T* w, std::size_t out, std::size_t in, const double* g, std::size_t batch,
                           double* gx);
    /// gw[o, i] = sum_b g[b, o] * x[b, i];  gb[o] = sum_b g[b, o]   (overwrites)
    void (*weight_grad)(const double* g, const double* x, std::size_t batch, std::size_t out, std::size_t in,
                        double* gw, double* gb);
    /// One bias-corrected Adam update over n parameters:
    ///   m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2;
    ///   p -= lr * (m / c1) / (sqrt(v / c2) + eps)   with c1 = 1-b1^t, c2 = 1-b2^t
    void (*adam_update)(T* p, const double* g, double* m, double* v, std::size_t n, double lr, double b1,
                        double b2, double eps, double c1, double c2);
};

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// scores[r] = dot(rows + r * dim, q) for r < n_rows
    void (*dot_rows)(const double* rows, std::size_t n_rows, std::size_t dim, const double* q, double* scores);
    DenseKernels<float> f32;
    DenseKernels<double> f64;

    template <typename T>
    const DenseKernels<T>& dense() const noexcept {
        if constexpr (sizeof(T) == sizeof(float)) return f32;
        else return f64;
    }
};

bool isa_supported(Isa isa) noexcept;

/// Table for a specific ISA; throws ConfigInvalid when the host or the build
/// lacks it.
const KernelTable& table(Isa isa);

const KernelTable& active() noexcept;
void set_active_isa(Isa isa);

/// Parses "scalar" / "avx2"; throws ConfigInvalid otherwise.
Isa parse_isa(std::string_view name);

namespace detail {
extern const KernelTable kScalarTable;
#if defined(V2V_HAVE_AVX2_KERNELS)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace v2v::simd
