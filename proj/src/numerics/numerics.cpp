#include "v2v/numerics.hpp"

#include <cmath>
#include <string>

#include "v2v/simd/kernels.hpp"

namespace v2v {

namespace {

template <typename T>
void check_finite(std::span<const T> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorCode::NonFinite, std::string(what) + " has a non-finite entry at " + std::to_string(i));
        }
    }
}

void require_same_dim(std::size_t a, std::size_t b) {
    if (a != b) throw Error(ErrorCode::DimensionMismatch, std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

void require_finite(std::span<const double> values, const char* what) { check_finite(values, what); }
void require_finite(std::span<const float> values, const char* what) { check_finite(values, what); }

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    require_finite(values_, "embedding vector");
}

EmbeddingVector::EmbeddingVector(std::initializer_list<double> values) : EmbeddingVector(std::vector<double>(values)) {}

template <typename T>
BasicMatrix<T>::BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows * cols) {
        throw Error(ErrorCode::ShapeMismatch, std::to_string(entries_.size()) + " entries for a " +
                                                  std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    }
    check_finite<T>(entries_, "matrix");
}

template class BasicMatrix<float>;
template class BasicMatrix<double>;

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a.size(), b.size());
    return simd::active().dot(a.data(), b.data(), a.size());
}

double l2_norm(std::span<const double> v) { return std::sqrt(simd::active().dot(v.data(), v.data(), v.size())); }

EmbeddingVector l2_normalize(const EmbeddingVector& v) {
    if (v.dim() == 0) throw Error(ErrorCode::EmptyInput, "cannot normalize an empty vector");
    const double norm = l2_norm(v.values());
    if (norm < kNormFloor) throw Error(ErrorCode::ZeroNorm, "norm " + std::to_string(norm));
    std::vector<double> out(v.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] / norm;
    return EmbeddingVector(std::move(out));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a.size(), b.size());
    const auto& k = simd::active();
    const double na = std::sqrt(k.dot(a.data(), a.data(), a.size()));
    const double nb = std::sqrt(k.dot(b.data(), b.data(), b.size()));
    if (na < kNormFloor || nb < kNormFloor) throw Error(ErrorCode::ZeroNorm, "cosine of a zero vector");
    const double c = k.dot(a.data(), b.data(), a.size()) / (na * nb);
    // Rounding can push |c| a hair past 1.
    return std::fmax(-1.0, std::fmin(1.0, c));
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    return cosine_similarity(a.values(), b.values());
}

template <typename T>
EmbeddingVector affine_map(const BasicMatrix<T>& w, const EmbeddingVector& b, const EmbeddingVector& x) {
    if (w.cols() != x.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "matrix has " + std::to_string(w.cols()) + " columns, input has dim " + std::to_string(x.dim()));
    }
    if (b.dim() != w.rows()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "matrix has " + std::to_string(w.rows()) + " rows, bias has dim " + std::to_string(b.dim()));
    }
    std::vector<double> out(w.rows());
    if constexpr (std::is_same_v<T, double>) {
        simd::active().f64.affine_batch(w.data(), b.data(), w.rows(), w.cols(), x.data(), 1, out.data());
    } else {
        // Bias stays in double: add it after the product instead of rounding it.
        std::vector<T> zero(w.rows(), T{0});
        simd::active().dense<T>().affine_batch(w.data(), zero.data(), w.rows(), w.cols(), x.data(), 1, out.data());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    }
    return EmbeddingVector(std::move(out));
}

template EmbeddingVector affine_map(const BasicMatrix<float>&, const EmbeddingVector&, const EmbeddingVector&);
template EmbeddingVector affine_map(const BasicMatrix<double>&, const EmbeddingVector&, const EmbeddingVector&);

EmbeddingVector mean_vector(std::span<const EmbeddingVector> vs) {
    if (vs.empty()) throw Error(ErrorCode::EmptyInput, "mean of an empty list");
    const std::size_t dim = vs.front().dim();
    std::vector<double> sum(dim, 0.0);
    for (const auto& v : vs) {
        require_same_dim(dim, v.dim());
        for (std::size_t i = 0; i < dim; ++i) sum[i] += v[i];
    }
    const double count = static_cast<double>(vs.size());
    for (auto& s : sum) s /= count;
    return EmbeddingVector(std::move(sum));
}

}  // namespace v2v
