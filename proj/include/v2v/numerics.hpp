#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "v2v/error.hpp"

namespace v2v {

/// Norms below this are treated as zero by every normalizing operation.
inline constexpr double kNormFloor = 1e-12;

/// A fixed-dimension, finite, real vector. Values are held in double; file
/// formats store them as f32.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values);
    EmbeddingVector(std::initializer_list<double> values);
    template <typename T>
    static EmbeddingVector from(std::span<const T> values) {
        return EmbeddingVector(std::vector<double>(values.begin(), values.end()));
    }
    static EmbeddingVector zeros(std::size_t dim) { return EmbeddingVector(std::vector<double>(dim, 0.0)); }

    std::size_t dim() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const double* data() const noexcept { return values_.data(); }

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    std::vector<double> values_;
};

/// Row-major dense matrix with finite entries.
template <typename T>
class BasicMatrix {
public:
    BasicMatrix() = default;
    BasicMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols, T{0}) {}
    BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> entries);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return entries_.size(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return entries_[r * cols_ + c]; }
    T operator()(std::size_t r, std::size_t c) const noexcept { return entries_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) noexcept { return {entries_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const noexcept { return {entries_.data() + r * cols_, cols_}; }

    T* data() noexcept { return entries_.data(); }
    const T* data() const noexcept { return entries_.data(); }
    std::span<T> entries() noexcept { return entries_; }
    std::span<const T> entries() const noexcept { return entries_; }

    friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> entries_;
};

using Matrix = BasicMatrix<double>;
using MatrixF = BasicMatrix<float>;

extern template class BasicMatrix<float>;
extern template class BasicMatrix<double>;

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// Unit vector in the direction of v. Throws ZeroNorm when ||v|| < kNormFloor.
EmbeddingVector l2_normalize(const EmbeddingVector& v);

/// <a,b> / (||a|| ||b||). Throws DimensionMismatch or ZeroNorm.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// W x + b. Throws DimensionMismatch when W.cols != x.dim or b.dim != W.rows.
template <typename T>
EmbeddingVector affine_map(const BasicMatrix<T>& w, const EmbeddingVector& b, const EmbeddingVector& x);

/// Entrywise arithmetic mean, summed left to right in the given order.
EmbeddingVector mean_vector(std::span<const EmbeddingVector> vs);

void require_finite(std::span<const double> values, const char* what);
void require_finite(std::span<const float> values, const char* what);

}  // namespace v2v
