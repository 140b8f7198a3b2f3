#include <cmath>
#include <string>

#include "v2v/objective.hpp"
#include "v2v/simd/kernels.hpp"

namespace v2v::objective {
namespace {

void require_same_dim(std::size_t a, std::size_t b) {
    if (a != b) throw Error(ErrorCode::DimensionMismatch, std::to_string(a) + " vs " + std::to_string(b));
}

struct Norms {
    double true_norm;
    double pred_norm;  // floored
    double dot;
};

Norms norms(std::span<const double> y_true, std::span<const double> y_pred) {
    require_same_dim(y_true.size(), y_pred.size());
    if (y_true.empty()) throw Error(ErrorCode::EmptyInput, "loss of empty vectors");
    const auto& k = simd::active();
    const double nt = std::sqrt(k.dot(y_true.data(), y_true.data(), y_true.size()));
    if (nt < kNormFloor) throw Error(ErrorCode::ZeroNorm, "target vector has zero norm");
    const double np = std::sqrt(k.dot(y_pred.data(), y_pred.data(), y_pred.size()));
    const double dot = k.dot(y_true.data(), y_pred.data(), y_true.size());
    if (!std::isfinite(np) || !std::isfinite(dot)) throw Error(ErrorCode::NumericFailure, "prediction is not finite");
    return {nt, std::fmax(np, kNormFloor), dot};
}

}  // namespace

LossValue cosine_loss(std::span<const double> y_true, std::span<const double> y_pred) {
    const Norms s = norms(y_true, y_pred);
    const double n = static_cast<double>(y_true.size());
    return {-(s.dot / (s.true_norm * s.pred_norm)) / n, y_true.size()};
}

LossValue cosine_loss(const EmbeddingVector& y_true, const EmbeddingVector& y_pred) {
    return cosine_loss(y_true.values(), y_pred.values());
}

void cosine_loss_grad(std::span<const double> y_true, std::span<const double> y_pred, std::span<double> out) {
    const Norms s = norms(y_true, y_pred);
    if (!(s.pred_norm > kNormFloor)) throw Error(ErrorCode::ZeroNorm, "prediction has zero norm");
    require_same_dim(out.size(), y_true.size());
    const double n = static_cast<double>(y_true.size());
    const double cos = s.dot / (s.true_norm * s.pred_norm);
    const double scale = -1.0 / (n * s.pred_norm);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = y_true[i] / s.true_norm;
        const double p = y_pred[i] / s.pred_norm;
        out[i] = scale * (t - cos * p);
    }
}

EmbeddingVector cosine_loss_grad(const EmbeddingVector& y_true, const EmbeddingVector& y_pred) {
    std::vector<double> out(y_true.dim());
    cosine_loss_grad(y_true.values(), y_pred.values(), out);
    return EmbeddingVector(std::move(out));
}

double batch_loss(std::span<const std::pair<EmbeddingVector, EmbeddingVector>> pairs) {
    if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "empty batch");
    const std::size_t dim = pairs.front().first.dim();
    double sum = 0.0;
    for (const auto& [y_true, y_pred] : pairs) {
        require_same_dim(dim, y_true.dim());
        sum += cosine_loss(y_true, y_pred).value;
    }
    return sum / static_cast<double>(pairs.size());
}

double batch_loss_and_grad(const Matrix& y_true, const Matrix& y_pred, Matrix* grad) {
    if (y_true.rows() == 0) throw Error(ErrorCode::EmptyInput, "empty batch");
    if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "target and prediction batches differ in shape");
    }
    const double rows = static_cast<double>(y_true.rows());
    double sum = 0.0;
    for (std::size_t b = 0; b < y_true.rows(); ++b) {
        sum += cosine_loss(y_true.row(b), y_pred.row(b)).value;
    }
    if (grad != nullptr) {
        if (grad->rows() != y_true.rows() || grad->cols() != y_true.cols()) *grad = Matrix(y_true.rows(), y_true.cols());
        for (std::size_t b = 0; b < y_true.rows(); ++b) {
            auto g = grad->row(b);
            cosine_loss_grad(y_true.row(b), y_pred.row(b), g);
            for (auto& v : g) v /= rows;
        }
    }
    return sum / rows;
}

}  // namespace v2v::objective
