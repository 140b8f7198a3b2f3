#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "v2v/nn.hpp"
#include "v2v/numerics.hpp"

namespace v2v::objective {

/// The training objective: the negated mean over the N output coordinates of
/// the elementwise product of the two L2-normalized vectors, i.e.
/// value = -cos(y_true, y_pred) / N.
struct LossValue {
    double value = 0.0;
    std::size_t n = 0;
};

/// Throws DimensionMismatch, or ZeroNorm when ||y_true|| < kNormFloor.
/// ||y_pred|| is floored at kNormFloor instead of raising.
LossValue cosine_loss(std::span<const double> y_true, std::span<const double> y_pred);
LossValue cosine_loss(const EmbeddingVector& y_true, const EmbeddingVector& y_pred);

/// dLoss/dy_pred = -(1/N) (t - (t.p) p) / ||y_pred||, t and p the unit vectors.
/// Requires ||y_pred|| > kNormFloor (ZeroNorm otherwise). Writes into `out`.
void cosine_loss_grad(std::span<const double> y_true, std::span<const double> y_pred, std::span<double> out);
EmbeddingVector cosine_loss_grad(const EmbeddingVector& y_true, const EmbeddingVector& y_pred);

/// Arithmetic mean of the per-pair losses. Throws EmptyInput.
double batch_loss(std::span<const std::pair<EmbeddingVector, EmbeddingVector>> pairs);

/// Row-wise batch objective used by the training loop: returns the mean loss
/// over rows and, if `grad` is non-null, fills it with d(mean loss)/d(y_pred).
double batch_loss_and_grad(const Matrix& y_true, const Matrix& y_pred, Matrix* grad);

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;

    friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Moment estimates for one parameter tensor.
struct AdamMoments {
    std::vector<double> first;
    std::vector<double> second;
};

struct AdamState {
    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<AdamMoments> moments;  // one per parameter tensor, in update order
};

/// A parameter tensor paired with its gradient.
template <typename Real>
struct ParamSlot {
    std::span<Real> params;
    std::span<const double> grads;
};

/// One Adam update over every slot; moments are created on the first call.
/// Throws ShapeMismatch when slot shapes disagree with each other or with the state.
template <typename Real>
void adam_step(AdamState& state, std::span<const ParamSlot<Real>> slots);

/// Slots for every weight matrix and bias vector of a model, in layer order.
template <typename Real>
std::vector<ParamSlot<Real>> parameter_slots(nn::BasicMlp<Real>& model, const nn::Gradients& grads);

}  // namespace v2v::objective
