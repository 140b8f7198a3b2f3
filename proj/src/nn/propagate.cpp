#include <string>

#include "v2v/nn.hpp"
#include "v2v/rng.hpp"
#include "v2v/simd/kernels.hpp"

namespace v2v::nn {
namespace {

void ensure_shape(Matrix& m, std::size_t rows, std::size_t cols) {
    if (m.rows() != rows || m.cols() != cols) m = Matrix(rows, cols);
}

bool dropout_active(const ForwardMode& mode, const LayerSpec& spec) {
    return std::holds_alternative<TrainMode>(mode) && spec.dropout_rate > 0.0F;
}

}  // namespace

double dropout_mask_value(float dropout_rate, const TrainMode& mode, std::size_t layer, std::size_t row,
                          std::size_t unit) noexcept {
    const double p = dropout_rate;
    const double u = to_unit_double(counter_hash(mode.seed, mode.step, layer, row, unit));
    return u < p ? 0.0 : 1.0 / (1.0 - p);
}

template <typename Real>
void forward_batch(const BasicMlp<Real>& model, const Matrix& x, const ForwardMode& mode, ForwardTrace& trace) {
    if (x.cols() != model.input_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(model.input_dim()) +
                                                      " inputs, got " + std::to_string(x.cols()));
    }
    const auto& kernels = simd::active().dense<Real>();
    const std::size_t batch = x.rows();
    const auto layers = model.layers();
    trace.input = x;
    trace.layers.resize(layers.size());

    const Matrix* input = &trace.input;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        auto& lt = trace.layers[l];
        const std::size_t out = layer.spec.out_dim;
        ensure_shape(lt.pre, batch, out);
        ensure_shape(lt.post, batch, out);
        ensure_shape(lt.mask, batch, out);

        kernels.affine_batch(layer.weights.data(), layer.bias.data(), out, layer.spec.in_dim, input->data(), batch,
                             lt.pre.data());

        const bool relu = layer.spec.activation == Activation::relu;
        const bool drop = dropout_active(mode, layer.spec);
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t u = 0; u < out; ++u) {
                const double z = lt.pre(b, u);
                const double a = relu ? (z > 0.0 ? z : 0.0) : z;
                const double m = drop ? dropout_mask_value(layer.spec.dropout_rate, std::get<TrainMode>(mode), l, b, u)
                                      : 1.0;
                lt.mask(b, u) = m;
                lt.post(b, u) = a * m;
            }
        }
        input = &lt.post;
    }
}

template <typename Real>
ForwardTrace forward_batch(const BasicMlp<Real>& model, const Matrix& x, const ForwardMode& mode) {
    ForwardTrace trace;
    forward_batch(model, x, mode, trace);
    return trace;
}

template <typename Real>
ForwardResult forward(const BasicMlp<Real>& model, const EmbeddingVector& x, const ForwardMode& mode) {
    Matrix row(1, x.dim(), std::vector<double>(x.values().begin(), x.values().end()));
    ForwardTrace trace = forward_batch(model, row, mode);
    const auto out = trace.output().row(0);
    return {EmbeddingVector::from(out), std::move(trace)};
}

template <typename Real>
void backward_batch(const BasicMlp<Real>& model, const ForwardTrace& trace, const Matrix& grad_out, Gradients& grads) {
    const auto layers = model.layers();
    const std::size_t batch = trace.batch();
    if (trace.layers.size() != layers.size()) {
        throw Error(ErrorCode::ShapeMismatch, "trace has " + std::to_string(trace.layers.size()) + " layers, model has " +
                                                  std::to_string(layers.size()));
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& lt = trace.layers[l];
        if (lt.pre.rows() != batch || lt.pre.cols() != layers[l].spec.out_dim) {
            throw Error(ErrorCode::ShapeMismatch, "trace of layer " + std::to_string(l) + " does not match the model");
        }
    }
    if (trace.input.cols() != model.input_dim()) throw Error(ErrorCode::ShapeMismatch, "trace input width");
    if (grad_out.rows() != batch || grad_out.cols() != model.output_dim()) {
        throw Error(ErrorCode::ShapeMismatch, "output gradient is " + std::to_string(grad_out.rows()) + "x" +
                                                  std::to_string(grad_out.cols()) + ", expected " +
                                                  std::to_string(batch) + "x" + std::to_string(model.output_dim()));
    }
    if (grads.weights.size() != layers.size()) grads = Gradients::zeros_like(model);

    const auto& kernels = simd::active().dense<Real>();
    Matrix delta = grad_out;
    Matrix next;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& layer = layers[l];
        const auto& lt = trace.layers[l];
        const std::size_t out = layer.spec.out_dim;
        const std::size_t in = layer.spec.in_dim;

        // delta: dLoss/d(post) -> dLoss/d(pre)
        const bool relu = layer.spec.activation == Activation::relu;
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t u = 0; u < out; ++u) {
                double d = delta(b, u) * lt.mask(b, u);
                if (relu && !(lt.pre(b, u) > 0.0)) d = 0.0;
                delta(b, u) = d;
            }
        }

        const Matrix& input = l == 0 ? trace.input : trace.layers[l - 1].post;
        auto& gw = grads.weights[l];
        auto& gb = grads.biases[l];
        if (gw.rows() != out || gw.cols() != in) gw = Matrix(out, in);
        gb.resize(out);
        kernels.weight_grad(delta.data(), input.data(), batch, out, in, gw.data(), gb.data());

        if (l > 0) {
            ensure_shape(next, batch, in);
            kernels.backprop_input(layer.weights.data(), out, in, delta.data(), batch, next.data());
            std::swap(delta, next);
        }
    }
}

template <typename Real>
Gradients backward(const BasicMlp<Real>& model, const ForwardTrace& trace, const EmbeddingVector& grad_out) {
    if (grad_out.dim() != model.output_dim()) {
        throw Error(ErrorCode::ShapeMismatch, "output gradient has dim " + std::to_string(grad_out.dim()));
    }
    Matrix g(1, grad_out.dim(), std::vector<double>(grad_out.values().begin(), grad_out.values().end()));
    Gradients grads = Gradients::zeros_like(model);
    backward_batch(model, trace, g, grads);
    return grads;
}

template void forward_batch(const MlpModel&, const Matrix&, const ForwardMode&, ForwardTrace&);
template void forward_batch(const MlpModel64&, const Matrix&, const ForwardMode&, ForwardTrace&);
template ForwardTrace forward_batch(const MlpModel&, const Matrix&, const ForwardMode&);
template ForwardTrace forward_batch(const MlpModel64&, const Matrix&, const ForwardMode&);
template ForwardResult forward(const MlpModel&, const EmbeddingVector&, const ForwardMode&);
template ForwardResult forward(const MlpModel64&, const EmbeddingVector&, const ForwardMode&);
template void backward_batch(const MlpModel&, const ForwardTrace&, const Matrix&, Gradients&);
template void backward_batch(const MlpModel64&, const ForwardTrace&, const Matrix&, Gradients&);
template Gradients backward(const MlpModel&, const ForwardTrace&, const EmbeddingVector&);
template Gradients backward(const MlpModel64&, const ForwardTrace&, const EmbeddingVector&);

}  // namespace v2v::nn
