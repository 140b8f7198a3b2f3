#pragma once

// The translator network: a stack of dense layers, ReLU on hidden layers and a
// linear output layer, with inverted dropout after each hidden activation.
//
// Parameters are stored in the Real type of the model (float for the
// production model, double for gradient checking); all arithmetic accumulates
// in double.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "v2v/numerics.hpp"

namespace v2v::nn {

enum class Activation : std::uint8_t { relu = 0, linear = 1 };

struct LayerSpec {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::relu;
    float dropout_rate = 0.0F;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

inline constexpr std::size_t kDefaultInputDim = 768;
inline constexpr std::size_t kDefaultOutputDim = 1536;
inline constexpr std::size_t kDefaultHiddenWidth = 1536;
inline constexpr float kDefaultDropout = 0.2F;

/// input -> hidden[0] -> ... -> hidden[k-1] -> output; ReLU + dropout on each
/// hidden layer, linear output without dropout.
std::vector<LayerSpec> make_architecture(std::size_t input_dim, std::span<const std::size_t> hidden_widths,
                                         std::size_t output_dim, float dropout_rate);

/// 768 -> 1536 -> 1536 -> 1536 -> 1536 with dropout 0.2.
std::vector<LayerSpec> default_architecture();

/// Throws BadArchitecture unless the layers chain, every dimension is
/// positive, dropout is in [0, 1), hidden layers are ReLU and only the last
/// layer is linear (with no dropout).
void validate_architecture(std::span<const LayerSpec> arch);

template <typename Real>
struct DenseLayer {
    LayerSpec spec;
    BasicMatrix<Real> weights;  // out_dim x in_dim
    std::vector<Real> bias;     // out_dim

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

template <typename Real>
class BasicMlp {
public:
    BasicMlp() = default;
    explicit BasicMlp(std::vector<DenseLayer<Real>> layers);

    std::span<const DenseLayer<Real>> layers() const noexcept { return layers_; }
    std::span<DenseLayer<Real>> layers() noexcept { return layers_; }
    std::vector<LayerSpec> architecture() const;

    std::size_t input_dim() const noexcept { return layers_.front().spec.in_dim; }
    std::size_t output_dim() const noexcept { return layers_.back().spec.out_dim; }
    std::size_t parameter_count() const noexcept;

    friend bool operator==(const BasicMlp&, const BasicMlp&) = default;

private:
    std::vector<DenseLayer<Real>> layers_;
};

using MlpModel = BasicMlp<float>;
using MlpModel64 = BasicMlp<double>;

/// Glorot-uniform weights in +-sqrt(6 / (in + out)), zero biases. Deterministic in seed.
template <typename Real>
BasicMlp<Real> init_model(std::span<const LayerSpec> arch, std::uint64_t seed);

/// Copies a model into another parameter precision.
template <typename To, typename From>
BasicMlp<To> convert_model(const BasicMlp<From>& model);

struct InferMode {};

/// Dropout masks are a pure function of (seed, step, layer, row in batch, unit).
struct TrainMode {
    std::uint64_t seed = 0;
    std::uint64_t step = 0;
};

using ForwardMode = std::variant<InferMode, TrainMode>;

/// Mask value for one unit: 0 with probability p, else 1 / (1 - p).
double dropout_mask_value(float dropout_rate, const TrainMode& mode, std::size_t layer, std::size_t row,
                          std::size_t unit) noexcept;

struct LayerTrace {
    Matrix pre;   // batch x out_dim, W h + b
    Matrix post;  // batch x out_dim, activation(pre) * mask
    Matrix mask;  // batch x out_dim, all ones unless dropout is active
};

/// Per-layer caches from a forward pass over a batch of rows.
struct ForwardTrace {
    Matrix input;  // batch x in_dim
    std::vector<LayerTrace> layers;

    std::size_t batch() const noexcept { return input.rows(); }
    const Matrix& output() const noexcept { return layers.back().post; }
};

struct Gradients {
    std::vector<Matrix> weights;               // one per layer, out x in
    std::vector<std::vector<double>> biases;   // one per layer, out

    template <typename Real>
    static Gradients zeros_like(const BasicMlp<Real>& model);
};

/// Batched forward pass. `x` is batch x input_dim. The trace is reused if its
/// shapes already match.
template <typename Real>
void forward_batch(const BasicMlp<Real>& model, const Matrix& x, const ForwardMode& mode, ForwardTrace& trace);

template <typename Real>
ForwardTrace forward_batch(const BasicMlp<Real>& model, const Matrix& x, const ForwardMode& mode);

struct ForwardResult {
    EmbeddingVector output;
    ForwardTrace trace;
};

template <typename Real>
ForwardResult forward(const BasicMlp<Real>& model, const EmbeddingVector& x, const ForwardMode& mode);

/// Backpropagates `grad_out` (batch x output_dim, dLoss/dOutput) through the
/// trace. Gradients are summed over the batch rows and overwrite `grads`.
template <typename Real>
void backward_batch(const BasicMlp<Real>& model, const ForwardTrace& trace, const Matrix& grad_out, Gradients& grads);

template <typename Real>
Gradients backward(const BasicMlp<Real>& model, const ForwardTrace& trace, const EmbeddingVector& grad_out);

// Model file, little-endian:
//   "V2VM" | u32 version=1 | u32 n_layers
//   | per layer: u32 in_dim, u32 out_dim, u8 activation, f32 dropout_rate
//   | per layer: f32 weights (out x in, row-major), f32 biases (out)
//   | u64 CRC-64/XZ of all preceding bytes
inline constexpr char kModelMagic[4] = {'V', '2', 'V', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

std::vector<std::byte> serialize(const MlpModel& model);
MlpModel deserialize(std::span<const std::byte> bytes);

/// Length of serialize(model), computed without serializing.
std::uint64_t model_size_bytes(const MlpModel& model) noexcept;

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace v2v::nn
