#include <cmath>
#include <string>

#include "v2v/nn.hpp"
#include "v2v/rng.hpp"

namespace v2v::nn {
namespace {

constexpr std::uint64_t kInitStream = 0x1417;

[[noreturn]] void bad_arch(const std::string& why) { throw Error(ErrorCode::BadArchitecture, why); }

}  // namespace

std::vector<LayerSpec> make_architecture(std::size_t input_dim, std::span<const std::size_t> hidden_widths,
                                         std::size_t output_dim, float dropout_rate) {
    std::vector<LayerSpec> arch;
    std::size_t prev = input_dim;
    for (std::size_t width : hidden_widths) {
        arch.push_back({prev, width, Activation::relu, dropout_rate});
        prev = width;
    }
    arch.push_back({prev, output_dim, Activation::linear, 0.0F});
    validate_architecture(arch);
    return arch;
}

std::vector<LayerSpec> default_architecture() {
    const std::size_t hidden[] = {kDefaultHiddenWidth, kDefaultHiddenWidth, kDefaultHiddenWidth};
    return make_architecture(kDefaultInputDim, hidden, kDefaultOutputDim, kDefaultDropout);
}

void validate_architecture(std::span<const LayerSpec> arch) {
    if (arch.empty()) bad_arch("no layers");
    for (std::size_t i = 0; i < arch.size(); ++i) {
        const auto& layer = arch[i];
        const std::string where = "layer " + std::to_string(i);
        if (layer.in_dim == 0 || layer.out_dim == 0) bad_arch(where + " has a zero dimension");
        if (layer.in_dim > UINT32_MAX || layer.out_dim > UINT32_MAX) bad_arch(where + " dimension exceeds u32");
        if (!(layer.dropout_rate >= 0.0F && layer.dropout_rate < 1.0F)) bad_arch(where + " dropout outside [0, 1)");
        if (i > 0 && arch[i - 1].out_dim != layer.in_dim) {
            bad_arch(where + " expects " + std::to_string(layer.in_dim) + " inputs but previous layer emits " +
                     std::to_string(arch[i - 1].out_dim));
        }
        const bool last = i + 1 == arch.size();
        if (last && layer.activation != Activation::linear) bad_arch("output layer must be linear");
        if (!last && layer.activation != Activation::relu) bad_arch(where + " is hidden and must be relu");
        if (last && layer.dropout_rate != 0.0F) bad_arch("output layer cannot have dropout");
    }
}

template <typename Real>
BasicMlp<Real>::BasicMlp(std::vector<DenseLayer<Real>> layers) : layers_(std::move(layers)) {
    validate_architecture(architecture());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& layer = layers_[i];
        if (layer.weights.rows() != layer.spec.out_dim || layer.weights.cols() != layer.spec.in_dim ||
            layer.bias.size() != layer.spec.out_dim) {
            throw Error(ErrorCode::ShapeMismatch, "parameters of layer " + std::to_string(i) + " do not match its spec");
        }
    }
}

template <typename Real>
std::vector<LayerSpec> BasicMlp<Real>::architecture() const {
    std::vector<LayerSpec> arch;
    arch.reserve(layers_.size());
    for (const auto& layer : layers_) arch.push_back(layer.spec);
    return arch;
}

template <typename Real>
std::size_t BasicMlp<Real>::parameter_count() const noexcept {
    std::size_t count = 0;
    for (const auto& layer : layers_) count += layer.weights.size() + layer.bias.size();
    return count;
}

template <typename Real>
BasicMlp<Real> init_model(std::span<const LayerSpec> arch, std::uint64_t seed) {
    validate_architecture(arch);
    auto rng = Xoshiro256::stream(seed, kInitStream);
    std::vector<DenseLayer<Real>> layers;
    layers.reserve(arch.size());
    for (const auto& spec : arch) {
        const double limit = std::sqrt(6.0 / static_cast<double>(spec.in_dim + spec.out_dim));
        BasicMatrix<Real> weights(spec.out_dim, spec.in_dim);
        for (auto& w : weights.entries()) {
            auto value = static_cast<Real>((2.0 * rng.uniform() - 1.0) * limit);
            // Rounding to Real must not step outside the interval.
            while (std::fabs(static_cast<double>(value)) > limit) value = std::nextafter(value, Real{0});
            w = value;
        }
        layers.push_back({spec, std::move(weights), std::vector<Real>(spec.out_dim, Real{0})});
    }
    return BasicMlp<Real>(std::move(layers));
}

template <typename To, typename From>
BasicMlp<To> convert_model(const BasicMlp<From>& model) {
    std::vector<DenseLayer<To>> layers;
    for (const auto& layer : model.layers()) {
        std::vector<To> weights(layer.weights.entries().begin(), layer.weights.entries().end());
        layers.push_back({layer.spec, BasicMatrix<To>(layer.weights.rows(), layer.weights.cols(), std::move(weights)),
                          std::vector<To>(layer.bias.begin(), layer.bias.end())});
    }
    return BasicMlp<To>(std::move(layers));
}

template <typename Real>
Gradients Gradients::zeros_like(const BasicMlp<Real>& model) {
    Gradients g;
    for (const auto& layer : model.layers()) {
        g.weights.emplace_back(layer.spec.out_dim, layer.spec.in_dim);
        g.biases.emplace_back(layer.spec.out_dim, 0.0);
    }
    return g;
}

template class BasicMlp<float>;
template class BasicMlp<double>;
template MlpModel init_model<float>(std::span<const LayerSpec>, std::uint64_t);
template MlpModel64 init_model<double>(std::span<const LayerSpec>, std::uint64_t);
template MlpModel64 convert_model<double, float>(const MlpModel&);
template MlpModel convert_model<float, double>(const MlpModel64&);
template MlpModel convert_model<float, float>(const MlpModel&);
template MlpModel64 convert_model<double, double>(const MlpModel64&);
template Gradients Gradients::zeros_like(const MlpModel&);
template Gradients Gradients::zeros_like(const MlpModel64&);

}  // namespace v2v::nn
