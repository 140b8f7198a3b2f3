#include <string>

#include "v2v/binary_io.hpp"
#include "v2v/checksum.hpp"
#include "v2v/nn.hpp"

namespace v2v::nn {
namespace {

constexpr std::uint64_t kHeaderBytes = 4 + 4 + 4;
constexpr std::uint64_t kLayerHeaderBytes = 4 + 4 + 1 + 4;
constexpr std::uint64_t kTrailerBytes = 8;

std::uint64_t layer_payload_bytes(std::uint64_t in, std::uint64_t out) { return 4 * (out * in + out); }

}  // namespace

std::uint64_t model_size_bytes(const MlpModel& model) noexcept {
    std::uint64_t size = kHeaderBytes + kTrailerBytes;
    for (const auto& layer : model.layers()) {
        size += kLayerHeaderBytes + layer_payload_bytes(layer.spec.in_dim, layer.spec.out_dim);
    }
    return size;
}

std::vector<std::byte> serialize(const MlpModel& model) {
    io::ByteWriter w;
    w.reserve(model_size_bytes(model));
    w.put_raw(std::string_view(kModelMagic, 4));
    w.put<std::uint32_t>(kModelVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(model.layers().size()));
    for (const auto& layer : model.layers()) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.spec.in_dim));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.spec.out_dim));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(layer.spec.activation));
        w.put<float>(layer.spec.dropout_rate);
    }
    for (const auto& layer : model.layers()) {
        w.put_span(layer.weights.entries());
        w.put_span(std::span<const float>(layer.bias));
    }
    w.put<std::uint64_t>(crc64(w.view()));
    return std::move(w).take();
}

MlpModel deserialize(std::span<const std::byte> bytes) {
    io::ByteReader r(bytes);
    const auto magic = r.take(4);
    if (std::memcmp(magic.data(), kModelMagic, 4) != 0) throw Error(ErrorCode::BadMagic, "not a V2VM model file");
    const auto version = r.get<std::uint32_t>();
    if (version != kModelVersion) {
        throw Error(ErrorCode::VersionUnsupported, "model file version " + std::to_string(version));
    }
    const auto n_layers = r.get<std::uint32_t>();
    if (static_cast<std::uint64_t>(n_layers) * kLayerHeaderBytes > r.remaining()) {
        throw Error(ErrorCode::TruncatedFile, std::to_string(n_layers) + " layer headers do not fit in the file");
    }

    std::vector<LayerSpec> arch(n_layers);
    std::vector<std::uint8_t> activations(n_layers);
    std::uint64_t payload = 0;
    for (std::size_t l = 0; l < arch.size(); ++l) {
        auto& spec = arch[l];
        spec.in_dim = r.get<std::uint32_t>();
        spec.out_dim = r.get<std::uint32_t>();
        activations[l] = r.get<std::uint8_t>();
        spec.dropout_rate = r.get<float>();
        if (static_cast<std::uint64_t>(spec.in_dim) * spec.out_dim > r.remaining()) {
            throw Error(ErrorCode::TruncatedFile, "layer " + std::to_string(l) + " does not fit in the file");
        }
        payload += layer_payload_bytes(spec.in_dim, spec.out_dim);
    }
    if (payload + kTrailerBytes > r.remaining()) {
        throw Error(ErrorCode::TruncatedFile, "payload needs " + std::to_string(payload + kTrailerBytes) +
                                                  " bytes, file has " + std::to_string(r.remaining()));
    }
    std::vector<std::vector<float>> weights(arch.size());
    std::vector<std::vector<float>> biases(arch.size());
    for (std::size_t l = 0; l < arch.size(); ++l) {
        weights[l].resize(arch[l].out_dim * arch[l].in_dim);
        biases[l].resize(arch[l].out_dim);
        r.get_span(std::span<float>(weights[l]));
        r.get_span(std::span<float>(biases[l]));
    }
    const std::size_t covered = r.position();
    const auto stored = r.get<std::uint64_t>();
    if (r.remaining() != 0) {
        throw Error(ErrorCode::ChecksumMismatch, std::to_string(r.remaining()) + " unexpected bytes after the checksum");
    }
    if (crc64(bytes.first(covered)) != stored) throw Error(ErrorCode::ChecksumMismatch, "model file checksum");
    for (std::size_t l = 0; l < arch.size(); ++l) {
        if (activations[l] > 1) {
            throw Error(ErrorCode::BadArchitecture, "unknown activation code " + std::to_string(activations[l]));
        }
        arch[l].activation = static_cast<Activation>(activations[l]);
    }
    validate_architecture(arch);

    std::vector<DenseLayer<float>> layers;
    layers.reserve(arch.size());
    for (std::size_t l = 0; l < arch.size(); ++l) {
        require_finite(std::span<const float>(biases[l]), "bias");
        layers.push_back({arch[l], MatrixF(arch[l].out_dim, arch[l].in_dim, std::move(weights[l])), std::move(biases[l])});
    }
    return MlpModel(std::move(layers));
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    io::write_file_atomic(path, serialize(model));
}

MlpModel load_model(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

}  // namespace v2v::nn
