#include "v2v/data/synth.hpp"

#include <cmath>
#include <string>

#include "v2v/error.hpp"
#include "v2v/rng.hpp"
#include "v2v/simd/kernels.hpp"

namespace v2v::data {
namespace {

constexpr std::uint64_t kMapStream = 0x3a90;
constexpr std::uint64_t kSourceStream = 0x3a91;
constexpr std::uint64_t kNoiseStream = 0x3a92;

}  // namespace

MapKind parse_map_kind(std::string_view name) {
    if (name == "linear") return MapKind::linear;
    if (name == "linear+tanh") return MapKind::linear_tanh;
    throw Error(ErrorCode::ConfigInvalid, "unknown map kind '" + std::string(name) + "'");
}

std::string_view to_string(MapKind kind) noexcept {
    return kind == MapKind::linear ? "linear" : "linear+tanh";
}

EmbeddingVector GroundTruthMap::apply(std::span<const double> source) const {
    if (source.size() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "source dim does not match the map");
    std::vector<double> out(m.rows());
    const auto& k = simd::active();
    k.dot_rows(m.data(), m.rows(), m.cols(), source.data(), out.data());
    if (kind == MapKind::linear_tanh) {
        for (auto& v : out) v = std::tanh(v);
    }
    return EmbeddingVector(std::move(out));
}

SyntheticPairs generate_synthetic_pairs(const SynthConfig& cfg) {
    if (cfg.n == 0) throw Error(ErrorCode::BadDimension, "n must be at least 1");
    if (cfg.d_in == 0 || cfg.d_out == 0) throw Error(ErrorCode::BadDimension, "dimensions must be at least 1");
    if (!(cfg.noise_sigma >= 0.0) || !std::isfinite(cfg.noise_sigma)) {
        throw Error(ErrorCode::ConfigInvalid, "noise sigma must be finite and non-negative");
    }

    auto map_rng = Xoshiro256::stream(cfg.seed, kMapStream);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_in));
    Matrix m(cfg.d_out, cfg.d_in);
    for (auto& e : m.entries()) e = map_rng.normal() * scale;
    GroundTruthMap map{std::move(m), cfg.kind};

    auto source_rng = Xoshiro256::stream(cfg.seed, kSourceStream);
    auto noise_rng = Xoshiro256::stream(cfg.seed, kNoiseStream);
    PairDataset pairs(cfg.d_in, cfg.d_out);
    std::vector<double> source(cfg.d_in);
    std::vector<double> target(cfg.d_out);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (auto& s : source) {
                s = source_rng.normal();
                norm2 += s * s;
            }
        } while (norm2 == 0.0);
        const double norm = std::sqrt(norm2);
        for (auto& s : source) s /= norm;

        const auto mapped = map.apply(source);
        for (std::size_t j = 0; j < cfg.d_out; ++j) {
            target[j] = mapped[j] + (cfg.noise_sigma > 0.0 ? cfg.noise_sigma * noise_rng.normal() : 0.0);
        }
        pairs.add(i, std::span<const double>(source), std::span<const double>(target));
    }
    return {std::move(pairs), std::move(map)};
}

nn::MlpModel model_from_map(const GroundTruthMap& map) {
    if (map.kind != MapKind::linear) throw Error(ErrorCode::ConfigInvalid, "only the linear map is a one-layer model");
    const nn::LayerSpec spec{map.m.cols(), map.m.rows(), nn::Activation::linear, 0.0F};
    std::vector<float> weights(map.m.entries().begin(), map.m.entries().end());
    std::vector<nn::DenseLayer<float>> layers;
    layers.push_back({spec, MatrixF(spec.out_dim, spec.in_dim, std::move(weights)), std::vector<float>(spec.out_dim, 0.0F)});
    return nn::MlpModel(std::move(layers));
}

}  // namespace v2v::data
