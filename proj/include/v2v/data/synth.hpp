#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "v2v/data/pairs.hpp"
#include "v2v/nn.hpp"
#include "v2v/numerics.hpp"

namespace v2v::data {

enum class MapKind { linear, linear_tanh };

MapKind parse_map_kind(std::string_view name);
std::string_view to_string(MapKind kind) noexcept;

/// The known source->target transformation behind a synthetic dataset:
/// target = M s, optionally passed through tanh elementwise.
struct GroundTruthMap {
    Matrix m;  // d_out x d_in, i.i.d. N(0, 1) / sqrt(d_in)
    MapKind kind = MapKind::linear;

    EmbeddingVector apply(std::span<const double> source) const;
};

struct SyntheticPairs {
    PairDataset pairs;
    GroundTruthMap map;
};

struct SynthConfig {
    std::size_t n = 0;
    std::size_t d_in = nn::kDefaultInputDim;
    std::size_t d_out = nn::kDefaultOutputDim;
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;
    MapKind kind = MapKind::linear;
};

/// Sources are i.i.d. standard normal vectors normalized to unit length;
/// targets are map(source) plus N(0, sigma^2) noise per coordinate. Ids are
/// 0..n-1. The map depends only on (seed, d_in, d_out), so datasets of
/// different sizes from one seed share it. Throws BadDimension.
SyntheticPairs generate_synthetic_pairs(const SynthConfig& cfg);

/// The linear ground-truth map as a one-layer linear model (weights rounded
/// to f32, zero bias). Throws ConfigInvalid for the tanh map.
nn::MlpModel model_from_map(const GroundTruthMap& map);

}  // namespace v2v::data
