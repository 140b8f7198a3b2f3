#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "test_util.hpp"
#include "v2v/binary_io.hpp"
#include "v2v/checksum.hpp"
#include "v2v/nn.hpp"

namespace v2v {
namespace {

using nn::Activation;
using nn::InferMode;
using nn::LayerSpec;
using nn::TrainMode;

TEST(Architecture, DefaultShape) {
    const auto arch = nn::default_architecture();
    ASSERT_EQ(arch.size(), 4U);
    EXPECT_EQ(arch[0].in_dim, 768U);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(arch[i].out_dim, 1536U);
        EXPECT_EQ(arch[i].activation, Activation::relu);
        EXPECT_FLOAT_EQ(arch[i].dropout_rate, 0.2F);
    }
    EXPECT_EQ(arch[3].out_dim, 1536U);
    EXPECT_EQ(arch[3].activation, Activation::linear);
    EXPECT_FLOAT_EQ(arch[3].dropout_rate, 0.0F);
    const auto model = nn::init_model<float>(arch, 1);
    EXPECT_EQ(model.parameter_count(), 768U * 1536 + 3 * 1536 * 1536 + 4 * 1536);
}

TEST(Architecture, Rejections) {
    const std::size_t none[] = {0};
    EXPECT_V2V_ERROR(nn::make_architecture(4, none, 2, 0.0F), ErrorCode::BadArchitecture);
    const std::size_t h[] = {3};
    EXPECT_V2V_ERROR(nn::make_architecture(0, h, 2, 0.0F), ErrorCode::BadArchitecture);
    EXPECT_V2V_ERROR(nn::make_architecture(4, h, 2, 1.0F), ErrorCode::BadArchitecture);
    EXPECT_V2V_ERROR(nn::make_architecture(4, h, 2, -0.1F), ErrorCode::BadArchitecture);
    std::vector<LayerSpec> chain{{4, 3, Activation::relu, 0.0F}, {2, 2, Activation::linear, 0.0F}};
    EXPECT_V2V_ERROR(nn::validate_architecture(chain), ErrorCode::BadArchitecture);
    std::vector<LayerSpec> relu_out{{4, 3, Activation::relu, 0.0F}};
    EXPECT_V2V_ERROR(nn::validate_architecture(relu_out), ErrorCode::BadArchitecture);
    EXPECT_V2V_ERROR(nn::validate_architecture(std::vector<LayerSpec>{}), ErrorCode::BadArchitecture);
}

TEST(Init, GlorotBoundsZeroBiasAndDeterminism) {
    const std::size_t h[] = {40, 30};
    const auto arch = nn::make_architecture(50, h, 20, 0.1F);
    const auto a = nn::init_model<float>(arch, 77);
    EXPECT_EQ(a, nn::init_model<float>(arch, 77));
    EXPECT_NE(a, nn::init_model<float>(arch, 78));
    for (const auto& layer : a.layers()) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.spec.in_dim + layer.spec.out_dim));
        double sum_sq = 0.0;
        for (float w : layer.weights.entries()) {
            EXPECT_LE(std::abs(static_cast<double>(w)), limit);
            sum_sq += static_cast<double>(w) * w;
        }
        // Variance of U(-L, L) is L^2 / 3.
        const double var = sum_sq / static_cast<double>(layer.weights.size());
        EXPECT_NEAR(var, limit * limit / 3.0, 0.15 * limit * limit / 3.0);
        for (float b : layer.bias) EXPECT_EQ(b, 0.0F);
    }
}

nn::MlpModel64 hand_model() {
    // 2 -> 2 (relu) -> 1 (linear)
    std::vector<nn::DenseLayer<double>> layers;
    layers.push_back({{2, 2, Activation::relu, 0.5F}, Matrix(2, 2, {1, -1, 2, 1}), {0.0, -1.0}});
    layers.push_back({{2, 1, Activation::linear, 0.0F}, Matrix(1, 2, {3, -2}), {0.5}});
    return nn::MlpModel64(std::move(layers));
}

TEST(Forward, HandComputedInference) {
    const auto model = hand_model();
    // h = relu([1*1 - 1*2, 2*1 + 1*2 - 1]) = relu([-1, 3]) = [0, 3]; y = 3*0 - 2*3 + 0.5
    const auto r = nn::forward(model, EmbeddingVector{1, 2}, InferMode{});
    ASSERT_EQ(r.output.dim(), 1U);
    EXPECT_DOUBLE_EQ(r.output[0], -5.5);
    EXPECT_V2V_ERROR(nn::forward(model, EmbeddingVector{1, 2, 3}, InferMode{}), ErrorCode::DimensionMismatch);
}

TEST(Forward, BatchMatchesSingleRows) {
    const std::size_t h[] = {9, 7};
    const auto model = nn::init_model<float>(nn::make_architecture(5, h, 4, 0.3F), 3);
    Xoshiro256 rng(4);
    const auto x = test::random_matrix(rng, 6, 5);
    const auto trace = nn::forward_batch(model, x, InferMode{});
    for (std::size_t r = 0; r < 6; ++r) {
        const auto single = nn::forward(model, EmbeddingVector::from(x.row(r)), InferMode{});
        for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(trace.output()(r, c), single.output[c], 1e-12);
    }
}

TEST(Dropout, MaskIsDeterministicAndOnlyOnHiddenLayers) {
    const std::size_t h[] = {64};
    const auto model = nn::init_model<float>(nn::make_architecture(8, h, 8, 0.5F), 5);
    Xoshiro256 rng(6);
    const auto x = test::random_matrix(rng, 4, 8);
    const auto a = nn::forward_batch(model, x, TrainMode{1, 1});
    const auto b = nn::forward_batch(model, x, TrainMode{1, 1});
    const auto c = nn::forward_batch(model, x, TrainMode{1, 2});
    EXPECT_EQ(a.output(), b.output());
    EXPECT_NE(a.layers[0].mask, c.layers[0].mask);
    for (double m : a.layers[1].mask.entries()) EXPECT_EQ(m, 1.0);
    for (double m : a.layers[0].mask.entries()) EXPECT_TRUE(m == 0.0 || m == 2.0);
    const auto infer = nn::forward_batch(model, x, InferMode{});
    for (double m : infer.layers[0].mask.entries()) EXPECT_EQ(m, 1.0);
}

TEST(Dropout, InvertedScalingIsUnbiased) {
    for (float p : {0.1F, 0.2F, 0.5F}) {
        double sum = 0.0;
        std::size_t zeros = 0;
        const std::size_t n = 200000;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = nn::dropout_mask_value(p, TrainMode{42, i / 1000}, 0, i % 7, i % 1000);
            sum += m;
            zeros += m == 0.0 ? 1 : 0;
        }
        EXPECT_NEAR(sum / static_cast<double>(n), 1.0, 0.01) << p;
        EXPECT_NEAR(static_cast<double>(zeros) / static_cast<double>(n), p, 0.005) << p;
    }
}

TEST(Backward, HandComputed) {
    const auto model = hand_model();
    const auto r = nn::forward(model, EmbeddingVector{1, 2}, InferMode{});
    const auto g = nn::backward(model, r.trace, EmbeddingVector{1.0});
    // dL/dW2 = h = [0, 3]; dL/db2 = 1; dL/dh = [3, -2]; relu' = [0, 1]
    // dL/dW1 = [[0, 0], [-2, -4]]; dL/db1 = [0, -2]
    EXPECT_EQ(g.weights[1].entries()[0], 0.0);
    EXPECT_EQ(g.weights[1].entries()[1], 3.0);
    EXPECT_EQ(g.biases[1][0], 1.0);
    const std::vector<double> w1(g.weights[0].entries().begin(), g.weights[0].entries().end());
    EXPECT_EQ(w1, (std::vector<double>{0, 0, -2, -4}));
    EXPECT_EQ(g.biases[0], (std::vector<double>{0, -2}));
}

TEST(Backward, BatchGradientIsSumOfRowGradients) {
    const std::size_t h[] = {6};
    const auto model = nn::init_model<double>(nn::make_architecture(4, h, 3, 0.0F), 8);
    Xoshiro256 rng(9);
    const auto x = test::random_matrix(rng, 5, 4);
    const auto go = test::random_matrix(rng, 5, 3);
    const auto trace = nn::forward_batch(model, x, InferMode{});
    auto total = nn::Gradients::zeros_like(model);
    nn::backward_batch(model, trace, go, total);
    auto sum = nn::Gradients::zeros_like(model);
    for (std::size_t r = 0; r < 5; ++r) {
        const auto single = nn::forward(model, EmbeddingVector::from(x.row(r)), InferMode{});
        const auto g = nn::backward(model, single.trace, EmbeddingVector::from(go.row(r)));
        for (std::size_t l = 0; l < 2; ++l) {
            for (std::size_t i = 0; i < g.weights[l].size(); ++i) sum.weights[l].entries()[i] += g.weights[l].entries()[i];
            for (std::size_t i = 0; i < g.biases[l].size(); ++i) sum.biases[l][i] += g.biases[l][i];
        }
    }
    for (std::size_t l = 0; l < 2; ++l) {
        for (std::size_t i = 0; i < sum.weights[l].size(); ++i) {
            EXPECT_NEAR(total.weights[l].entries()[i], sum.weights[l].entries()[i], 1e-12);
        }
        for (std::size_t i = 0; i < sum.biases[l].size(); ++i) EXPECT_NEAR(total.biases[l][i], sum.biases[l][i], 1e-12);
    }
}

TEST(Backward, MatchesFiniteDifferences) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto p = test::random_small_problem(seed);
        for (const nn::ForwardMode mode : {nn::ForwardMode{InferMode{}}, nn::ForwardMode{TrainMode{seed, 3}}}) {
            const auto r = test::check_network_gradient(p.model, p.x, p.target, mode, 1e-5);
            EXPECT_LT(r.max_rel_error, 1e-4) << "seed " << seed;
            EXPECT_GT(r.checked, 0U);
            EXPECT_LE(r.skipped_kinks, r.checked / 10);
        }
    }
}

TEST(Serialization, RoundTripIsBitIdentical) {
    const std::size_t h[] = {7, 5};
    const auto model = nn::init_model<float>(nn::make_architecture(6, h, 4, 0.2F), 10);
    const auto bytes = nn::serialize(model);
    EXPECT_EQ(bytes.size(), nn::model_size_bytes(model));
    const auto back = nn::deserialize(bytes);
    EXPECT_EQ(back, model);
    EXPECT_EQ(nn::serialize(back), bytes);
}

TEST(Serialization, MinimalModelLayout) {
    std::vector<nn::DenseLayer<float>> layers;
    layers.push_back({{1, 1, Activation::linear, 0.0F}, MatrixF(1, 1, {2.5F}), {-1.0F}});
    const nn::MlpModel model(std::move(layers));
    const auto bytes = nn::serialize(model);
    ASSERT_EQ(bytes.size(), 41U);  // 12 header + 13 layer + 8 params + 8 crc
    EXPECT_EQ(std::memcmp(bytes.data(), "V2VM", 4), 0);
    io::ByteReader r(bytes);
    (void)r.take(4);
    EXPECT_EQ(r.get<std::uint32_t>(), 1U);
    EXPECT_EQ(r.get<std::uint32_t>(), 1U);
    EXPECT_EQ(r.get<std::uint32_t>(), 1U);
    EXPECT_EQ(r.get<std::uint32_t>(), 1U);
    EXPECT_EQ(r.get<std::uint8_t>(), 1U);
    EXPECT_EQ(r.get<float>(), 0.0F);
    EXPECT_EQ(r.get<float>(), 2.5F);
    EXPECT_EQ(r.get<float>(), -1.0F);
    EXPECT_EQ(r.get<std::uint64_t>(), crc64(std::span(bytes).first(33)));
}

TEST(Serialization, DefaultModelSizeBound) {
    const auto model = nn::init_model<float>(nn::default_architecture(), 1);
    EXPECT_EQ(nn::model_size_bytes(model), 12U + 13 * 4 + 4 * model.parameter_count() + 8);
    EXPECT_LT(nn::model_size_bytes(model), 80ULL << 20);
}

class CorruptModel : public ::testing::Test {
protected:
    std::vector<std::byte> bytes = nn::serialize(nn::init_model<float>(
        nn::make_architecture(3, std::vector<std::size_t>{4}, 2, 0.1F), 12));
};

TEST_F(CorruptModel, BadMagic) {
    bytes[0] = std::byte{'X'};
    EXPECT_V2V_ERROR(nn::deserialize(bytes), ErrorCode::BadMagic);
}

TEST_F(CorruptModel, Version) {
    bytes[4] = std::byte{2};
    EXPECT_V2V_ERROR(nn::deserialize(bytes), ErrorCode::VersionUnsupported);
}

TEST_F(CorruptModel, EveryTruncation) {
    for (std::size_t len = 4; len < bytes.size(); ++len) {
        EXPECT_V2V_ERROR(nn::deserialize(std::span(bytes).first(len)), ErrorCode::TruncatedFile);
    }
    EXPECT_V2V_ERROR(nn::deserialize(std::span(bytes).first(2)), ErrorCode::TruncatedFile);
}

TEST_F(CorruptModel, FlippedPayloadBitsFailChecksum) {
    const std::size_t header = 12 + 2 * 13;
    for (std::size_t i = header; i < bytes.size(); ++i) {
        auto copy = bytes;
        copy[i] ^= std::byte{0x10};
        EXPECT_V2V_ERROR(nn::deserialize(copy), ErrorCode::ChecksumMismatch);
    }
}

TEST_F(CorruptModel, ActivationByteFailsChecksumFirst) {
    bytes[12 + 8] = std::byte{7};
    EXPECT_V2V_ERROR(nn::deserialize(bytes), ErrorCode::ChecksumMismatch);
}

TEST_F(CorruptModel, TrailingBytes) {
    bytes.push_back(std::byte{0});
    EXPECT_V2V_ERROR(nn::deserialize(bytes), ErrorCode::ChecksumMismatch);
}

TEST(Serialization, SaveLoadAndMissingFile) {
    test::TempDir dir;
    const auto model = nn::init_model<float>(nn::make_architecture(3, std::vector<std::size_t>{2}, 2, 0.0F), 13);
    nn::save_model(model, dir / "m.v2vm");
    EXPECT_EQ(nn::load_model(dir / "m.v2vm"), model);
    EXPECT_V2V_ERROR(nn::load_model(dir / "missing.v2vm"), ErrorCode::FileNotFound);
}

TEST(Convert, FloatDoubleRoundTrip) {
    const auto model = nn::init_model<float>(nn::make_architecture(3, std::vector<std::size_t>{4}, 2, 0.0F), 14);
    EXPECT_EQ((nn::convert_model<float, double>(nn::convert_model<double, float>(model))), model);
}

}  // namespace
}  // namespace v2v
