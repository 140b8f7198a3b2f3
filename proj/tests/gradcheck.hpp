#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "v2v/nn.hpp"
#include "v2v/objective.hpp"
#include "v2v/rng.hpp"

namespace v2v::test {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_kinks = 0;  // coordinates whose perturbation flips a ReLU
};

inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

/// Central-difference check of the full-network gradient of the cosine loss
/// for one (x, target) pair, under a fixed forward mode.
inline GradCheckResult check_network_gradient(nn::MlpModel64 model, const EmbeddingVector& x,
                                              const EmbeddingVector& target, const nn::ForwardMode& mode,
                                              double step) {
    auto loss_at = [&](const nn::MlpModel64& m, nn::ForwardTrace* trace_out) {
        auto result = nn::forward(m, x, mode);
        const double value = objective::cosine_loss(target, result.output).value;
        if (trace_out != nullptr) *trace_out = std::move(result.trace);
        return value;
    };
    auto signs_equal = [](const nn::ForwardTrace& a, const nn::ForwardTrace& b) {
        for (std::size_t l = 0; l + 1 < a.layers.size(); ++l) {
            const auto pa = a.layers[l].pre.entries();
            const auto pb = b.layers[l].pre.entries();
            for (std::size_t i = 0; i < pa.size(); ++i) {
                if ((pa[i] > 0.0) != (pb[i] > 0.0)) return false;
            }
        }
        return true;
    };

    const auto base = nn::forward(model, x, mode);
    const auto grad_out = objective::cosine_loss_grad(target, base.output);
    const auto grads = nn::backward(model, base.trace, grad_out);

    GradCheckResult result;
    auto layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto probe = [&](double& param, double analytic) {
            const double keep = param;
            nn::ForwardTrace up_trace, down_trace;
            param = keep + step;
            const double up = loss_at(model, &up_trace);
            param = keep - step;
            const double down = loss_at(model, &down_trace);
            param = keep;
            if (!signs_equal(up_trace, base.trace) || !signs_equal(down_trace, base.trace)) {
                ++result.skipped_kinks;
                return;
            }
            result.max_rel_error = std::max(result.max_rel_error, relative_error(analytic, (up - down) / (2 * step)));
            ++result.checked;
        };
        auto w = layers[l].weights.entries();
        for (std::size_t i = 0; i < w.size(); ++i) probe(w[i], grads.weights[l].entries()[i]);
        for (std::size_t i = 0; i < layers[l].bias.size(); ++i) probe(layers[l].bias[i], grads.biases[l][i]);
    }
    return result;
}

/// A small random network with 1-3 hidden layers and a random input/target pair.
struct SmallProblem {
    nn::MlpModel64 model;
    EmbeddingVector x;
    EmbeddingVector target;
};

inline SmallProblem random_small_problem(std::uint64_t seed) {
    Xoshiro256 rng = Xoshiro256::stream(seed, 0x6c);
    const std::size_t in = 2 + rng.below(6);
    const std::size_t out = 2 + rng.below(6);
    std::vector<std::size_t> hidden(1 + rng.below(3));
    for (auto& h : hidden) h = 2 + rng.below(7);
    const float dropout = rng.below(2) == 0 ? 0.0F : 0.25F;
    auto model = nn::init_model<double>(nn::make_architecture(in, hidden, out, dropout), seed);
    // Non-zero biases so the check also covers their gradient paths.
    for (auto& layer : model.layers()) {
        for (auto& b : layer.bias) b = 0.1 * rng.normal();
    }
    std::vector<double> x(in), t(out);
    for (auto& v : x) v = rng.normal();
    for (auto& v : t) v = rng.normal();
    return {std::move(model), EmbeddingVector(std::move(x)), EmbeddingVector(std::move(t))};
}

}  // namespace v2v::test
