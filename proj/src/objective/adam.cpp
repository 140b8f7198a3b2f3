#include <cmath>
#include <string>

#include "v2v/objective.hpp"
#include "v2v/simd/kernels.hpp"

namespace v2v::objective {

template <typename Real>
void adam_step(AdamState& state, std::span<const ParamSlot<Real>> slots) {
    for (std::size_t s = 0; s < slots.size(); ++s) {
        if (slots[s].params.size() != slots[s].grads.size()) {
            throw Error(ErrorCode::ShapeMismatch, "slot " + std::to_string(s) + " has " +
                                                      std::to_string(slots[s].params.size()) + " parameters and " +
                                                      std::to_string(slots[s].grads.size()) + " gradients");
        }
    }
    if (state.moments.empty()) {
        for (const auto& slot : slots) {
            state.moments.push_back({std::vector<double>(slot.params.size(), 0.0),
                                     std::vector<double>(slot.params.size(), 0.0)});
        }
    }
    if (state.moments.size() != slots.size()) throw Error(ErrorCode::ShapeMismatch, "slot count changed");
    for (std::size_t s = 0; s < slots.size(); ++s) {
        if (state.moments[s].first.size() != slots[s].params.size()) {
            throw Error(ErrorCode::ShapeMismatch, "slot " + std::to_string(s) + " changed size");
        }
    }

    const auto& cfg = state.config;
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    const auto& kernels = simd::active().dense<Real>();
    for (std::size_t s = 0; s < slots.size(); ++s) {
        auto& mom = state.moments[s];
        kernels.adam_update(slots[s].params.data(), slots[s].grads.data(), mom.first.data(), mom.second.data(),
                            slots[s].params.size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon, c1, c2);
    }
}

template <typename Real>
std::vector<ParamSlot<Real>> parameter_slots(nn::BasicMlp<Real>& model, const nn::Gradients& grads) {
    auto layers = model.layers();
    if (grads.weights.size() != layers.size() || grads.biases.size() != layers.size()) {
        throw Error(ErrorCode::ShapeMismatch, "gradient layer count does not match the model");
    }
    std::vector<ParamSlot<Real>> slots;
    slots.reserve(2 * layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        slots.push_back({layers[l].weights.entries(), grads.weights[l].entries()});
        slots.push_back({std::span<Real>(layers[l].bias), std::span<const double>(grads.biases[l])});
    }
    return slots;
}

template void adam_step<float>(AdamState&, std::span<const ParamSlot<float>>);
template void adam_step<double>(AdamState&, std::span<const ParamSlot<double>>);
template std::vector<ParamSlot<float>> parameter_slots(nn::MlpModel&, const nn::Gradients&);
template std::vector<ParamSlot<double>> parameter_slots(nn::MlpModel64&, const nn::Gradients&);

}  // namespace v2v::objective
