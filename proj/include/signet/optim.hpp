#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "signet/error.hpp"
#include "signet/graph.hpp"
#include "signet/rng.hpp"
#include "signet/tensor.hpp"

namespace signet {

// Bias-corrected adaptive moment estimation. Moment tensors are parallel to
// the parameter list handed to adam_step; beta1 is 0.5 for GAN training and
// 0.9 for the classifier.
template <typename T>
struct AdamStateT {
    std::int64_t step_count = 0;
    T learning_rate = T(0.001);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T epsilon = T(1e-8);
    std::vector<TensorT<T>> first_moment;
    std::vector<TensorT<T>> second_moment;

    AdamStateT() = default;
    AdamStateT(T lr, T b1, T b2 = T(0.999), T eps = T(1e-8))
        : learning_rate(lr), beta1(b1), beta2(b2), epsilon(eps) {}
};

using AdamState = AdamStateT<float>;

template <typename T>
void adam_step(const std::vector<ParameterT<T>*>& params, AdamStateT<T>& state) {
    if (state.first_moment.empty()) {
        for (const auto* p : params) {
            state.first_moment.emplace_back(p->value.shape);
            state.second_moment.emplace_back(p->value.shape);
        }
    }
    if (state.first_moment.size() != params.size())
        throw Error::numeric("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                             " parameters, got " + std::to_string(params.size()));
    state.step_count += 1;
    const T b1t = std::pow(state.beta1, static_cast<T>(state.step_count));
    const T b2t = std::pow(state.beta2, static_cast<T>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        ParameterT<T>& p = *params[i];
        TensorT<T>& m = state.first_moment[i];
        TensorT<T>& v = state.second_moment[i];
        if (!m.same_shape(p.value))
            throw Error::numeric("adam_step: moment shape " + shape_str(m.shape) + " does not match parameter '" +
                                 p.name + "' shape " + shape_str(p.value.shape));
        for (std::int64_t j = 0; j < p.value.numel(); ++j) {
            const auto k = static_cast<std::size_t>(j);
            const T g = p.grad.data[k];
            m.data[k] = state.beta1 * m.data[k] + (T(1) - state.beta1) * g;
            v.data[k] = state.beta2 * v.data[k] + (T(1) - state.beta2) * g * g;
            const T mhat = m.data[k] / (T(1) - b1t);
            const T vhat = v.data[k] / (T(1) - b2t);
            p.value.data[k] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

template <typename T>
void zero_grads(const std::vector<ParameterT<T>*>& params) {
    for (auto* p : params) p->zero_grad();
}

// Zero-mean Gaussian fill, the initialization used for every conv/dense weight.
template <typename T>
void fill_gaussian(TensorT<T>& t, Rng& rng, T stddev = T(0.02)) {
    for (auto& v : t.data) v = static_cast<T>(rng.normal(0.0, static_cast<double>(stddev)));
}

}  // namespace signet
