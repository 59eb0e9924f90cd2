#include "bytesgan/optim.hpp"

#include <cmath>

#include "bytesgan/errors.hpp"

namespace bytesgan {

template <typename T>
AdamResult<T> adam_step(std::vector<T> params, std::span<const T> grads, AdamState<T> state, const AdamConfig& cfg) {
    require(grads.size() == params.size() && state.m.size() == params.size() && state.v.size() == params.size(),
            "adam_step: shape mismatch");
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
    const T lr_t = static_cast<T>(cfg.learning_rate / c1);
    const T inv_c2 = static_cast<T>(1.0 / c2);
    const T eps = static_cast<T>(cfg.epsilon);
    T* p = params.data();
    T* m = state.m.data();
    T* v = state.v.data();
    const T* g = grads.data();
    for (std::size_t i = 0, n = params.size(); i < n; ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
        p[i] -= lr_t * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
    }
    return {std::move(params), std::move(state)};
}

template <typename T>
RmspropResult<T> rmsprop_step(std::vector<T> params, std::span<const T> grads, RmspropState<T> state,
                              const RmspropConfig& cfg) {
    require(grads.size() == params.size() && state.mean_square.size() == params.size(),
            "rmsprop_step: shape mismatch");
    state.step += 1;
    const T rho = static_cast<T>(cfg.rho);
    const T lr = static_cast<T>(cfg.learning_rate);
    const T eps = static_cast<T>(cfg.epsilon);
    T* p = params.data();
    T* ms = state.mean_square.data();
    const T* g = grads.data();
    for (std::size_t i = 0, n = params.size(); i < n; ++i) {
        ms[i] = rho * ms[i] + (T(1) - rho) * g[i] * g[i];
        p[i] -= lr * g[i] / (std::sqrt(ms[i]) + eps);
    }
    return {std::move(params), std::move(state)};
}

template AdamResult<float> adam_step<float>(std::vector<float>, std::span<const float>, AdamState<float>,
                                            const AdamConfig&);
template AdamResult<double> adam_step<double>(std::vector<double>, std::span<const double>, AdamState<double>,
                                              const AdamConfig&);
template RmspropResult<float> rmsprop_step<float>(std::vector<float>, std::span<const float>, RmspropState<float>,
                                                  const RmspropConfig&);
template RmspropResult<double> rmsprop_step<double>(std::vector<double>, std::span<const double>,
                                                    RmspropState<double>, const RmspropConfig&);

} // namespace bytesgan
