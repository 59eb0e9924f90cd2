#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bytesgan {

struct AdamConfig {
    double learning_rate = 0.0002;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
    std::vector<T> m;
    std::vector<T> v;
    std::int64_t step = 0;

    static AdamState zeros(std::size_t n) { return {std::vector<T>(n, T(0)), std::vector<T>(n, T(0)), 0}; }
};

template <typename T>
struct AdamResult {
    std::vector<T> params;
    AdamState<T> state;
};

/// One bias-corrected Adam update. Takes params and state by value and
/// returns the updated pair; move them in to avoid copies.
template <typename T>
AdamResult<T> adam_step(std::vector<T> params, std::span<const T> grads, AdamState<T> state, const AdamConfig& cfg);

struct RmspropConfig {
    double learning_rate = 0.001;
    double rho = 0.9;
    double epsilon = 1e-7;
};

template <typename T>
struct RmspropState {
    std::vector<T> mean_square;
    std::int64_t step = 0;

    static RmspropState zeros(std::size_t n) { return {std::vector<T>(n, T(0)), 0}; }
};

template <typename T>
struct RmspropResult {
    std::vector<T> params;
    RmspropState<T> state;
};

/// p -= lr * g / (sqrt(E[g^2]) + eps), E[g^2] an exponential moving average.
template <typename T>
RmspropResult<T> rmsprop_step(std::vector<T> params, std::span<const T> grads, RmspropState<T> state,
                              const RmspropConfig& cfg);

} // namespace bytesgan
