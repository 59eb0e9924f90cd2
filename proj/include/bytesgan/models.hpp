#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bytesgan/nn.hpp"
#include "bytesgan/util.hpp"

namespace bytesgan {

inline constexpr int kNoiseDim = 100;
inline constexpr double kLeakySlope = 0.2;
inline constexpr double kInitStddev = 0.02;

// ---------------------------------------------------------------- parameter layout

struct TensorSpec {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
    bool is_bias = false;
};

/// Named tensors packed back to back in one flat parameter vector, in
/// declaration order.
class ParamLayout {
public:
    void add(std::string name, std::vector<int> shape, bool is_bias = false);
    const std::vector<TensorSpec>& tensors() const { return tensors_; }
    const TensorSpec& at(std::size_t i) const { return tensors_.at(i); }
    std::size_t total() const { return total_; }

private:
    std::vector<TensorSpec> tensors_;
    std::size_t total_ = 0;
};

// ---------------------------------------------------------------- architectures

enum class Architecture : std::uint8_t { generator = 1, discriminator = 2, cnn = 3 };

std::string to_string(Architecture a);

/// dense(noise -> base_h*base_w*base_c) -> LeakyReLU -> transposed conv
/// (stride 2) -> LeakyReLU -> conv (stride 1, same) -> tanh.
struct GeneratorConfig {
    int noise_dim = kNoiseDim;
    int base_h = 10, base_w = 37, base_c = 64;
    int deconv_kernel = 4, deconv_stride = 2, mid_c = 32;
    int out_kernel = 7, out_c = 1;

    int out_h() const { return base_h * deconv_stride; }
    int out_w() const { return base_w * deconv_stride; }
    std::size_t sample_size() const { return static_cast<std::size_t>(out_h()) * out_w() * out_c; }
    std::vector<std::uint32_t> dims() const;
    static GeneratorConfig from_dims(std::span<const std::uint32_t> d);
};

/// Three stride-2 same convolutions, flatten, hidden affine, logit affine.
struct DiscriminatorConfig {
    int in_h = 20, in_w = 74, in_c = 1;
    std::array<int, 3> channels{32, 64, 128};
    int kernel = 3, stride = 2;
    int hidden = 512;
    int classes = 15;

    std::size_t sample_size() const { return static_cast<std::size_t>(in_h) * in_w * in_c; }
    std::array<nn::ConvGeometry, 3> geometries() const;
    std::size_t flat_size() const;
    std::vector<std::uint32_t> dims() const;
    static DiscriminatorConfig from_dims(std::span<const std::uint32_t> d);
};

/// 1-D CNN: three (conv width 5, ReLU, max-pool) stages with valid coverage,
/// flatten, hidden affine + ReLU, output affine + softmax.
struct CnnConfig {
    int length = 1480;
    int filters = 128;
    int conv_width = 5;
    std::array<int, 3> pools{5, 5, 35};
    int hidden = 256;
    int classes = 15;

    /// Sequence length after each (conv, pool) stage.
    std::array<int, 3> conv_lengths() const;
    std::array<int, 3> pool_lengths() const;
    std::array<nn::ConvGeometry, 3> geometries() const;
    std::size_t flat_size() const;
    std::vector<std::uint32_t> dims() const;
    static CnnConfig from_dims(std::span<const std::uint32_t> d);
};

ParamLayout layout_of(const GeneratorConfig& cfg);
ParamLayout layout_of(const DiscriminatorConfig& cfg);
ParamLayout layout_of(const CnnConfig& cfg);

/// Hash of the architecture tag, every shape decision and the tensor layout.
std::uint64_t fingerprint(Architecture arch, std::span<const std::uint32_t> dims);

template <typename Config, typename T>
struct Params {
    Config config;
    std::vector<T> values;

    explicit Params(Config cfg = {}) : config(cfg), values(layout_of(cfg).total(), T(0)) {}
    std::span<const T> tensor(std::size_t i) const {
        const auto& t = layout().at(i);
        return {values.data() + t.offset, t.size};
    }
    std::span<T> tensor(std::size_t i) {
        const auto& t = layout().at(i);
        return {values.data() + t.offset, t.size};
    }
    ParamLayout layout() const { return layout_of(config); }
    std::uint64_t digest() const { return digest_of<T>(values); }
};

template <typename T>
using GeneratorParams = Params<GeneratorConfig, T>;
template <typename T>
using DiscriminatorParams = Params<DiscriminatorConfig, T>;
template <typename T>
using CnnParams = Params<CnnConfig, T>;

/// Weights ~ N(0, 0.02), biases zero; deterministic in the seed.
template <typename T>
GeneratorParams<T> init_generator(const GeneratorConfig& cfg, std::uint64_t seed);
template <typename T>
DiscriminatorParams<T> init_discriminator(const DiscriminatorConfig& cfg, std::uint64_t seed);
template <typename T>
CnnParams<T> init_cnn(const CnnConfig& cfg, std::uint64_t seed);

/// Converts between float and double parameter sets with identical layout.
template <typename To, typename Config, typename From>
Params<Config, To> cast_params(const Params<Config, From>& p) {
    Params<Config, To> out(p.config);
    for (std::size_t i = 0; i < p.values.size(); ++i) out.values[i] = static_cast<To>(p.values[i]);
    return out;
}

// ---------------------------------------------------------------- generator

/// Activations kept for the backward pass.
template <typename T>
struct GeneratorTrace {
    std::size_t batch = 0;
    std::vector<T> noise;   ///< batch x noise_dim
    std::vector<T> base;    ///< dense output after LeakyReLU, batch x base_h x base_w x base_c
    std::vector<T> mid;     ///< transposed-conv output after LeakyReLU
    std::vector<T> output;  ///< tanh output, batch x out_h x out_w x out_c
};

template <typename T>
GeneratorTrace<T> generator_forward(const GeneratorParams<T>& p, std::span<const T> noise, std::size_t batch);

/// Single sample: a 20x74x1 tensor flattened row-major (length 1480).
template <typename T>
std::vector<T> generator_forward(const GeneratorParams<T>& p, std::span<const T> noise);

/// Accumulates parameter gradients into `grads` (may be empty) and writes
/// the noise gradient into `dnoise` (may be empty).
template <typename T>
void generator_backward(const GeneratorParams<T>& p, const GeneratorTrace<T>& trace, std::span<const T> doutput,
                        std::span<T> grads, std::span<T> dnoise = {});

// ---------------------------------------------------------------- discriminator

template <typename T>
struct DiscriminatorTrace {
    std::size_t batch = 0;
    std::vector<T> input;
    std::array<std::vector<T>, 3> conv;  ///< conv outputs after LeakyReLU
    std::vector<T> features;             ///< hidden affine output (feature-matching layer)
    std::vector<T> hidden;               ///< LeakyReLU(features)
    std::vector<T> logits;               ///< batch x classes
};

/// Per-sample view of the discriminator's stacked heads.
struct DiscriminatorOutput {
    std::vector<double> logits;
    std::vector<double> supervised_probs;
    double realness = 0.0;  ///< Z/(Z+1), Z = sum_k exp(logit_k)
    std::vector<double> features;
};

template <typename T>
DiscriminatorTrace<T> discriminator_forward(const DiscriminatorParams<T>& p, std::span<const T> x,
                                            std::size_t batch);

template <typename T>
DiscriminatorOutput discriminator_forward(const DiscriminatorParams<T>& p, std::span<const T> x);

/// Heads of one row of a trace.
template <typename T>
DiscriminatorOutput discriminator_output(const DiscriminatorTrace<T>& trace, std::size_t row);

/// Heads computed from logits alone; realness via log-sum-exp.
DiscriminatorOutput heads_from_logits(std::span<const double> logits);

/// Backpropagates logit and/or feature gradients (either may be empty).
/// Accumulates into `grads` when non-empty; writes `dinput` when non-empty.
template <typename T>
void discriminator_backward(const DiscriminatorParams<T>& p, const DiscriminatorTrace<T>& trace,
                            std::span<const T> dlogits, std::span<const T> dfeatures, std::span<T> grads,
                            std::span<T> dinput = {});

// ---------------------------------------------------------------- CNN baseline

template <typename T>
struct CnnTrace {
    std::size_t batch = 0;
    std::vector<T> input;
    std::array<std::vector<T>, 3> conv;  ///< after ReLU
    std::array<std::vector<T>, 3> pool;
    std::array<std::vector<std::int32_t>, 3> argmax;
    std::vector<T> hidden;  ///< after ReLU
    std::vector<T> logits;
};

template <typename T>
CnnTrace<T> cnn_forward_trace(const CnnParams<T>& p, std::span<const T> x, std::size_t batch);

/// Class probabilities of one PBV.
template <typename T>
std::vector<double> cnn_forward(const CnnParams<T>& p, std::span<const T> x);

template <typename T>
void cnn_backward(const CnnParams<T>& p, const CnnTrace<T>& trace, std::span<const T> dlogits, std::span<T> grads);

/// Row-wise softmax of a (rows x k) logit matrix, computed in double.
std::vector<double> softmax_rows(std::span<const double> logits, std::size_t k);

} // namespace bytesgan
