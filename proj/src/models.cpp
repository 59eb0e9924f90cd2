#include "bytesgan/models.hpp"

#include <algorithm>
#include <cmath>

#include "bytesgan/errors.hpp"
#include "bytesgan/util.hpp"

namespace bytesgan {

namespace {

template <typename T>
std::span<T> tensor_or_empty(std::span<T> grads, const ParamLayout& layout, std::size_t i) {
    if (grads.empty()) return {};
    const auto& t = layout.at(i);
    return grads.subspan(t.offset, t.size);
}

template <typename T>
void require_finite(std::span<const T> v, const char* what) {
    for (const T& e : v) {
        if (!std::isfinite(e)) throw ContractError(std::string(what) + ": non-finite input");
    }
}

int dim(std::span<const std::uint32_t> d, std::size_t i) {
    if (i >= d.size()) throw FormatError("architecture dims truncated");
    return static_cast<int>(d[i]);
}

template <typename T, typename Config>
Params<Config, T> init_from_layout(const Config& cfg, std::uint64_t seed) {
    Params<Config, T> p(cfg);
    Rng rng(seed);
    for (const auto& t : layout_of(cfg).tensors()) {
        if (t.is_bias) continue;
        for (std::size_t i = 0; i < t.size; ++i) {
            p.values[t.offset + i] = static_cast<T>(kInitStddev * rng.normal());
        }
    }
    return p;
}

} // namespace

void ParamLayout::add(std::string name, std::vector<int> shape, bool is_bias) {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    tensors_.push_back(TensorSpec{std::move(name), std::move(shape), total_, n, is_bias});
    total_ += n;
}

std::string to_string(Architecture a) {
    switch (a) {
        case Architecture::generator: return "generator";
        case Architecture::discriminator: return "discriminator";
        case Architecture::cnn: return "cnn";
    }
    return "unknown";
}

// ---------------------------------------------------------------- configs

std::vector<std::uint32_t> GeneratorConfig::dims() const {
    return {static_cast<std::uint32_t>(noise_dim), static_cast<std::uint32_t>(base_h),
            static_cast<std::uint32_t>(base_w), static_cast<std::uint32_t>(base_c),
            static_cast<std::uint32_t>(deconv_kernel), static_cast<std::uint32_t>(deconv_stride),
            static_cast<std::uint32_t>(mid_c), static_cast<std::uint32_t>(out_kernel),
            static_cast<std::uint32_t>(out_c)};
}

GeneratorConfig GeneratorConfig::from_dims(std::span<const std::uint32_t> d) {
    GeneratorConfig c;
    c.noise_dim = dim(d, 0);
    c.base_h = dim(d, 1);
    c.base_w = dim(d, 2);
    c.base_c = dim(d, 3);
    c.deconv_kernel = dim(d, 4);
    c.deconv_stride = dim(d, 5);
    c.mid_c = dim(d, 6);
    c.out_kernel = dim(d, 7);
    c.out_c = dim(d, 8);
    return c;
}

std::array<nn::ConvGeometry, 3> DiscriminatorConfig::geometries() const {
    std::array<nn::ConvGeometry, 3> g;
    int h = in_h, w = in_w, c = in_c;
    for (int i = 0; i < 3; ++i) {
        g[i] = nn::ConvGeometry::same(h, w, c, channels[i], kernel, kernel, stride);
        h = g[i].out_h;
        w = g[i].out_w;
        c = g[i].out_c;
    }
    return g;
}

std::size_t DiscriminatorConfig::flat_size() const { return geometries()[2].out_size(); }

std::vector<std::uint32_t> DiscriminatorConfig::dims() const {
    return {static_cast<std::uint32_t>(in_h),        static_cast<std::uint32_t>(in_w),
            static_cast<std::uint32_t>(in_c),        static_cast<std::uint32_t>(channels[0]),
            static_cast<std::uint32_t>(channels[1]), static_cast<std::uint32_t>(channels[2]),
            static_cast<std::uint32_t>(kernel),      static_cast<std::uint32_t>(stride),
            static_cast<std::uint32_t>(hidden),      static_cast<std::uint32_t>(classes)};
}

DiscriminatorConfig DiscriminatorConfig::from_dims(std::span<const std::uint32_t> d) {
    DiscriminatorConfig c;
    c.in_h = dim(d, 0);
    c.in_w = dim(d, 1);
    c.in_c = dim(d, 2);
    c.channels = {dim(d, 3), dim(d, 4), dim(d, 5)};
    c.kernel = dim(d, 6);
    c.stride = dim(d, 7);
    c.hidden = dim(d, 8);
    c.classes = dim(d, 9);
    return c;
}

std::array<int, 3> CnnConfig::conv_lengths() const {
    std::array<int, 3> out{};
    int len = length;
    for (int i = 0; i < 3; ++i) {
        out[i] = len - conv_width + 1;
        len = out[i] - pools[i] + 1;
    }
    return out;
}

std::array<int, 3> CnnConfig::pool_lengths() const {
    auto conv = conv_lengths();
    return {conv[0] - pools[0] + 1, conv[1] - pools[1] + 1, conv[2] - pools[2] + 1};
}

std::array<nn::ConvGeometry, 3> CnnConfig::geometries() const {
    std::array<nn::ConvGeometry, 3> g;
    const auto pooled = pool_lengths();
    int len = length, c = 1;
    for (int i = 0; i < 3; ++i) {
        g[i] = nn::ConvGeometry::valid(1, len, c, filters, 1, conv_width, 1);
        len = pooled[i];
        c = filters;
    }
    return g;
}

std::size_t CnnConfig::flat_size() const { return static_cast<std::size_t>(pool_lengths()[2]) * filters; }

std::vector<std::uint32_t> CnnConfig::dims() const {
    return {static_cast<std::uint32_t>(length),   static_cast<std::uint32_t>(filters),
            static_cast<std::uint32_t>(conv_width), static_cast<std::uint32_t>(pools[0]),
            static_cast<std::uint32_t>(pools[1]), static_cast<std::uint32_t>(pools[2]),
            static_cast<std::uint32_t>(hidden),   static_cast<std::uint32_t>(classes)};
}

CnnConfig CnnConfig::from_dims(std::span<const std::uint32_t> d) {
    CnnConfig c;
    c.length = dim(d, 0);
    c.filters = dim(d, 1);
    c.conv_width = dim(d, 2);
    c.pools = {dim(d, 3), dim(d, 4), dim(d, 5)};
    c.hidden = dim(d, 6);
    c.classes = dim(d, 7);
    return c;
}

ParamLayout layout_of(const GeneratorConfig& c) {
    ParamLayout l;
    const int base = c.base_h * c.base_w * c.base_c;
    l.add("dense_w", {c.noise_dim, base});
    l.add("dense_b", {base}, true);
    l.add("deconv_w", {c.deconv_kernel, c.deconv_kernel, c.mid_c, c.base_c});
    l.add("deconv_b", {c.mid_c}, true);
    l.add("out_w", {c.out_kernel, c.out_kernel, c.mid_c, c.out_c});
    l.add("out_b", {c.out_c}, true);
    return l;
}

ParamLayout layout_of(const DiscriminatorConfig& c) {
    ParamLayout l;
    int in_c = c.in_c;
    for (int i = 0; i < 3; ++i) {
        l.add("conv" + std::to_string(i + 1) + "_w", {c.kernel, c.kernel, in_c, c.channels[i]});
        l.add("conv" + std::to_string(i + 1) + "_b", {c.channels[i]}, true);
        in_c = c.channels[i];
    }
    l.add("hidden_w", {static_cast<int>(c.flat_size()), c.hidden});
    l.add("hidden_b", {c.hidden}, true);
    l.add("logit_w", {c.hidden, c.classes});
    l.add("logit_b", {c.classes}, true);
    return l;
}

ParamLayout layout_of(const CnnConfig& c) {
    ParamLayout l;
    int in_c = 1;
    for (int i = 0; i < 3; ++i) {
        l.add("conv" + std::to_string(i + 1) + "_w", {1, c.conv_width, in_c, c.filters});
        l.add("conv" + std::to_string(i + 1) + "_b", {c.filters}, true);
        in_c = c.filters;
    }
    l.add("hidden_w", {static_cast<int>(c.flat_size()), c.hidden});
    l.add("hidden_b", {c.hidden}, true);
    l.add("out_w", {c.hidden, c.classes});
    l.add("out_b", {c.classes}, true);
    return l;
}

std::uint64_t fingerprint(Architecture arch, std::span<const std::uint32_t> dims) {
    Fnv1a h;
    h.update(std::string_view("bytesgan-arch-v1"));
    h.update(static_cast<std::uint8_t>(arch));
    for (auto d : dims) h.update(d);
    h.update(kLeakySlope);
    ParamLayout layout;
    switch (arch) {
        case Architecture::generator: layout = layout_of(GeneratorConfig::from_dims(dims)); break;
        case Architecture::discriminator: layout = layout_of(DiscriminatorConfig::from_dims(dims)); break;
        case Architecture::cnn: layout = layout_of(CnnConfig::from_dims(dims)); break;
    }
    for (const auto& t : layout.tensors()) {
        h.update(std::string_view(t.name));
        for (int s : t.shape) h.update(static_cast<std::int32_t>(s));
    }
    return h.digest();
}

template <typename T>
GeneratorParams<T> init_generator(const GeneratorConfig& cfg, std::uint64_t seed) {
    return init_from_layout<T>(cfg, seed);
}
template <typename T>
DiscriminatorParams<T> init_discriminator(const DiscriminatorConfig& cfg, std::uint64_t seed) {
    return init_from_layout<T>(cfg, seed);
}
template <typename T>
CnnParams<T> init_cnn(const CnnConfig& cfg, std::uint64_t seed) {
    return init_from_layout<T>(cfg, seed);
}

// ---------------------------------------------------------------- generator

namespace {

nn::ConvGeometry deconv_geometry(const GeneratorConfig& c) {
    auto g = nn::ConvGeometry::same(c.out_h(), c.out_w(), c.mid_c, c.base_c, c.deconv_kernel, c.deconv_kernel,
                                    c.deconv_stride);
    require(g.out_h == c.base_h && g.out_w == c.base_w, "generator: transposed convolution shape chain broken");
    return g;
}

nn::ConvGeometry out_geometry(const GeneratorConfig& c) {
    return nn::ConvGeometry::same(c.out_h(), c.out_w(), c.mid_c, c.out_c, c.out_kernel, c.out_kernel, 1);
}

} // namespace

template <typename T>
GeneratorTrace<T> generator_forward(const GeneratorParams<T>& p, std::span<const T> noise, std::size_t batch) {
    const auto& c = p.config;
    require(noise.size() == batch * static_cast<std::size_t>(c.noise_dim), "generator_forward: noise shape");
    const T slope = static_cast<T>(kLeakySlope);
    const std::size_t base = static_cast<std::size_t>(c.base_h) * c.base_w * c.base_c;
    const auto g1 = deconv_geometry(c);
    const auto g2 = out_geometry(c);

    GeneratorTrace<T> t;
    t.batch = batch;
    t.noise.assign(noise.begin(), noise.end());
    t.base.resize(batch * base);
    nn::dense_forward<T>(batch, c.noise_dim, base, noise, p.tensor(0), p.tensor(1), t.base);
    nn::leaky_relu<T>(t.base, slope);

    t.mid.resize(batch * g1.in_size());
    nn::conv_transpose_forward<T>(g1, batch, t.base, p.tensor(2), p.tensor(3), t.mid);
    nn::leaky_relu<T>(t.mid, slope);

    t.output.resize(batch * g2.out_size());
    nn::conv_forward<T>(g2, batch, t.mid, p.tensor(4), p.tensor(5), t.output);
    // tanh rounds to +-1 in finite precision; keep the open interval
    const T edge = std::nextafter(T(1), T(0));
    for (auto& v : t.output) v = std::clamp(std::tanh(v), -edge, edge);
    return t;
}

template <typename T>
std::vector<T> generator_forward(const GeneratorParams<T>& p, std::span<const T> noise) {
    return generator_forward(p, noise, 1).output;
}

template <typename T>
void generator_backward(const GeneratorParams<T>& p, const GeneratorTrace<T>& t, std::span<const T> doutput,
                        std::span<T> grads, std::span<T> dnoise) {
    const auto& c = p.config;
    const auto layout = p.layout();
    require(doutput.size() == t.output.size(), "generator_backward: gradient shape");
    require(grads.empty() || grads.size() == layout.total(), "generator_backward: grads shape");
    const T slope = static_cast<T>(kLeakySlope);
    const std::size_t base = static_cast<std::size_t>(c.base_h) * c.base_w * c.base_c;
    const auto g1 = deconv_geometry(c);
    const auto g2 = out_geometry(c);
    const std::size_t batch = t.batch;

    std::vector<T> dpre(doutput.size());
    for (std::size_t i = 0; i < dpre.size(); ++i) dpre[i] = doutput[i] * (T(1) - t.output[i] * t.output[i]);

    std::vector<T> dmid(t.mid.size());
    nn::conv_backward<T>(g2, batch, t.mid, p.tensor(4), dpre, tensor_or_empty(grads, layout, 4),
                         tensor_or_empty(grads, layout, 5), dmid);
    nn::leaky_relu_backward<T>(t.mid, dmid, slope);

    std::vector<T> dbase(t.base.size());
    nn::conv_transpose_backward<T>(g1, batch, t.base, p.tensor(2), dmid, tensor_or_empty(grads, layout, 2),
                                   tensor_or_empty(grads, layout, 3), dbase);
    nn::leaky_relu_backward<T>(t.base, dbase, slope);

    nn::dense_backward<T>(batch, c.noise_dim, base, t.noise, p.tensor(0), dbase, tensor_or_empty(grads, layout, 0),
                          tensor_or_empty(grads, layout, 1), dnoise);
}

// ---------------------------------------------------------------- discriminator

template <typename T>
DiscriminatorTrace<T> discriminator_forward(const DiscriminatorParams<T>& p, std::span<const T> x,
                                            std::size_t batch) {
    const auto& c = p.config;
    require(x.size() == batch * c.sample_size(), "discriminator_forward: input shape");
    require_finite(x, "discriminator_forward");
    const T slope = static_cast<T>(kLeakySlope);
    const auto g = c.geometries();

    DiscriminatorTrace<T> t;
    t.batch = batch;
    t.input.assign(x.begin(), x.end());
    std::span<const T> in = t.input;
    for (int i = 0; i < 3; ++i) {
        t.conv[i].resize(batch * g[i].out_size());
        nn::conv_forward<T>(g[i], batch, in, p.tensor(2 * i), p.tensor(2 * i + 1), t.conv[i]);
        nn::leaky_relu<T>(t.conv[i], slope);
        in = t.conv[i];
    }
    const std::size_t flat = c.flat_size();
    t.features.resize(batch * c.hidden);
    nn::dense_forward<T>(batch, flat, c.hidden, in, p.tensor(6), p.tensor(7), t.features);
    t.hidden = t.features;
    nn::leaky_relu<T>(t.hidden, slope);
    t.logits.resize(batch * c.classes);
    nn::dense_forward<T>(batch, c.hidden, c.classes, t.hidden, p.tensor(8), p.tensor(9), t.logits);
    return t;
}

DiscriminatorOutput heads_from_logits(std::span<const double> logits) {
    DiscriminatorOutput out;
    out.logits.assign(logits.begin(), logits.end());
    double m = -INFINITY;
    for (double l : logits) m = std::max(m, l);
    double s = 0.0;
    for (double l : logits) s += std::exp(l - m);
    const double lse = m + std::log(s);
    out.supervised_probs.resize(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) out.supervised_probs[k] = std::exp(logits[k] - lse);
    // Z/(Z+1) = sigmoid(log Z)
    out.realness = lse >= 0 ? 1.0 / (1.0 + std::exp(-lse)) : std::exp(lse) / (1.0 + std::exp(lse));
    return out;
}

template <typename T>
DiscriminatorOutput discriminator_output(const DiscriminatorTrace<T>& t, std::size_t row) {
    const std::size_t k = t.logits.size() / t.batch;
    const std::size_t h = t.features.size() / t.batch;
    std::vector<double> logits(t.logits.begin() + row * k, t.logits.begin() + (row + 1) * k);
    auto out = heads_from_logits(logits);
    out.features.assign(t.features.begin() + row * h, t.features.begin() + (row + 1) * h);
    return out;
}

template <typename T>
DiscriminatorOutput discriminator_forward(const DiscriminatorParams<T>& p, std::span<const T> x) {
    return discriminator_output(discriminator_forward(p, x, 1), 0);
}

template <typename T>
void discriminator_backward(const DiscriminatorParams<T>& p, const DiscriminatorTrace<T>& t,
                            std::span<const T> dlogits, std::span<const T> dfeatures, std::span<T> grads,
                            std::span<T> dinput) {
    const auto& c = p.config;
    const auto layout = p.layout();
    const std::size_t batch = t.batch;
    require(dlogits.empty() || dlogits.size() == t.logits.size(), "discriminator_backward: dlogits shape");
    require(dfeatures.empty() || dfeatures.size() == t.features.size(), "discriminator_backward: dfeatures shape");
    require(grads.empty() || grads.size() == layout.total(), "discriminator_backward: grads shape");
    const T slope = static_cast<T>(kLeakySlope);
    const auto g = c.geometries();
    const std::size_t flat = c.flat_size();

    std::vector<T> dfeat(t.features.size(), T(0));
    if (!dlogits.empty()) {
        nn::dense_backward<T>(batch, c.hidden, c.classes, t.hidden, p.tensor(8), dlogits,
                              tensor_or_empty(grads, layout, 8), tensor_or_empty(grads, layout, 9), dfeat);
        nn::leaky_relu_backward<T>(t.hidden, dfeat, slope);
    }
    if (!dfeatures.empty()) {
        for (std::size_t i = 0; i < dfeat.size(); ++i) dfeat[i] += dfeatures[i];
    }

    std::vector<T> dflat(batch * flat);
    nn::dense_backward<T>(batch, flat, c.hidden, t.conv[2], p.tensor(6), dfeat, tensor_or_empty(grads, layout, 6),
                          tensor_or_empty(grads, layout, 7), dflat);

    std::vector<T> dcur = std::move(dflat);
    for (int i = 2; i >= 0; --i) {
        nn::leaky_relu_backward<T>(t.conv[i], dcur, slope);
        std::span<const T> in = i == 0 ? std::span<const T>(t.input) : std::span<const T>(t.conv[i - 1]);
        const bool need_dx = i > 0 || !dinput.empty();
        std::vector<T> dprev(need_dx ? in.size() : 0);
        nn::conv_backward<T>(g[i], batch, in, p.tensor(2 * i), dcur, tensor_or_empty(grads, layout, 2 * i),
                             tensor_or_empty(grads, layout, 2 * i + 1), dprev);
        if (i == 0 && !dinput.empty()) std::copy(dprev.begin(), dprev.end(), dinput.begin());
        dcur = std::move(dprev);
    }
}

// ---------------------------------------------------------------- CNN

std::vector<double> softmax_rows(std::span<const double> logits, std::size_t k) {
    std::vector<double> out(logits.size());
    for (std::size_t r = 0; r * k < logits.size(); ++r) {
        const double* l = logits.data() + r * k;
        double m = -INFINITY;
        for (std::size_t j = 0; j < k; ++j) m = std::max(m, l[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += std::exp(l[j] - m);
        for (std::size_t j = 0; j < k; ++j) out[r * k + j] = std::exp(l[j] - m) / s;
    }
    return out;
}

template <typename T>
CnnTrace<T> cnn_forward_trace(const CnnParams<T>& p, std::span<const T> x, std::size_t batch) {
    const auto& c = p.config;
    require(x.size() == batch * static_cast<std::size_t>(c.length), "cnn_forward: input shape");
    const auto g = c.geometries();
    const auto conv_len = c.conv_lengths();

    CnnTrace<T> t;
    t.batch = batch;
    t.input.assign(x.begin(), x.end());
    std::span<const T> in = t.input;
    for (int i = 0; i < 3; ++i) {
        t.conv[i].resize(batch * g[i].out_size());
        nn::conv_forward<T>(g[i], batch, in, p.tensor(2 * i), p.tensor(2 * i + 1), t.conv[i]);
        nn::relu<T>(t.conv[i]);
        const std::size_t pooled = static_cast<std::size_t>(conv_len[i] - c.pools[i] + 1) * c.filters;
        t.pool[i].resize(batch * pooled);
        t.argmax[i].resize(batch * pooled);
        nn::max_pool1d_forward<T>(batch, conv_len[i], c.filters, c.pools[i], t.conv[i], t.pool[i], t.argmax[i]);
        in = t.pool[i];
    }
    const std::size_t flat = c.flat_size();
    t.hidden.resize(batch * c.hidden);
    nn::dense_forward<T>(batch, flat, c.hidden, in, p.tensor(6), p.tensor(7), t.hidden);
    nn::relu<T>(t.hidden);
    t.logits.resize(batch * c.classes);
    nn::dense_forward<T>(batch, c.hidden, c.classes, t.hidden, p.tensor(8), p.tensor(9), t.logits);
    return t;
}

template <typename T>
std::vector<double> cnn_forward(const CnnParams<T>& p, std::span<const T> x) {
    auto t = cnn_forward_trace(p, x, 1);
    std::vector<double> logits(t.logits.begin(), t.logits.end());
    return softmax_rows(logits, logits.size());
}

template <typename T>
void cnn_backward(const CnnParams<T>& p, const CnnTrace<T>& t, std::span<const T> dlogits, std::span<T> grads) {
    const auto& c = p.config;
    const auto layout = p.layout();
    require(dlogits.size() == t.logits.size(), "cnn_backward: dlogits shape");
    require(grads.size() == layout.total(), "cnn_backward: grads shape");
    const std::size_t batch = t.batch;
    const auto g = c.geometries();
    const auto conv_len = c.conv_lengths();
    const std::size_t flat = c.flat_size();

    std::vector<T> dhidden(t.hidden.size());
    nn::dense_backward<T>(batch, c.hidden, c.classes, t.hidden, p.tensor(8), dlogits,
                          tensor_or_empty(grads, layout, 8), tensor_or_empty(grads, layout, 9), dhidden);
    nn::relu_backward<T>(t.hidden, dhidden);
    std::vector<T> dcur(batch * flat);
    nn::dense_backward<T>(batch, flat, c.hidden, t.pool[2], p.tensor(6), dhidden, tensor_or_empty(grads, layout, 6),
                          tensor_or_empty(grads, layout, 7), dcur);
    for (int i = 2; i >= 0; --i) {
        std::vector<T> dconv(t.conv[i].size());
        nn::max_pool1d_backward<T>(batch, conv_len[i], c.filters, c.pools[i], t.argmax[i], dcur, dconv);
        nn::relu_backward<T>(t.conv[i], dconv);
        std::span<const T> in = i == 0 ? std::span<const T>(t.input) : std::span<const T>(t.pool[i - 1]);
        std::vector<T> dprev(i > 0 ? in.size() : 0);
        nn::conv_backward<T>(g[i], batch, in, p.tensor(2 * i), dconv, tensor_or_empty(grads, layout, 2 * i),
                             tensor_or_empty(grads, layout, 2 * i + 1), dprev);
        dcur = std::move(dprev);
    }
}

#define BYTESGAN_INSTANTIATE(T)                                                                                 \
    template GeneratorParams<T> init_generator<T>(const GeneratorConfig&, std::uint64_t);                       \
    template DiscriminatorParams<T> init_discriminator<T>(const DiscriminatorConfig&, std::uint64_t);           \
    template CnnParams<T> init_cnn<T>(const CnnConfig&, std::uint64_t);                                         \
    template GeneratorTrace<T> generator_forward<T>(const GeneratorParams<T>&, std::span<const T>, std::size_t); \
    template std::vector<T> generator_forward<T>(const GeneratorParams<T>&, std::span<const T>);                \
    template void generator_backward<T>(const GeneratorParams<T>&, const GeneratorTrace<T>&, std::span<const T>, \
                                        std::span<T>, std::span<T>);                                            \
    template DiscriminatorTrace<T> discriminator_forward<T>(const DiscriminatorParams<T>&, std::span<const T>,  \
                                                            std::size_t);                                       \
    template DiscriminatorOutput discriminator_forward<T>(const DiscriminatorParams<T>&, std::span<const T>);   \
    template DiscriminatorOutput discriminator_output<T>(const DiscriminatorTrace<T>&, std::size_t);            \
    template void discriminator_backward<T>(const DiscriminatorParams<T>&, const DiscriminatorTrace<T>&,        \
                                            std::span<const T>, std::span<const T>, std::span<T>,               \
                                            std::span<T>);                                                      \
    template CnnTrace<T> cnn_forward_trace<T>(const CnnParams<T>&, std::span<const T>, std::size_t);            \
    template std::vector<double> cnn_forward<T>(const CnnParams<T>&, std::span<const T>);                       \
    template void cnn_backward<T>(const CnnParams<T>&, const CnnTrace<T>&, std::span<const T>, std::span<T>);

BYTESGAN_INSTANTIATE(float)
BYTESGAN_INSTANTIATE(double)

#undef BYTESGAN_INSTANTIATE

} // namespace bytesgan
