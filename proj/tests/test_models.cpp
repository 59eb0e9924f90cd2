#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bytesgan/checkpoint.hpp"
#include "bytesgan/errors.hpp"
#include "bytesgan/models.hpp"
#include "bytesgan/nn.hpp"
#include "gradcheck.hpp"

using namespace bytesgan;
using bytesgan::testing::dot;
using bytesgan::testing::numeric_gradient;
using bytesgan::testing::random_vector;
using bytesgan::testing::relative_error;

namespace {

DiscriminatorConfig mini_disc() {
    DiscriminatorConfig c;
    c.in_h = 6;
    c.in_w = 10;
    c.channels = {4, 4, 4};
    c.hidden = 8;
    c.classes = 3;
    return c;
}

GeneratorConfig mini_gen() {
    GeneratorConfig c;
    c.noise_dim = 5;
    c.base_h = 3;
    c.base_w = 5;
    c.base_c = 4;
    c.mid_c = 2;
    c.out_kernel = 3;
    return c;
}

CnnConfig mini_cnn() {
    CnnConfig c;
    c.length = 40;
    c.filters = 3;
    c.conv_width = 3;
    c.pools = {2, 2, 2};
    c.hidden = 5;
    c.classes = 3;
    return c;
}

template <typename P>
void randomize(P& p, unsigned seed, double scale = 0.5) {
    auto r = random_vector(p.values.size(), seed, -scale, scale);
    std::copy(r.begin(), r.end(), p.values.begin());
}

// Naive convolution straight from the definition, used as an oracle.
std::vector<double> naive_conv(const nn::ConvGeometry& g, std::size_t batch, const std::vector<double>& x,
                               const std::vector<double>& w, const std::vector<double>& b) {
    std::vector<double> y(batch * g.out_size());
    for (std::size_t n = 0; n < batch; ++n)
        for (int oy = 0; oy < g.out_h; ++oy)
            for (int ox = 0; ox < g.out_w; ++ox)
                for (int oc = 0; oc < g.out_c; ++oc) {
                    double s = b[oc];
                    for (int ky = 0; ky < g.kernel_h; ++ky)
                        for (int kx = 0; kx < g.kernel_w; ++kx) {
                            const int iy = oy * g.stride + ky - g.pad_top;
                            const int ix = ox * g.stride + kx - g.pad_left;
                            if (iy < 0 || ix < 0 || iy >= g.in_h || ix >= g.in_w) continue;
                            for (int ic = 0; ic < g.in_c; ++ic) {
                                s += x[n * g.in_size() + (iy * g.in_w + ix) * g.in_c + ic] *
                                     w[((ky * g.kernel_w + kx) * g.in_c + ic) * g.out_c + oc];
                            }
                        }
                    y[n * g.out_size() + (oy * g.out_w + ox) * g.out_c + oc] = s;
                }
    return y;
}

} // namespace

TEST_CASE("same-coverage geometry follows ceil(in / stride)") {
    auto g = nn::ConvGeometry::same(20, 74, 1, 32, 3, 3, 2);
    CHECK(g.out_h == 10);
    CHECK(g.out_w == 37);
    auto g3 = nn::ConvGeometry::same(5, 19, 64, 128, 3, 3, 2);
    CHECK(g3.out_h == 3);
    CHECK(g3.out_w == 10);
    auto v = nn::ConvGeometry::valid(1, 1480, 1, 128, 1, 5, 1);
    CHECK(v.out_w == 1476);
}

TEST_CASE("convolution matches a naive oracle") {
    struct Case { nn::ConvGeometry g; };
    std::vector<nn::ConvGeometry> cases{
        nn::ConvGeometry::same(7, 9, 2, 3, 3, 3, 2),   // strided, GEMM path
        nn::ConvGeometry::same(6, 8, 3, 2, 5, 5, 1),   // stride 1, few outputs: direct path
        nn::ConvGeometry::same(6, 8, 3, 6, 3, 3, 1),
        nn::ConvGeometry::valid(1, 30, 2, 4, 1, 5, 1),
    };
    unsigned seed = 1;
    for (const auto& g : cases) {
        const std::size_t batch = 3;
        auto x = random_vector(batch * g.in_size(), seed++);
        auto w = random_vector(g.weight_count(), seed++);
        auto b = random_vector(static_cast<std::size_t>(g.out_c), seed++);
        std::vector<double> y(batch * g.out_size());
        nn::conv_forward<double>(g, batch, x, w, b, y);
        auto ref = naive_conv(g, batch, x, w, b);
        CHECK(relative_error(y, ref) < 1e-12);

        // backward against the adjoint identity <dy, J dx> and finite differences on w
        auto dy = random_vector(y.size(), seed++);
        std::vector<double> dw(w.size(), 0.0), db(b.size(), 0.0), dx(x.size(), 0.0);
        nn::conv_backward<double>(g, batch, x, w, dy, dw, db, dx);
        auto f = [&] { return dot(naive_conv(g, batch, x, w, b), dy); };
        CHECK(relative_error(dw, numeric_gradient(w, f)) < 1e-8);
        CHECK(relative_error(dx, numeric_gradient(x, f)) < 1e-8);
        CHECK(relative_error(db, numeric_gradient(b, f)) < 1e-8);
    }
}

TEST_CASE("transposed convolution is the adjoint of convolution") {
    auto g = nn::ConvGeometry::same(6, 10, 2, 3, 4, 4, 2);
    const std::size_t batch = 2;
    auto small = random_vector(batch * g.out_size(), 11);
    auto big = random_vector(batch * g.in_size(), 12);
    auto w = random_vector(g.weight_count(), 13);
    std::vector<double> zero_small(static_cast<std::size_t>(g.out_c), 0.0), zero_big(static_cast<std::size_t>(g.in_c), 0.0);
    std::vector<double> conv_out(small.size()), tconv_out(big.size());
    nn::conv_forward<double>(g, batch, big, w, zero_small, conv_out);
    nn::conv_transpose_forward<double>(g, batch, small, w, zero_big, tconv_out);
    CHECK(dot(conv_out, small) == doctest::Approx(dot(big, tconv_out)).epsilon(1e-12));
}

TEST_CASE("max-pool picks window maxima and routes gradients to them") {
    std::vector<double> x{1, 5, 2, 7, 3, 0};  // length 6, one channel
    std::vector<double> y(4);
    std::vector<std::int32_t> arg(4);
    nn::max_pool1d_forward<double>(1, 6, 1, 3, x, y, arg);
    CHECK(y == std::vector<double>{5, 7, 7, 7});
    std::vector<double> dy{1, 1, 1, 1}, dx(6, 0.0);
    nn::max_pool1d_backward<double>(1, 6, 1, 3, arg, dy, dx);
    CHECK(dx == std::vector<double>{0, 1, 0, 3, 0, 0});
}

TEST_CASE("full-size shapes") {
    GeneratorConfig gc;
    CHECK(gc.out_h() == 20);
    CHECK(gc.out_w() == 74);
    CHECK(gc.sample_size() == 1480);
    DiscriminatorConfig dc;
    CHECK(dc.flat_size() == 3 * 10 * 128);
    CnnConfig cc;
    CHECK(cc.conv_lengths() == std::array<int, 3>{1476, 1468, 1460});
    CHECK(cc.pool_lengths() == std::array<int, 3>{1472, 1464, 1426});
    CHECK(cc.flat_size() == 1426u * 128u);
}

TEST_CASE("generator output is 20x74x1 and inside (-1, 1)") {
    GeneratorConfig gc;
    auto g = init_generator<float>(gc, 5);
    for (auto& v : g.values) v *= 40.0f;  // push tanh towards saturation
    Rng rng(9);
    std::vector<float> z(4 * kNoiseDim);
    for (auto& v : z) v = static_cast<float>(rng.uniform(-1, 1));
    auto tr = generator_forward<float>(g, z, 4);
    REQUIRE(tr.output.size() == 4 * 1480u);
    for (float v : tr.output) {
        CHECK(std::isfinite(v));
        CHECK(v > -1.0f);
        CHECK(v < 1.0f);
    }
    auto single = generator_forward<float>(g, std::span<const float>(z).first(kNoiseDim));
    CHECK(single.size() == 1480u);
    CHECK(std::equal(single.begin(), single.end(), tr.output.begin()));
}

TEST_CASE("initialisation is seeded N(0, 0.02) weights with zero biases") {
    auto a = init_discriminator<float>(DiscriminatorConfig{}, 42);
    auto b = init_discriminator<float>(DiscriminatorConfig{}, 42);
    auto c = init_discriminator<float>(DiscriminatorConfig{}, 43);
    CHECK(a.digest() == b.digest());
    CHECK(a.digest() != c.digest());
    const auto layout = a.layout();
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < layout.tensors().size(); ++t) {
        auto v = a.tensor(t);
        if (layout.at(t).is_bias) {
            CHECK(std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; }));
            continue;
        }
        for (float x : v) {
            sum += x;
            sq += double(x) * x;
            ++n;
        }
    }
    const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean) < 1e-3);
    CHECK(sd == doctest::Approx(0.02).epsilon(0.02));
}

TEST_CASE("discriminator heads: realness = Z/(Z+1), probabilities sum to one") {
    auto d = init_discriminator<float>(DiscriminatorConfig{}, 3);
    std::vector<float> x(1480);
    Rng rng(4);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-1, 1));
    auto out = discriminator_forward<float>(d, x);
    REQUIRE(out.logits.size() == 15u);
    REQUIRE(out.features.size() == 512u);
    double z = 0;
    for (double l : out.logits) z += std::exp(l);
    CHECK(out.realness == doctest::Approx(z / (z + 1)).epsilon(1e-12));
    CHECK(std::accumulate(out.supervised_probs.begin(), out.supervised_probs.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));

    auto big = heads_from_logits(std::vector<double>{800.0, 799.0});
    CHECK(std::isfinite(big.realness));
    CHECK(big.realness == doctest::Approx(1.0));
    auto tiny = heads_from_logits(std::vector<double>{-800.0, -801.0});
    CHECK(tiny.realness >= 0.0);
    CHECK(tiny.realness < 1e-300);
}

TEST_CASE("non-finite discriminator input is a contract error") {
    auto d = init_discriminator<float>(DiscriminatorConfig{}, 3);
    std::vector<float> x(1480, 0.0f);
    x[17] = std::nanf("");
    CHECK_THROWS_AS(discriminator_forward<float>(d, x), ContractError);
}

TEST_CASE("CNN probabilities sum to one") {
    auto c = init_cnn<float>(mini_cnn(), 8);
    auto x = random_vector(40, 21);
    std::vector<float> xf(x.begin(), x.end());
    auto p = cnn_forward<float>(c, xf);
    REQUIRE(p.size() == 3u);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("discriminator gradients match finite differences") {
    auto cfg = mini_disc();
    auto p = init_discriminator<double>(cfg, 1);
    randomize(p, 2);
    const std::size_t batch = 2;
    auto x = random_vector(batch * cfg.sample_size(), 3);
    auto wl = random_vector(batch * cfg.classes, 4);
    auto wf = random_vector(batch * cfg.hidden, 5);
    auto objective = [&] {
        auto tr = discriminator_forward<double>(p, x, batch);
        return dot(tr.logits, wl) + dot(tr.features, wf);
    };
    auto tr = discriminator_forward<double>(p, x, batch);
    std::vector<double> grads(p.values.size(), 0.0), dx(x.size(), 0.0);
    discriminator_backward<double>(p, tr, wl, wf, grads, dx);
    auto num = numeric_gradient(p.values, objective);
    const auto layout = p.layout();
    for (const auto& t : layout.tensors()) {
        INFO(t.name);
        CHECK(relative_error(std::span<const double>(grads).subspan(t.offset, t.size),
                             std::span<const double>(num).subspan(t.offset, t.size)) < 1e-4);
    }
    CHECK(relative_error(dx, numeric_gradient(x, objective)) < 1e-4);
}

TEST_CASE("generator gradients match finite differences") {
    auto cfg = mini_gen();
    auto p = init_generator<double>(cfg, 1);
    randomize(p, 6);
    const std::size_t batch = 2;
    auto z = random_vector(batch * cfg.noise_dim, 7);
    auto w = random_vector(batch * cfg.sample_size(), 8);
    auto objective = [&] { return dot(generator_forward<double>(p, z, batch).output, w); };
    auto tr = generator_forward<double>(p, z, batch);
    std::vector<double> grads(p.values.size(), 0.0), dz(z.size(), 0.0);
    generator_backward<double>(p, tr, w, grads, dz);
    auto num = numeric_gradient(p.values, objective);
    for (const auto& t : p.layout().tensors()) {
        INFO(t.name);
        CHECK(relative_error(std::span<const double>(grads).subspan(t.offset, t.size),
                             std::span<const double>(num).subspan(t.offset, t.size)) < 1e-4);
    }
    CHECK(relative_error(dz, numeric_gradient(z, objective)) < 1e-4);
}

TEST_CASE("CNN gradients match finite differences") {
    auto cfg = mini_cnn();
    auto p = init_cnn<double>(cfg, 1);
    randomize(p, 9);
    const std::size_t batch = 2;
    auto x = random_vector(batch * cfg.length, 10);
    auto w = random_vector(batch * cfg.classes, 11);
    auto objective = [&] { return dot(cnn_forward_trace<double>(p, x, batch).logits, w); };
    auto tr = cnn_forward_trace<double>(p, x, batch);
    std::vector<double> grads(p.values.size(), 0.0);
    cnn_backward<double>(p, tr, w, grads);
    auto num = numeric_gradient(p.values, objective);
    for (const auto& t : p.layout().tensors()) {
        INFO(t.name);
        CHECK(relative_error(std::span<const double>(grads).subspan(t.offset, t.size),
                             std::span<const double>(num).subspan(t.offset, t.size)) < 1e-4);
    }
}

TEST_CASE("checkpoint round-trip preserves parameters and rejects mismatches") {
    ClassSchema schema({"a", "b", "c"});
    auto d = init_discriminator<float>(mini_disc(), 12);
    auto ck = ModelCheckpoint::of(d, schema);
    auto bytes = ck.serialize();
    auto back = ModelCheckpoint::deserialize(bytes, "mem");
    CHECK(back.discriminator().digest() == d.digest());
    CHECK(back.class_names == schema.names());
    CHECK(back.serialize() == bytes);

    CHECK_THROWS_AS(back.generator(), ConfigError);
    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    CHECK_THROWS_AS(ModelCheckpoint::deserialize(truncated, "mem"), FormatError);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(ModelCheckpoint::deserialize(bad_magic, "mem"), FormatError);
    auto bad_dims = bytes;
    bad_dims[4 + 2 + 1 + 2] ^= 1;  // first architecture dim
    CHECK_THROWS_AS(ModelCheckpoint::deserialize(bad_dims, "mem"), FormatError);
}

TEST_CASE("fingerprint distinguishes architectures and shapes") {
    DiscriminatorConfig a, b;
    b.hidden = 256;
    CHECK(fingerprint(Architecture::discriminator, a.dims()) != fingerprint(Architecture::discriminator, b.dims()));
    CHECK(fingerprint(Architecture::discriminator, a.dims()) == fingerprint(Architecture::discriminator, a.dims()));
    CnnConfig c;
    CHECK(fingerprint(Architecture::cnn, c.dims()) != fingerprint(Architecture::discriminator, a.dims()));
}
