#include "bytesgan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bytesgan/errors.hpp"
#include "bytesgan/util.hpp"

namespace bytesgan {

namespace {

constexpr std::uint64_t kTagTemplates = 0x7E3;
constexpr std::uint64_t kTagSamples = 0x5A3;

std::uint8_t clamp_octet(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void put16(PbvOctets& o, std::size_t at, std::uint32_t v) {
    o[at] = static_cast<std::uint8_t>(v >> 8);
    o[at + 1] = static_cast<std::uint8_t>(v & 0xFF);
}

std::size_t packet_length(std::span<const std::uint8_t> o) {
    const std::size_t len = (static_cast<std::size_t>(o[2]) << 8) | o[3];
    return std::clamp<std::size_t>(len, kSyntheticHeader, kPbvLength);
}

} // namespace

void SyntheticSpec::validate() const {
    if (n_classes < 2) throw ConfigError("synthetic dataset needs at least 2 classes");
    if (n_classes >= kUnlabeled) throw ConfigError("synthetic dataset has too many classes");
    if (!(noise_sd >= 0) || !(signal >= 0)) throw ConfigError("synthetic noise and signal must be non-negative");
    if (!(baseline_spread >= 0 && baseline_spread <= 128)) throw ConfigError("synthetic baseline_spread must lie in [0, 128]");
    if (motif_length < 1) throw ConfigError("synthetic motif_length must be positive");
    if (min_length < kSyntheticHeader + 1 || min_length > kPbvLength) {
        throw ConfigError("synthetic min_length must lie in [46, 1480]");
    }
}

double SyntheticTemplates::mean(std::size_t c, std::size_t pos, std::size_t phase) const {
    return baseline[pos] + motifs[c * motif_length + (pos - kSyntheticHeader + phase) % motif_length];
}

SyntheticTemplates synthetic_templates(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, kTagTemplates));
    SyntheticTemplates t;
    t.n_classes = spec.n_classes;
    t.motif_length = spec.motif_length;
    t.random_phase = spec.random_phase;
    t.baseline.assign(kPbvLength, 0.0);
    for (std::size_t j = kSyntheticHeader; j < kPbvLength; ++j) t.baseline[j] = 128.0 + rng.uniform(-spec.baseline_spread, spec.baseline_spread);
    const double amp = spec.signal * spec.noise_sd;
    t.motifs.resize(spec.n_classes * spec.motif_length);
    for (auto& m : t.motifs) m = (rng.next() >> 63) ? amp : -amp;
    return t;
}

TrafficDataset make_synthetic_dataset(const SyntheticSpec& spec) {
    const auto t = synthetic_templates(spec);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < spec.n_classes; ++c) names.push_back("class" + std::to_string(c));
    TrafficDataset ds{ClassSchema(names)};
    Rng rng(derive_seed(spec.seed, kTagSamples));
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        for (std::size_t i = 0; i < spec.per_class; ++i) {
            PbvOctets o{};
            const std::size_t len = spec.min_length + rng.index(kPbvLength - spec.min_length + 1);
            const std::size_t phase = spec.random_phase ? rng.index(spec.motif_length) : 0;
            // IPv4, addresses zeroed as after preprocessing
            o[0] = 0x45;
            put16(o, 2, static_cast<std::uint32_t>(len));
            put16(o, 4, static_cast<std::uint32_t>(rng.index(65536)));
            o[6] = 0x40;
            o[8] = rng.index(2) ? 64 : 128;
            o[9] = 6;
            put16(o, 10, static_cast<std::uint32_t>(rng.index(65536)));
            // TCP, one side on 443
            const auto ephemeral = static_cast<std::uint32_t>(49152 + rng.index(16384));
            const bool outbound = rng.index(2) != 0;
            put16(o, 20, outbound ? ephemeral : 443);
            put16(o, 22, outbound ? 443 : ephemeral);
            for (std::size_t j = 24; j < 32; ++j) o[j] = static_cast<std::uint8_t>(rng.index(256));
            o[32] = 0x50;
            o[33] = 0x18;
            put16(o, 34, static_cast<std::uint32_t>(rng.index(65536)));
            put16(o, 36, static_cast<std::uint32_t>(rng.index(65536)));
            // TLS application-data record header
            o[40] = 0x17;
            o[41] = 0x03;
            o[42] = 0x03;
            put16(o, 43, static_cast<std::uint32_t>(len - kSyntheticHeader));
            for (std::size_t j = kSyntheticHeader; j < len; ++j) {
                o[j] = clamp_octet(t.mean(c, j, phase) + spec.noise_sd * rng.normal());
            }
            ds.add(o, static_cast<std::uint16_t>(c));
        }
    }
    return ds;
}

TrafficDataset make_synthetic_dataset(std::size_t n_classes, std::size_t per_class, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_classes = n_classes;
    spec.per_class = per_class;
    spec.seed = seed;
    return make_synthetic_dataset(spec);
}

int TemplateOracle::predict(std::span<const std::uint8_t> octets) const {
    require(octets.size() == kPbvLength, "TemplateOracle: expected a 1480-octet vector");
    const std::size_t len = packet_length(octets);
    const std::size_t phases = t_.random_phase ? t_.motif_length : 1;
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < t_.n_classes; ++c) {
        for (std::size_t ph = 0; ph < phases; ++ph) {
            double dist = 0.0;
            for (std::size_t j = kSyntheticHeader; j < len; ++j) {
                const double diff = static_cast<double>(octets[j]) - t_.mean(c, j, ph);
                dist += diff * diff;
            }
            if (dist < best) {
                best = dist;
                arg = static_cast<int>(c);
            }
        }
    }
    return arg;
}

std::vector<int> TemplateOracle::predict(const SamplePool& pool) const {
    std::vector<int> out(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) out[i] = predict(pool.octets(i));
    return out;
}

} // namespace bytesgan
