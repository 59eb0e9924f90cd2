#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bytesgan/dataset.hpp"

namespace bytesgan {

/// Desk-scale stand-in for a capture corpus. Every sample is a TCP/443
/// packet: a class-independent IPv4/TCP header and TLS record prefix, then a
/// payload whose bytes are a shared baseline plus a class motif (repeated
/// every `motif_length` octets) plus Gaussian noise, zero-padded after the
/// packet length.
struct SyntheticSpec {
    std::size_t n_classes = 7;
    std::size_t per_class = 1000;
    std::uint64_t seed = 0;
    double noise_sd = 40.0;       ///< per-octet noise, in octet units
    double signal = 0.13;         ///< motif amplitude as a fraction of noise_sd
    std::size_t motif_length = 64;
    std::size_t min_length = 1000;  ///< packet lengths are uniform in [min_length, 1480]
    bool random_phase = false;      ///< offset the motif by a random shift per sample
    double baseline_spread = 64.0;  ///< shared baseline octets are uniform in 128 +- spread

    void validate() const;
};

inline constexpr std::size_t kSyntheticHeader = 45;  ///< IPv4 (20) + TCP (20) + TLS record header (5)

/// Noise-free per-class payload means for one SyntheticSpec (all octets after the header).
struct SyntheticTemplates {
    std::size_t n_classes = 0;
    std::size_t motif_length = 0;
    bool random_phase = false;
    std::vector<double> baseline;  ///< kPbvLength values; header positions unused
    std::vector<double> motifs;    ///< n_classes x motif_length, +-amplitude

    /// Expected octet value at `pos` for class `c` with motif shift `phase`.
    double mean(std::size_t c, std::size_t pos, std::size_t phase = 0) const;
};

SyntheticTemplates synthetic_templates(const SyntheticSpec& spec);

TrafficDataset make_synthetic_dataset(const SyntheticSpec& spec);
TrafficDataset make_synthetic_dataset(std::size_t n_classes, std::size_t per_class, std::uint64_t seed);

/// Nearest-template classifier: squared distance between the payload octets
/// (up to the packet's IPv4 total length) and each class mean, minimised over
/// motif shifts when phases are random.
class TemplateOracle {
public:
    explicit TemplateOracle(SyntheticTemplates t) : t_(std::move(t)) {}
    int predict(std::span<const std::uint8_t> octets) const;
    std::vector<int> predict(const SamplePool& pool) const;

private:
    SyntheticTemplates t_;
};

} // namespace bytesgan
