#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "bytesgan/dataset.hpp"
#include "bytesgan/models.hpp"

namespace bytesgan {

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Serialized parameters of one network: "BSGM", version, architecture tag,
/// architecture dims, fingerprint, class names, then the f32 values in
/// layout order. Little-endian.
struct ModelCheckpoint {
    Architecture architecture = Architecture::discriminator;
    std::vector<std::uint32_t> dims;
    std::uint64_t fingerprint = 0;
    std::vector<std::string> class_names;
    std::vector<float> values;

    static ModelCheckpoint of(const GeneratorParams<float>& p, const std::vector<std::string>& names = {});
    static ModelCheckpoint of(const DiscriminatorParams<float>& p, const ClassSchema& schema);
    static ModelCheckpoint of(const CnnParams<float>& p, const ClassSchema& schema);

    GeneratorParams<float> generator() const;
    DiscriminatorParams<float> discriminator() const;
    CnnParams<float> cnn() const;

    std::vector<unsigned char> serialize() const;
    /// Rejects bad magic, version, truncation, and fingerprint mismatches.
    static ModelCheckpoint deserialize(std::span<const unsigned char> bytes, const std::string& context);

    void save(const std::filesystem::path& path) const;
    static ModelCheckpoint load(const std::filesystem::path& path);
    /// As load(), additionally requiring a specific architecture fingerprint.
    static ModelCheckpoint load(const std::filesystem::path& path, std::uint64_t expected_fingerprint);
};

} // namespace bytesgan
