#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bytesgan/pbv.hpp"

namespace bytesgan {

inline constexpr std::uint16_t kUnlabeled = 0xFFFF;
inline constexpr std::uint16_t kPbvdVersion = 1;

/// Ordered, unique, non-empty class names; at least two of them.
class ClassSchema {
public:
    ClassSchema() = default;
    /// Throws ConfigError on duplicates, empty names, or fewer than two classes.
    explicit ClassSchema(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    std::optional<std::size_t> index_of(std::string_view name) const;

    bool operator==(const ClassSchema&) const = default;

private:
    std::vector<std::string> names_;
};

/// PBV samples stored as raw octets with optional labels. A sample's
/// identity is its index, which follows (capture order, packet order).
class TrafficDataset {
public:
    TrafficDataset() = default;
    explicit TrafficDataset(ClassSchema schema) : schema_(std::move(schema)) {}

    void add(const PbvOctets& octets, std::uint16_t label);

    const ClassSchema& schema() const { return schema_; }
    std::size_t size() const { return labels_.size(); }
    std::span<const std::uint8_t> octets(std::size_t i) const {
        return {octets_.data() + i * kPbvLength, kPbvLength};
    }
    PacketByteVector vector(std::size_t i) const;
    std::uint16_t label(std::size_t i) const { return labels_[i]; }
    bool labeled(std::size_t i) const { return labels_[i] != kUnlabeled; }
    std::vector<std::size_t> class_counts() const;

    void save(const std::filesystem::path& path) const;
    std::vector<unsigned char> serialize() const;
    static TrafficDataset load(const std::filesystem::path& path);
    static TrafficDataset deserialize(std::span<const unsigned char> bytes, const std::string& context);

private:
    ClassSchema schema_;
    std::vector<std::uint8_t> octets_;
    std::vector<std::uint16_t> labels_;
};

inline TrafficDataset load_dataset(const std::filesystem::path& path) { return TrafficDataset::load(path); }

// ---------------------------------------------------------------- pools

/// Rows copied out of a dataset, tagged with their dataset identity.
class SamplePool {
public:
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    std::uint64_t id(std::size_t i) const { return ids_[i]; }
    const std::vector<std::uint64_t>& ids() const { return ids_; }
    std::span<const std::uint8_t> octets(std::size_t i) const {
        return {octets_.data() + i * kPbvLength, kPbvLength};
    }

protected:
    void push(std::uint64_t id, std::span<const std::uint8_t> row);

    std::vector<std::uint64_t> ids_;
    std::vector<std::uint8_t> octets_;
};

/// Pool without labels; there is no accessor for the source labels.
class UnlabeledPool : public SamplePool {
public:
    void add(std::uint64_t id, std::span<const std::uint8_t> row) { push(id, row); }
};

class LabeledPool : public SamplePool {
public:
    void add(std::uint64_t id, std::span<const std::uint8_t> row, std::uint16_t label);
    std::uint16_t label(std::size_t i) const { return labels_[i]; }
    const std::vector<std::uint16_t>& labels() const { return labels_; }

    /// Every labeled sample of a dataset, in dataset order.
    static LabeledPool from_dataset(const TrafficDataset& ds);

private:
    std::vector<std::uint16_t> labels_;
};

struct SplitSpec {
    std::size_t labeled_per_class = 1;
    /// nullopt: everything left after the test and labeled draws (plus any
    /// unlabeled samples stored in the dataset).
    std::optional<std::size_t> unlabeled_per_class;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct Splits {
    LabeledPool labeled;
    UnlabeledPool unlabeled;
    LabeledPool test;
};

/// Stratified split: per class the test share is held out first, then the
/// labeled draw, then the unlabeled draw (labels erased).
Splits make_splits(const TrafficDataset& ds, const SplitSpec& spec);

/// Number of test samples held out from a class of `class_size`.
std::size_t test_count(std::size_t class_size, double test_fraction);

// ---------------------------------------------------------------- batches

enum class BatchKind { labeled, unlabeled, generated };

inline constexpr int kNoLabel = -1;

struct Batch {
    BatchKind kind = BatchKind::labeled;
    std::size_t rows = 0;
    std::vector<float> vectors;  ///< rows x 1480, normalized
    std::vector<int> labels;     ///< class index or kNoLabel
    std::vector<std::uint64_t> ids;
};

/// One epoch of shuffled mini-batches. The order is a pure function of
/// (pool, batch size, seed, epoch); the final short batch is emitted.
class BatchStream {
public:
    BatchStream(const LabeledPool& pool, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch);
    BatchStream(const UnlabeledPool& pool, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch);

    std::optional<Batch> next();
    std::size_t batch_count() const;

private:
    BatchStream(const SamplePool& pool, const LabeledPool* labeled, std::size_t batch_size,
                std::uint64_t seed, std::uint64_t epoch);

    const SamplePool* pool_;
    const LabeledPool* labeled_;
    std::size_t batch_size_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

std::vector<Batch> batches(const LabeledPool& pool, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch);
std::vector<Batch> batches(const UnlabeledPool& pool, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch);

/// Normalized rows [first, first+count) of a pool, in pool order.
Batch slice(const LabeledPool& pool, std::size_t first, std::size_t count);

} // namespace bytesgan
