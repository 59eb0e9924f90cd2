#include "bytesgan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bytesgan/errors.hpp"
#include "bytesgan/util.hpp"

namespace bytesgan {

namespace {

constexpr char kMagic[4] = {'P', 'B', 'V', 'D'};

// Stream tags for derive_seed.
constexpr std::uint64_t kSplitTag = 0x53504c4954;  // "SPLIT"
constexpr std::uint64_t kBatchTag = 0x4241544348;  // "BATCH"

} // namespace

ClassSchema::ClassSchema(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() < 2) throw ConfigError("class schema needs at least two classes");
    if (names_.size() >= kUnlabeled) throw ConfigError("class schema too large");
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw ConfigError("class names must be non-empty");
        if (!seen.insert(n).second) throw ConfigError("duplicate class name '" + n + "'");
    }
}

std::optional<std::size_t> ClassSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return i;
    }
    return std::nullopt;
}

void TrafficDataset::add(const PbvOctets& octets, std::uint16_t label) {
    require(label == kUnlabeled || label < schema_.size(), "TrafficDataset::add: label outside schema");
    octets_.insert(octets_.end(), octets.begin(), octets.end());
    labels_.push_back(label);
}

PacketByteVector TrafficDataset::vector(std::size_t i) const {
    PbvOctets o;
    std::copy_n(octets_.begin() + static_cast<std::ptrdiff_t>(i * kPbvLength), kPbvLength, o.begin());
    return PacketByteVector(o);
}

std::vector<std::size_t> TrafficDataset::class_counts() const {
    std::vector<std::size_t> counts(schema_.size(), 0);
    for (auto l : labels_) {
        if (l != kUnlabeled) ++counts[l];
    }
    return counts;
}

std::vector<unsigned char> TrafficDataset::serialize() const {
    ByteWriter w;
    w.put_bytes(std::string_view(kMagic, 4));
    w.put<std::uint16_t>(kPbvdVersion);
    w.put<std::uint16_t>(static_cast<std::uint16_t>(schema_.size()));
    for (const auto& n : schema_.names()) w.put_string(n);
    w.put<std::uint64_t>(size());
    auto& buf = w.bytes();
    buf.reserve(buf.size() + size() * (2 + kPbvLength));
    for (std::size_t i = 0; i < size(); ++i) {
        w.put<std::uint16_t>(labels_[i]);
        w.put_bytes(octets(i));
    }
    return std::move(w.bytes());
}

void TrafficDataset::save(const std::filesystem::path& path) const { write_file_bytes(path.string(), serialize()); }

TrafficDataset TrafficDataset::deserialize(std::span<const unsigned char> bytes, const std::string& context) {
    ByteReader r(bytes, context);
    auto magic = r.get_bytes(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) throw FormatError(context + ": not a PBVD dataset");
    const auto version = r.get<std::uint16_t>();
    if (version != kPbvdVersion) throw FormatError(context + ": unsupported PBVD version " + std::to_string(version));
    const auto nclasses = r.get<std::uint16_t>();
    std::vector<std::string> names;
    for (std::uint16_t i = 0; i < nclasses; ++i) names.push_back(r.get_string());
    ClassSchema schema;
    try {
        schema = ClassSchema(std::move(names));
    } catch (const ConfigError& e) {
        throw FormatError(context + ": invalid class table: " + e.what());
    }
    const auto count = r.get<std::uint64_t>();
    const std::size_t record = 2 + kPbvLength;
    if (r.remaining() != count * record) {
        throw FormatError(context + ": header declares " + std::to_string(count) + " samples but payload holds " +
                          std::to_string(r.remaining() / record) + " (" + std::to_string(r.remaining()) + " bytes)");
    }
    TrafficDataset ds(std::move(schema));
    ds.octets_.reserve(count * kPbvLength);
    ds.labels_.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto label = r.get<std::uint16_t>();
        if (label != kUnlabeled && label >= ds.schema_.size()) {
            throw FormatError(context + ": sample " + std::to_string(i) + " has label index " + std::to_string(label) +
                              " >= class count " + std::to_string(ds.schema_.size()));
        }
        auto row = r.get_bytes(kPbvLength);
        ds.octets_.insert(ds.octets_.end(), row.begin(), row.end());
        ds.labels_.push_back(label);
    }
    return ds;
}

TrafficDataset TrafficDataset::load(const std::filesystem::path& path) {
    return deserialize(read_file_bytes(path.string()), path.string());
}

// ---------------------------------------------------------------- pools

void SamplePool::push(std::uint64_t id, std::span<const std::uint8_t> row) {
    require(row.size() == kPbvLength, "pool row must hold 1480 octets");
    ids_.push_back(id);
    octets_.insert(octets_.end(), row.begin(), row.end());
}

void LabeledPool::add(std::uint64_t id, std::span<const std::uint8_t> row, std::uint16_t label) {
    require(label != kUnlabeled, "labeled pool cannot hold unlabeled samples");
    push(id, row);
    labels_.push_back(label);
}

LabeledPool LabeledPool::from_dataset(const TrafficDataset& ds) {
    LabeledPool p;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labeled(i)) p.add(i, ds.octets(i), ds.label(i));
    }
    return p;
}

std::size_t test_count(std::size_t class_size, double test_fraction) {
    return static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(class_size)));
}

Splits make_splits(const TrafficDataset& ds, const SplitSpec& spec) {
    if (spec.labeled_per_class < 1) throw ConfigError("split: labeled_per_class must be >= 1");
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
        throw ConfigError("split: test_fraction must lie in (0, 1)");
    }
    const auto& schema = ds.schema();
    std::vector<std::vector<std::size_t>> by_class(schema.size());
    std::vector<std::size_t> unlabeled_rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labeled(i)) {
            by_class[ds.label(i)].push_back(i);
        } else {
            unlabeled_rows.push_back(i);
        }
    }

    for (std::size_t c = 0; c < schema.size(); ++c) {
        const std::size_t n = by_class[c].size();
        const std::size_t need = test_count(n, spec.test_fraction) + spec.labeled_per_class +
                                 spec.unlabeled_per_class.value_or(0);
        if (need > n) {
            throw CapacityError("class '" + schema.name(c) + "' holds " + std::to_string(n) + " samples but the split needs " +
                                std::to_string(need));
        }
    }

    Splits out;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        auto rows = by_class[c];
        Rng rng(derive_seed(spec.seed, kSplitTag + c));
        rng.shuffle(rows);
        const std::size_t n_test = test_count(rows.size(), spec.test_fraction);
        std::size_t pos = 0;
        for (; pos < n_test; ++pos) out.test.add(rows[pos], ds.octets(rows[pos]), ds.label(rows[pos]));
        for (std::size_t k = 0; k < spec.labeled_per_class; ++k, ++pos) {
            out.labeled.add(rows[pos], ds.octets(rows[pos]), ds.label(rows[pos]));
        }
        const std::size_t end = spec.unlabeled_per_class ? pos + *spec.unlabeled_per_class : rows.size();
        for (; pos < end; ++pos) out.unlabeled.add(rows[pos], ds.octets(rows[pos]));
    }
    if (!spec.unlabeled_per_class) {
        for (auto i : unlabeled_rows) out.unlabeled.add(i, ds.octets(i));
    }
    return out;
}

// ---------------------------------------------------------------- batches

BatchStream::BatchStream(const SamplePool& pool, const LabeledPool* labeled, std::size_t batch_size,
                         std::uint64_t seed, std::uint64_t epoch)
    : pool_(&pool), labeled_(labeled), batch_size_(batch_size) {
    require(batch_size >= 1, "batches: batch_size must be >= 1");
    order_.resize(pool.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    Rng rng(derive_seed(derive_seed(seed, kBatchTag), epoch));
    rng.shuffle(order_);
}

BatchStream::BatchStream(const LabeledPool& pool, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch)
    : BatchStream(pool, &pool, batch_size, seed, epoch) {}

BatchStream::BatchStream(const UnlabeledPool& pool, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch)
    : BatchStream(pool, nullptr, batch_size, seed, epoch) {}

std::size_t BatchStream::batch_count() const { return (order_.size() + batch_size_ - 1) / batch_size_; }

std::optional<Batch> BatchStream::next() {
    if (cursor_ >= order_.size()) return std::nullopt;
    const std::size_t n = std::min(batch_size_, order_.size() - cursor_);
    Batch b;
    b.kind = labeled_ ? BatchKind::labeled : BatchKind::unlabeled;
    b.rows = n;
    b.vectors.resize(n * kPbvLength);
    b.labels.resize(n, kNoLabel);
    b.ids.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = order_[cursor_ + r];
        const auto row = pool_->octets(i);
        float* dst = b.vectors.data() + r * kPbvLength;
        for (std::size_t j = 0; j < kPbvLength; ++j) dst[j] = normalize_octet(row[j]);
        b.ids[r] = pool_->id(i);
        if (labeled_) b.labels[r] = labeled_->label(i);
    }
    cursor_ += n;
    return b;
}

namespace {

template <typename Pool>
std::vector<Batch> collect(const Pool& pool, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch) {
    BatchStream s(pool, batch_size, seed, epoch);
    std::vector<Batch> out;
    while (auto b = s.next()) out.push_back(std::move(*b));
    return out;
}

} // namespace

std::vector<Batch> batches(const LabeledPool& pool, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch) {
    return collect(pool, batch_size, seed, epoch);
}

std::vector<Batch> batches(const UnlabeledPool& pool, std::size_t batch_size, std::uint64_t seed,
                           std::uint64_t epoch) {
    return collect(pool, batch_size, seed, epoch);
}

Batch slice(const LabeledPool& pool, std::size_t first, std::size_t count) {
    require(first + count <= pool.size(), "slice: range outside pool");
    Batch b;
    b.kind = BatchKind::labeled;
    b.rows = count;
    b.vectors.resize(count * kPbvLength);
    b.labels.resize(count);
    b.ids.resize(count);
    for (std::size_t r = 0; r < count; ++r) {
        const auto row = pool.octets(first + r);
        for (std::size_t j = 0; j < kPbvLength; ++j) b.vectors[r * kPbvLength + j] = normalize_octet(row[j]);
        b.labels[r] = pool.label(first + r);
        b.ids[r] = pool.id(first + r);
    }
    return b;
}

} // namespace bytesgan
