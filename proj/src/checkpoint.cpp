#include "bytesgan/checkpoint.hpp"

#include "bytesgan/errors.hpp"
#include "bytesgan/util.hpp"

namespace bytesgan {

namespace {

constexpr char kMagic[4] = {'B', 'S', 'G', 'M'};

template <typename Config>
ModelCheckpoint make(Architecture arch, const Config& cfg, std::span<const float> values,
                     std::vector<std::string> names) {
    ModelCheckpoint ck;
    ck.architecture = arch;
    ck.dims = cfg.dims();
    ck.fingerprint = fingerprint(arch, ck.dims);
    ck.class_names = std::move(names);
    ck.values.assign(values.begin(), values.end());
    return ck;
}

void expect(const ModelCheckpoint& ck, Architecture arch) {
    if (ck.architecture != arch) {
        throw ConfigError("checkpoint holds a " + to_string(ck.architecture) + ", expected a " + to_string(arch));
    }
}

template <typename Config>
Params<Config, float> restore(const ModelCheckpoint& ck) {
    Params<Config, float> p(Config::from_dims(ck.dims));
    if (p.values.size() != ck.values.size()) throw FormatError("checkpoint parameter count does not match layout");
    p.values = ck.values;
    return p;
}

} // namespace

ModelCheckpoint ModelCheckpoint::of(const GeneratorParams<float>& p, const std::vector<std::string>& names) {
    return make(Architecture::generator, p.config, p.values, names);
}
ModelCheckpoint ModelCheckpoint::of(const DiscriminatorParams<float>& p, const ClassSchema& schema) {
    require(static_cast<std::size_t>(p.config.classes) == schema.size(), "checkpoint: classes != schema size");
    return make(Architecture::discriminator, p.config, p.values, schema.names());
}
ModelCheckpoint ModelCheckpoint::of(const CnnParams<float>& p, const ClassSchema& schema) {
    require(static_cast<std::size_t>(p.config.classes) == schema.size(), "checkpoint: classes != schema size");
    return make(Architecture::cnn, p.config, p.values, schema.names());
}

GeneratorParams<float> ModelCheckpoint::generator() const {
    expect(*this, Architecture::generator);
    return restore<GeneratorConfig>(*this);
}
DiscriminatorParams<float> ModelCheckpoint::discriminator() const {
    expect(*this, Architecture::discriminator);
    return restore<DiscriminatorConfig>(*this);
}
CnnParams<float> ModelCheckpoint::cnn() const {
    expect(*this, Architecture::cnn);
    return restore<CnnConfig>(*this);
}

std::vector<unsigned char> ModelCheckpoint::serialize() const {
    ByteWriter w;
    w.put_bytes(std::string_view(kMagic, 4));
    w.put<std::uint16_t>(kCheckpointVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(architecture));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(dims.size()));
    for (auto d : dims) w.put<std::uint32_t>(d);
    w.put<std::uint64_t>(fingerprint);
    w.put<std::uint16_t>(static_cast<std::uint16_t>(class_names.size()));
    for (const auto& n : class_names) w.put_string(n);
    w.put<std::uint64_t>(values.size());
    auto& buf = w.bytes();
    buf.reserve(buf.size() + values.size() * 4);
    for (float v : values) w.put_f32(v);
    return std::move(w.bytes());
}

ModelCheckpoint ModelCheckpoint::deserialize(std::span<const unsigned char> bytes, const std::string& context) {
    ByteReader r(bytes, context);
    auto magic = r.get_bytes(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) throw FormatError(context + ": not a BSGM checkpoint");
    const auto version = r.get<std::uint16_t>();
    if (version != kCheckpointVersion) {
        throw FormatError(context + ": unsupported checkpoint version " + std::to_string(version));
    }
    ModelCheckpoint ck;
    const auto tag = r.get<std::uint8_t>();
    if (tag < 1 || tag > 3) throw FormatError(context + ": unknown architecture tag " + std::to_string(tag));
    ck.architecture = static_cast<Architecture>(tag);
    const auto ndims = r.get<std::uint16_t>();
    for (std::uint16_t i = 0; i < ndims; ++i) ck.dims.push_back(r.get<std::uint32_t>());
    ck.fingerprint = r.get<std::uint64_t>();
    if (ck.fingerprint != bytesgan::fingerprint(ck.architecture, ck.dims)) {
        throw FormatError(context + ": architecture fingerprint mismatch");
    }
    const auto nclasses = r.get<std::uint16_t>();
    for (std::uint16_t i = 0; i < nclasses; ++i) ck.class_names.push_back(r.get_string());
    const auto count = r.get<std::uint64_t>();
    if (count * 4 != r.remaining()) throw FormatError(context + ": parameter payload length mismatch");
    ck.values.resize(count);
    for (auto& v : ck.values) v = r.get_f32();
    // Layout check: the stored value count must match the architecture.
    std::size_t expected = 0;
    switch (ck.architecture) {
        case Architecture::generator: expected = layout_of(GeneratorConfig::from_dims(ck.dims)).total(); break;
        case Architecture::discriminator: expected = layout_of(DiscriminatorConfig::from_dims(ck.dims)).total(); break;
        case Architecture::cnn: expected = layout_of(CnnConfig::from_dims(ck.dims)).total(); break;
    }
    if (expected != count) throw FormatError(context + ": parameter count does not match architecture");
    return ck;
}

void ModelCheckpoint::save(const std::filesystem::path& path) const { write_file_bytes(path.string(), serialize()); }

ModelCheckpoint ModelCheckpoint::load(const std::filesystem::path& path) {
    return deserialize(read_file_bytes(path.string()), path.string());
}

ModelCheckpoint ModelCheckpoint::load(const std::filesystem::path& path, std::uint64_t expected_fingerprint) {
    auto ck = load(path);
    if (ck.fingerprint != expected_fingerprint) {
        throw FormatError(path.string() + ": checkpoint fingerprint " + hex64(ck.fingerprint) + " != expected " +
                          hex64(expected_fingerprint));
    }
    return ck;
}

} // namespace bytesgan
