#include <cstdio>
#include <cstring>

#include "bytesgan/errors.hpp"
#include "bytesgan/pbv.hpp"

namespace bytesgan {

namespace {

constexpr std::uint32_t kMagicMicro = 0xA1B2C3D4;
constexpr std::uint32_t kMagicNano = 0xA1B23C4D;
// Guards against absurd record lengths in corrupt files.
constexpr std::uint32_t kMaxRecord = 256u * 1024u * 1024u;

std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint32_t bswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
}

void put32(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put16(std::ofstream& out, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

} // namespace

PcapReader::PcapReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open capture " + path.string());
    unsigned char hdr[24];
    in_.read(reinterpret_cast<char*>(hdr), sizeof hdr);
    if (in_.gcount() != static_cast<std::streamsize>(sizeof hdr)) {
        throw FormatError(path.string() + ": truncated PCAP global header");
    }
    const std::uint32_t magic = le32(hdr);
    if (magic == kMagicMicro || magic == kMagicNano) {
        swapped_ = false;
    } else if (magic == bswap32(kMagicMicro) || magic == bswap32(kMagicNano)) {
        swapped_ = true;
    } else {
        char buf[16];
        std::snprintf(buf, sizeof buf, "0x%08X", magic);
        throw FormatError(path.string() + ": bad PCAP magic " + buf);
    }
    nanosecond_ = fix(magic) == kMagicNano;
    snaplen_ = fix(le32(hdr + 16));
    link_type_ = fix(le32(hdr + 20));
}

std::uint32_t PcapReader::fix(std::uint32_t v) const { return swapped_ ? bswap32(v) : v; }

std::optional<RawPacket> PcapReader::next() {
    unsigned char rec[16];
    in_.read(reinterpret_cast<char*>(rec), sizeof rec);
    const auto got = in_.gcount();
    if (got == 0) return std::nullopt;
    if (got != static_cast<std::streamsize>(sizeof rec)) {
        throw FormatError(path_.string() + ": truncated header of record " + std::to_string(index_));
    }
    RawPacket pkt;
    pkt.link_type = link_type_;
    pkt.timestamp.seconds = fix(le32(rec));
    pkt.timestamp.fraction = fix(le32(rec + 4));
    pkt.timestamp.nanosecond = nanosecond_;
    const std::uint32_t incl = fix(le32(rec + 8));
    if (incl > kMaxRecord || (snaplen_ != 0 && incl > snaplen_)) {
        throw FormatError(path_.string() + ": record " + std::to_string(index_) + " length " + std::to_string(incl) +
                          " exceeds snap length " + std::to_string(snaplen_));
    }
    pkt.bytes.resize(incl);
    in_.read(reinterpret_cast<char*>(pkt.bytes.data()), incl);
    if (in_.gcount() != static_cast<std::streamsize>(incl)) {
        throw FormatError(path_.string() + ": truncated data of record " + std::to_string(index_));
    }
    ++index_;
    return pkt;
}

std::vector<RawPacket> read_capture(const std::filesystem::path& path) {
    PcapReader reader(path);
    std::vector<RawPacket> out;
    while (auto pkt = reader.next()) out.push_back(std::move(*pkt));
    return out;
}

PcapWriter::PcapWriter(const std::filesystem::path& path, std::uint32_t link_type, std::uint32_t snaplen)
    : out_(path, std::ios::binary | std::ios::trunc), snaplen_(snaplen) {
    if (!out_) throw IoError("cannot write capture " + path.string());
    put32(out_, kMagicMicro);
    put16(out_, 2);
    put16(out_, 4);
    put32(out_, 0);
    put32(out_, 0);
    put32(out_, snaplen);
    put32(out_, link_type);
}

void PcapWriter::write(const RawPacket& pkt) {
    write(pkt.bytes, pkt.timestamp.seconds, pkt.timestamp.fraction);
}

void PcapWriter::write(std::span<const std::uint8_t> bytes, std::uint32_t seconds, std::uint32_t micros) {
    const auto n = static_cast<std::uint32_t>(std::min<std::size_t>(bytes.size(), snaplen_));
    put32(out_, seconds);
    put32(out_, micros);
    put32(out_, n);
    put32(out_, static_cast<std::uint32_t>(bytes.size()));
    out_.write(reinterpret_cast<const char*>(bytes.data()), n);
    if (!out_) throw IoError("capture write failed");
}

} // namespace bytesgan
