#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bytesgan {

/// Number of octets in a Packet Byte Vector.
inline constexpr std::size_t kPbvLength = 1480;

/// Octet b maps to b/127.5 - 1, so 0x00 -> -1 and 0xFF -> +1.
inline float normalize_octet(std::uint8_t b) { return static_cast<float>(b) / 127.5f - 1.0f; }

/// Inverse of normalize_octet for values produced by it.
std::uint8_t denormalize_octet(double v);

// ---------------------------------------------------------------- capture input

enum class LinkType : std::uint32_t {
    ethernet = 1,
    raw_ip = 101,
};

struct Timestamp {
    std::uint32_t seconds = 0;
    std::uint32_t fraction = 0;  ///< micro- or nanoseconds, see `nanosecond`
    bool nanosecond = false;
};

struct RawPacket {
    std::uint32_t link_type = 1;
    Timestamp timestamp;
    std::vector<std::uint8_t> bytes;
};

/// Sequential reader for classic (libpcap) capture files. Accepts the
/// microsecond and nanosecond magics in either byte order.
class PcapReader {
public:
    explicit PcapReader(const std::filesystem::path& path);

    /// Next record in file order, or nullopt at a clean end of file.
    std::optional<RawPacket> next();

    std::uint32_t link_type() const { return link_type_; }
    std::uint32_t snap_length() const { return snaplen_; }
    std::uint64_t records_read() const { return index_; }

private:
    std::uint32_t fix(std::uint32_t v) const;

    std::filesystem::path path_;
    std::ifstream in_;
    bool swapped_ = false;
    bool nanosecond_ = false;
    std::uint32_t snaplen_ = 0;
    std::uint32_t link_type_ = 0;
    std::uint64_t index_ = 0;
};

/// Reads every record of a capture.
std::vector<RawPacket> read_capture(const std::filesystem::path& path);

/// Writes little-endian microsecond-resolution captures.
class PcapWriter {
public:
    PcapWriter(const std::filesystem::path& path, std::uint32_t link_type, std::uint32_t snaplen = 65535);
    void write(const RawPacket& pkt);
    void write(std::span<const std::uint8_t> bytes, std::uint32_t seconds = 0, std::uint32_t micros = 0);

private:
    std::ofstream out_;
    std::uint32_t snaplen_;
};

// ---------------------------------------------------------------- filtering

enum class Protocol { arp, dhcpv4, dhcpv6, icmpv4, icmpv6 };

std::string to_string(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);

struct FilterPolicy {
    std::vector<Protocol> dropped_protocols{Protocol::arp, Protocol::dhcpv4, Protocol::dhcpv6,
                                            Protocol::icmpv4, Protocol::icmpv6};
    bool drop_non_ip = true;
    bool zero_ip_addresses = true;
    /// When false the TCP/UDP header is cut out and the IP header is followed
    /// directly by the transport payload.
    bool include_transport_header = true;
    /// When false, TCP/UDP segments with no payload (pure ACKs etc.) are dropped.
    bool keep_zero_payload = true;

    bool drops(Protocol p) const;
};

enum class DropReason {
    none,
    arp,
    dhcpv4,
    dhcpv6,
    icmpv4,
    icmpv6,
    non_ip,
    zero_payload,
    malformed,
};

std::string to_string(DropReason r);

/// Layer offsets located while parsing a packet.
struct PacketLayout {
    int ip_version = 0;          ///< 4, 6, or 0 for non-IP
    std::size_t network_offset = 0;
    std::size_t network_length = 0;  ///< captured bytes from network_offset onward
    std::size_t transport_offset = 0;  ///< absolute; 0 when no TCP/UDP header
    std::size_t transport_header_length = 0;
    std::size_t payload_length = 0;
    std::uint8_t transport_protocol = 0;
};

struct FilterDecision {
    bool keep = false;
    DropReason reason = DropReason::none;
    PacketLayout layout;
};

/// Keep/drop decision. Total over arbitrary bytes: anything that cannot be
/// parsed is dropped with DropReason::malformed.
FilterDecision filter_packet(const RawPacket& pkt, const FilterPolicy& policy);

/// One PBV as raw octets (normalization is applied when samples are loaded).
using PbvOctets = std::array<std::uint8_t, kPbvLength>;

/// Normalized Packet Byte Vector: exactly 1480 values, each b/127.5 - 1.
class PacketByteVector {
public:
    explicit PacketByteVector(const PbvOctets& octets);

    std::span<const float> values() const { return values_; }
    float operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

private:
    std::array<float, kPbvLength> values_;
};

/// Octets of the network-layer datagram with link header stripped, addresses
/// optionally zeroed, truncated or zero-padded to 1480. Requires a kept packet.
PbvOctets to_pbv_octets(const RawPacket& pkt, const FilterPolicy& policy);

PacketByteVector to_pbv(const RawPacket& pkt, const FilterPolicy& policy);

// ---------------------------------------------------------------- dataset build

struct ManifestEntry {
    std::filesystem::path path;
    std::optional<std::string> label;  ///< nullopt: unlabeled capture
};

/// JSON manifest: {"classes": [...], "entries": [{"path": ..., "label": name|null}]}.
/// Relative paths resolve against the manifest's directory.
struct Manifest {
    std::vector<std::string> classes;
    std::vector<ManifestEntry> entries;

    static Manifest load(const std::filesystem::path& path);
    static Manifest parse(std::string_view json_text, const std::filesystem::path& base_dir);
};

struct ClassBuildCounts {
    std::uint64_t total = 0;
    std::uint64_t kept = 0;
    std::map<std::string, std::uint64_t> dropped;  ///< keyed by DropReason name

    std::uint64_t dropped_total() const;
};

struct BuildSummary {
    std::vector<std::string> inputs;
    /// Keyed by class name; unlabeled captures count under "<unlabeled>".
    std::map<std::string, ClassBuildCounts> per_class;
    std::uint64_t total_packets = 0;
    std::uint64_t kept = 0;
    std::uint64_t dropped = 0;
};

inline constexpr const char* kUnlabeledKey = "<unlabeled>";

std::string summary_to_json(const BuildSummary& s);

/// Filters and converts every capture in manifest order and writes a PBVD
/// dataset. Packets are written in (entry order, packet order).
BuildSummary build_dataset(const Manifest& manifest, const FilterPolicy& policy,
                           const std::filesystem::path& out);

} // namespace bytesgan
