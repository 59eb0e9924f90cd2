#include "bytesgan/pbv.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "bytesgan/dataset.hpp"
#include "bytesgan/errors.hpp"
#include "bytesgan/util.hpp"

namespace bytesgan {

using json = nlohmann::json;

namespace {

constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherIpv6 = 0x86DD;
constexpr std::uint16_t kEtherArp = 0x0806;
constexpr std::uint16_t kEtherVlan = 0x8100;
constexpr std::uint16_t kEtherQinQ = 0x88A8;

constexpr std::uint8_t kProtoIcmp = 1;
constexpr std::uint8_t kProtoTcp = 6;
constexpr std::uint8_t kProtoUdp = 17;
constexpr std::uint8_t kProtoIcmpv6 = 58;

std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] << 8 | b[off + 1]);
}

FilterDecision drop(DropReason r) {
    FilterDecision d;
    d.keep = false;
    d.reason = r;
    return d;
}

/// Parses TCP/UDP at `off` (absolute) within an IP datagram ending at `end`.
/// Returns false when the transport header is truncated.
bool parse_transport(std::span<const std::uint8_t> b, std::uint8_t proto, std::size_t off, std::size_t end,
                     PacketLayout& l, std::uint16_t& src_port, std::uint16_t& dst_port) {
    l.transport_protocol = proto;
    if (proto == kProtoUdp) {
        if (end < off + 8) return false;
        src_port = be16(b, off);
        dst_port = be16(b, off + 2);
        l.transport_offset = off;
        l.transport_header_length = 8;
    } else if (proto == kProtoTcp) {
        if (end < off + 20) return false;
        const std::size_t hlen = static_cast<std::size_t>(b[off + 12] >> 4) * 4;
        if (hlen < 20 || end < off + hlen) return false;
        src_port = be16(b, off);
        dst_port = be16(b, off + 2);
        l.transport_offset = off;
        l.transport_header_length = hlen;
    } else {
        return true;
    }
    l.payload_length = end - off - l.transport_header_length;
    return true;
}

bool is_port(std::uint16_t a, std::uint16_t b, std::uint16_t p, std::uint16_t q) {
    return a == p || a == q || b == p || b == q;
}

FilterDecision classify_ipv4(std::span<const std::uint8_t> b, std::size_t off, const FilterPolicy& policy) {
    if (b.size() < off + 20) return drop(DropReason::malformed);
    if ((b[off] >> 4) != 4) return drop(DropReason::malformed);
    const std::size_t ihl = static_cast<std::size_t>(b[off] & 0x0F) * 4;
    const std::size_t total = be16(b, off + 2);
    if (ihl < 20 || b.size() < off + ihl || total < ihl) return drop(DropReason::malformed);
    const std::size_t end = std::min(b.size(), off + total);

    FilterDecision d;
    d.layout.ip_version = 4;
    d.layout.network_offset = off;
    d.layout.network_length = end - off;
    const std::uint8_t proto = b[off + 9];
    if (proto == kProtoIcmp) {
        if (policy.drops(Protocol::icmpv4)) return drop(DropReason::icmpv4);
        d.keep = true;
        return d;
    }
    const bool first_fragment = (be16(b, off + 6) & 0x1FFF) == 0;
    if (first_fragment && (proto == kProtoTcp || proto == kProtoUdp)) {
        std::uint16_t sp = 0, dp = 0;
        if (!parse_transport(b, proto, off + ihl, end, d.layout, sp, dp)) return drop(DropReason::malformed);
        if (proto == kProtoUdp && is_port(sp, dp, 67, 68) && policy.drops(Protocol::dhcpv4)) {
            return drop(DropReason::dhcpv4);
        }
        if (!policy.keep_zero_payload && d.layout.payload_length == 0) return drop(DropReason::zero_payload);
    }
    d.keep = true;
    return d;
}

FilterDecision classify_ipv6(std::span<const std::uint8_t> b, std::size_t off, const FilterPolicy& policy) {
    if (b.size() < off + 40) return drop(DropReason::malformed);
    if ((b[off] >> 4) != 6) return drop(DropReason::malformed);
    const std::size_t payload = be16(b, off + 4);
    // A zero payload length denotes a jumbogram; fall back to the captured size.
    const std::size_t end = payload == 0 ? b.size() : std::min(b.size(), off + 40 + payload);

    FilterDecision d;
    d.layout.ip_version = 6;
    d.layout.network_offset = off;
    d.layout.network_length = end - off;

    std::uint8_t next = b[off + 6];
    std::size_t cur = off + 40;
    bool fragmented_tail = false;
    for (int hops = 0; hops < 16; ++hops) {
        if (next == 0 || next == 43 || next == 60) {
            if (end < cur + 8) return drop(DropReason::malformed);
            const std::size_t len = (static_cast<std::size_t>(b[cur + 1]) + 1) * 8;
            if (end < cur + len) return drop(DropReason::malformed);
            next = b[cur];
            cur += len;
        } else if (next == 44) {
            if (end < cur + 8) return drop(DropReason::malformed);
            fragmented_tail = (be16(b, cur + 2) & 0xFFF8) != 0;
            next = b[cur];
            cur += 8;
        } else if (next == 51) {
            if (end < cur + 8) return drop(DropReason::malformed);
            const std::size_t len = (static_cast<std::size_t>(b[cur + 1]) + 2) * 4;
            if (end < cur + len) return drop(DropReason::malformed);
            next = b[cur];
            cur += len;
        } else {
            break;
        }
    }
    if (next == kProtoIcmpv6) {
        if (policy.drops(Protocol::icmpv6)) return drop(DropReason::icmpv6);
        d.keep = true;
        return d;
    }
    if (!fragmented_tail && (next == kProtoTcp || next == kProtoUdp)) {
        std::uint16_t sp = 0, dp = 0;
        if (!parse_transport(b, next, cur, end, d.layout, sp, dp)) return drop(DropReason::malformed);
        if (next == kProtoUdp && is_port(sp, dp, 546, 547) && policy.drops(Protocol::dhcpv6)) {
            return drop(DropReason::dhcpv6);
        }
        if (!policy.keep_zero_payload && d.layout.payload_length == 0) return drop(DropReason::zero_payload);
    }
    d.keep = true;
    return d;
}

FilterDecision non_ip(std::size_t off, std::size_t size, const FilterPolicy& policy) {
    if (policy.drop_non_ip) return drop(DropReason::non_ip);
    FilterDecision d;
    d.keep = true;
    d.layout.ip_version = 0;
    d.layout.network_offset = off;
    d.layout.network_length = size - off;
    return d;
}

} // namespace

std::uint8_t denormalize_octet(double v) {
    const double b = std::round((v + 1.0) * 127.5);
    return static_cast<std::uint8_t>(std::clamp(b, 0.0, 255.0));
}

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::arp: return "arp";
        case Protocol::dhcpv4: return "dhcpv4";
        case Protocol::dhcpv6: return "dhcpv6";
        case Protocol::icmpv4: return "icmpv4";
        case Protocol::icmpv6: return "icmpv6";
    }
    return "unknown";
}

std::optional<Protocol> parse_protocol(std::string_view name) {
    for (auto p : {Protocol::arp, Protocol::dhcpv4, Protocol::dhcpv6, Protocol::icmpv4, Protocol::icmpv6}) {
        if (to_string(p) == name) return p;
    }
    return std::nullopt;
}

bool FilterPolicy::drops(Protocol p) const {
    return std::find(dropped_protocols.begin(), dropped_protocols.end(), p) != dropped_protocols.end();
}

std::string to_string(DropReason r) {
    switch (r) {
        case DropReason::none: return "none";
        case DropReason::arp: return "arp";
        case DropReason::dhcpv4: return "dhcpv4";
        case DropReason::dhcpv6: return "dhcpv6";
        case DropReason::icmpv4: return "icmpv4";
        case DropReason::icmpv6: return "icmpv6";
        case DropReason::non_ip: return "non_ip";
        case DropReason::zero_payload: return "zero_payload";
        case DropReason::malformed: return "malformed";
    }
    return "unknown";
}

FilterDecision filter_packet(const RawPacket& pkt, const FilterPolicy& policy) {
    std::span<const std::uint8_t> b = pkt.bytes;
    std::size_t off = 0;
    int version = 0;
    if (pkt.link_type == static_cast<std::uint32_t>(LinkType::ethernet)) {
        if (b.size() < 14) return drop(DropReason::malformed);
        std::uint16_t type = be16(b, 12);
        off = 14;
        while (type == kEtherVlan || type == kEtherQinQ) {
            if (b.size() < off + 4) return drop(DropReason::malformed);
            type = be16(b, off + 2);
            off += 4;
        }
        if (type == kEtherArp) {
            if (policy.drops(Protocol::arp)) return drop(DropReason::arp);
            return non_ip(off, b.size(), policy);
        }
        if (type == kEtherIpv4) {
            version = 4;
        } else if (type == kEtherIpv6) {
            version = 6;
        } else {
            return non_ip(off, b.size(), policy);
        }
    } else if (pkt.link_type == static_cast<std::uint32_t>(LinkType::raw_ip)) {
        if (b.empty()) return drop(DropReason::malformed);
        version = b[0] >> 4;
        if (version != 4 && version != 6) return drop(DropReason::malformed);
    } else {
        return drop(DropReason::malformed);
    }
    return version == 4 ? classify_ipv4(b, off, policy) : classify_ipv6(b, off, policy);
}

PacketByteVector::PacketByteVector(const PbvOctets& octets) {
    for (std::size_t i = 0; i < kPbvLength; ++i) values_[i] = normalize_octet(octets[i]);
}

PbvOctets to_pbv_octets(const RawPacket& pkt, const FilterPolicy& policy) {
    const auto d = filter_packet(pkt, policy);
    require(d.keep, "to_pbv: packet was not kept by the filter");
    const auto& l = d.layout;
    std::vector<std::uint8_t> datagram(pkt.bytes.begin() + static_cast<std::ptrdiff_t>(l.network_offset),
                                       pkt.bytes.begin() + static_cast<std::ptrdiff_t>(l.network_offset + l.network_length));
    if (policy.zero_ip_addresses) {
        if (l.ip_version == 4) {
            std::fill(datagram.begin() + 12, datagram.begin() + 20, 0);
        } else if (l.ip_version == 6) {
            std::fill(datagram.begin() + 8, datagram.begin() + 40, 0);
        }
    }
    if (!policy.include_transport_header && l.transport_header_length > 0) {
        const auto first = datagram.begin() + static_cast<std::ptrdiff_t>(l.transport_offset - l.network_offset);
        datagram.erase(first, first + static_cast<std::ptrdiff_t>(l.transport_header_length));
    }
    PbvOctets out{};
    std::copy_n(datagram.begin(), std::min(datagram.size(), kPbvLength), out.begin());
    return out;
}

PacketByteVector to_pbv(const RawPacket& pkt, const FilterPolicy& policy) {
    return PacketByteVector(to_pbv_octets(pkt, policy));
}

// ---------------------------------------------------------------- manifest / build

Manifest Manifest::parse(std::string_view text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("manifest must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "classes" && key != "entries") throw ConfigError("manifest: unknown key '" + key + "'");
    }
    if (!doc.contains("classes") || !doc["classes"].is_array()) throw ConfigError("manifest: 'classes' array required");
    if (!doc.contains("entries") || !doc["entries"].is_array()) throw ConfigError("manifest: 'entries' array required");
    Manifest m;
    for (const auto& c : doc["classes"]) {
        if (!c.is_string()) throw ConfigError("manifest: class names must be strings");
        m.classes.push_back(c.get<std::string>());
    }
    ClassSchema schema(m.classes);  // validates uniqueness
    for (const auto& e : doc["entries"]) {
        if (!e.is_object()) throw ConfigError("manifest: entries must be objects");
        for (const auto& [key, _] : e.items()) {
            if (key != "path" && key != "label") throw ConfigError("manifest entry: unknown key '" + key + "'");
        }
        if (!e.contains("path") || !e["path"].is_string()) throw ConfigError("manifest entry: 'path' string required");
        ManifestEntry entry;
        std::filesystem::path p = e["path"].get<std::string>();
        entry.path = p.is_absolute() ? p : base_dir / p;
        if (e.contains("label") && !e["label"].is_null()) {
            if (!e["label"].is_string()) throw ConfigError("manifest entry: 'label' must be a string or null");
            entry.label = e["label"].get<std::string>();
            if (!schema.index_of(*entry.label)) {
                throw ConfigError("manifest entry: label '" + *entry.label + "' is not a declared class");
            }
        }
        m.entries.push_back(std::move(entry));
    }
    return m;
}

Manifest Manifest::load(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path.string());
    return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                 path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

std::uint64_t ClassBuildCounts::dropped_total() const {
    std::uint64_t n = 0;
    for (const auto& [_, c] : dropped) n += c;
    return n;
}

std::string summary_to_json(const BuildSummary& s) {
    json doc;
    doc["inputs"] = s.inputs;
    doc["total_packets"] = s.total_packets;
    doc["kept"] = s.kept;
    doc["dropped"] = s.dropped;
    json per = json::object();
    for (const auto& [name, c] : s.per_class) {
        per[name] = {{"total", c.total}, {"kept", c.kept}, {"dropped", c.dropped}};
    }
    doc["per_class"] = per;
    return doc.dump(2);
}

BuildSummary build_dataset(const Manifest& manifest, const FilterPolicy& policy, const std::filesystem::path& out) {
    ClassSchema schema(manifest.classes);
    TrafficDataset ds(schema);
    BuildSummary summary;
    for (const auto& entry : manifest.entries) {
        summary.inputs.push_back(entry.path.string());
        const std::uint16_t label =
            entry.label ? static_cast<std::uint16_t>(*schema.index_of(*entry.label)) : kUnlabeled;
        auto& counts = summary.per_class[entry.label ? *entry.label : std::string(kUnlabeledKey)];
        PcapReader reader(entry.path);
        while (auto pkt = reader.next()) {
            ++counts.total;
            ++summary.total_packets;
            const auto decision = filter_packet(*pkt, policy);
            if (!decision.keep) {
                ++counts.dropped[to_string(decision.reason)];
                ++summary.dropped;
                continue;
            }
            ds.add(to_pbv_octets(*pkt, policy), label);
            ++counts.kept;
            ++summary.kept;
        }
    }
    ds.save(out);
    return summary;
}

} // namespace bytesgan
