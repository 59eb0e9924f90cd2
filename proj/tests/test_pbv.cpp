#include <doctest.h>

#include <fstream>
#include <random>

#include "bytesgan/dataset.hpp"
#include "bytesgan/errors.hpp"
#include "bytesgan/pbv.hpp"
#include "bytesgan/util.hpp"
#include "packets.hpp"

using namespace bytesgan;
using namespace bytesgan::testing;

namespace {

RawPacket eth_packet(Bytes b) { return RawPacket{1, {}, std::move(b)}; }

void write_capture(const std::filesystem::path& p, const std::vector<Bytes>& frames, std::uint32_t link = 1) {
    PcapWriter w(p, link);
    std::uint32_t t = 0;
    for (const auto& f : frames) w.write(f, 1700000000 + t, t * 10), ++t;
}

} // namespace

TEST_CASE("every octet survives normalisation round-trip") {
    for (int b = 0; b < 256; ++b) {
        const float v = normalize_octet(static_cast<std::uint8_t>(b));
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
        CHECK(denormalize_octet(v) == b);
        CHECK(static_cast<int>(std::lround((v + 1.0) * 127.5)) == b);
    }
    CHECK(normalize_octet(0) == -1.0f);
    CHECK(normalize_octet(255) == 1.0f);
}

TEST_CASE("capture round-trip preserves records in order") {
    auto dir = scratch_dir("pcap_roundtrip");
    std::vector<Bytes> frames{tls_frame(10, 1), arp_request(), tls_frame(300, 2)};
    write_capture(dir / "three.pcap", frames);
    auto pkts = read_capture(dir / "three.pcap");
    REQUIRE(pkts.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(pkts[i].bytes == frames[i]);
        CHECK(pkts[i].link_type == 1u);
        CHECK(pkts[i].timestamp.seconds == 1700000000u + i);
        CHECK(pkts[i].timestamp.fraction == i * 10);
    }

    write_capture(dir / "empty.pcap", {});
    CHECK(read_capture(dir / "empty.pcap").empty());
}

TEST_CASE("capture reader handles byte-swapped and nanosecond headers") {
    auto dir = scratch_dir("pcap_variants");
    Bytes frame = tls_frame(20);
    for (bool big_endian : {false, true}) {
        for (std::uint32_t magic : {0xA1B2C3D4u, 0xA1B23C4Du}) {
            Bytes f;
            auto put32 = [&](std::uint32_t v) {
                for (int i = 0; i < 4; ++i) {
                    const int s = big_endian ? 24 - 8 * i : 8 * i;
                    f.push_back(static_cast<std::uint8_t>(v >> s));
                }
            };
            auto put16v = [&](std::uint16_t v) {
                if (big_endian) f.insert(f.end(), {std::uint8_t(v >> 8), std::uint8_t(v)});
                else f.insert(f.end(), {std::uint8_t(v), std::uint8_t(v >> 8)});
            };
            put32(magic);
            put16v(2);
            put16v(4);
            put32(0);
            put32(0);
            put32(65535);
            put32(1);
            put32(5);
            put32(999);
            put32(static_cast<std::uint32_t>(frame.size()));
            put32(static_cast<std::uint32_t>(frame.size()));
            f.insert(f.end(), frame.begin(), frame.end());
            const auto path = dir / "v.pcap";
            write_file_bytes(path.string(), f);
            auto pkts = read_capture(path);
            REQUIRE(pkts.size() == 1);
            CHECK(pkts[0].bytes == frame);
            CHECK(pkts[0].timestamp.seconds == 5u);
            CHECK(pkts[0].timestamp.fraction == 999u);
            CHECK(pkts[0].timestamp.nanosecond == (magic == 0xA1B23C4Du));
        }
    }
}

TEST_CASE("capture reader errors") {
    auto dir = scratch_dir("pcap_errors");
    CHECK_THROWS_AS(read_capture(dir / "missing.pcap"), IoError);

    write_file_bytes((dir / "bad.pcap").string(), Bytes{0xEF, 0xBE, 0xAD, 0xDE, 0, 0, 0, 0, 0, 0, 0, 0,
                                                        0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    CHECK_THROWS_AS(read_capture(dir / "bad.pcap"), FormatError);

    write_capture(dir / "ok.pcap", {tls_frame(50), tls_frame(60)});
    auto bytes = read_file_bytes((dir / "ok.pcap").string());
    bytes.resize(bytes.size() - 7);
    write_file_bytes((dir / "trunc.pcap").string(), bytes);
    try {
        read_capture(dir / "trunc.pcap");
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("record 1") != std::string::npos);
    }
}

TEST_CASE("filter keeps TLS and drops ARP, DHCP, ICMP and non-IP") {
    FilterPolicy p;
    CHECK(filter_packet(eth_packet(tls_frame()), p).keep);
    CHECK(filter_packet(eth_packet(arp_request()), p).reason == DropReason::arp);
    CHECK(filter_packet(eth_packet(icmp_echo()), p).reason == DropReason::icmpv4);
    CHECK(filter_packet(eth_packet(ethernet(0x0800, ipv4(17, udp(68, 67, Bytes(240, 0))))), p).reason ==
          DropReason::dhcpv4);
    CHECK(filter_packet(eth_packet(ethernet(0x86DD, ipv6(17, udp(546, 547, Bytes(40, 1))))), p).reason ==
          DropReason::dhcpv6);
    CHECK(filter_packet(eth_packet(ethernet(0x86DD, ipv6(58, Bytes{128, 0, 0, 0, 0, 1, 0, 1}))), p).reason ==
          DropReason::icmpv6);
    CHECK(filter_packet(eth_packet(ethernet(0x88CC, Bytes(40, 7))), p).reason == DropReason::non_ip);
    CHECK(filter_packet(eth_packet(ethernet(0x86DD, ipv6(6, tcp(443, 50000, tls_payload(30))))), p).keep);
    CHECK(filter_packet(eth_packet(vlan(0x0800, ipv4(6, tcp(1, 443, tls_payload(5))))), p).keep);
    CHECK(filter_packet(eth_packet(ethernet(0x0800, ipv4(17, udp(5353, 53, Bytes(30, 1))))), p).keep);

    FilterPolicy permissive;
    permissive.dropped_protocols = {};
    permissive.drop_non_ip = false;
    CHECK(filter_packet(eth_packet(icmp_echo()), permissive).keep);
    CHECK(filter_packet(eth_packet(arp_request()), permissive).keep);

    FilterPolicy no_empty;
    no_empty.keep_zero_payload = false;
    CHECK(filter_packet(eth_packet(ethernet(0x0800, ipv4(6, tcp(1, 443, {})))), no_empty).reason ==
          DropReason::zero_payload);
}

TEST_CASE("filter is total over arbitrary bytes") {
    std::mt19937 rng(123);
    FilterPolicy p;
    for (int i = 0; i < 20000; ++i) {
        Bytes b(rng() % 120);
        for (auto& x : b) x = static_cast<std::uint8_t>(rng());
        if (i % 3 == 0 && b.size() > 14) {
            b[12] = 0x08;
            b[13] = (i % 2) ? 0x00 : 0xDD;
            if (i % 2 == 0) b[12] = 0x86;
            b[14] = (i % 2) ? 0x45 : 0x60;
        }
        const std::uint32_t link = (i % 5 == 0) ? 101u : (i % 7 == 0 ? 228u : 1u);
        RawPacket pkt{link, {}, b};
        auto d1 = filter_packet(pkt, p);
        auto d2 = filter_packet(pkt, p);
        CHECK(d1.keep == d2.keep);
        CHECK(d1.reason == d2.reason);
        if (d1.keep) CHECK(to_pbv_octets(pkt, p).size() == kPbvLength);
    }
}

TEST_CASE("PBV strips the link layer, zeroes addresses, truncates and pads") {
    FilterPolicy p;
    auto frame = tls_frame(75);  // 20 + 20 + 80 byte datagram
    auto o = to_pbv_octets(eth_packet(frame), p);
    const std::size_t dlen = frame.size() - 14;
    CHECK(o[0] == 0x45);
    for (std::size_t i = 12; i < 20; ++i) CHECK(o[i] == 0);
    for (std::size_t i = 20; i < dlen; ++i) CHECK(o[i] == frame[14 + i]);
    for (std::size_t i = dlen; i < kPbvLength; ++i) CHECK(o[i] == 0);
    auto v = to_pbv(eth_packet(frame), p);
    CHECK(v.size() == kPbvLength);
    CHECK(v[dlen] == -1.0f);

    FilterPolicy keep_addr;
    keep_addr.zero_ip_addresses = false;
    auto o2 = to_pbv_octets(eth_packet(frame), keep_addr);
    CHECK(o2[12] == 0xC0);

    FilterPolicy no_transport;
    no_transport.include_transport_header = false;
    auto o3 = to_pbv_octets(eth_packet(frame), no_transport);
    CHECK(o3[20] == 0x17);  // TLS record header follows the IP header directly

    // raw-IP datagram of 0xFF bytes at the front
    Bytes dg = ipv4(6, tcp(1, 2, Bytes(2000, 0xFF)));
    dg[0] = 0x45;
    auto big = to_pbv(RawPacket{101, {}, dg}, keep_addr);
    CHECK(big.size() == kPbvLength);
    CHECK(big[kPbvLength - 1] == 1.0f);

    CHECK_THROWS_AS(to_pbv(eth_packet(arp_request()), p), ContractError);
}

TEST_CASE("PBV length is 1480 for every datagram length") {
    FilterPolicy p;
    p.drop_non_ip = false;
    for (std::size_t n : {0u, 1u, 739u, 1480u, 1481u, 65535u}) {
        Bytes b(n, 0xAB);
        auto o = to_pbv_octets(RawPacket{1, {}, ethernet(0x88B5, b)}, p);
        CHECK(o.size() == kPbvLength);
        const std::size_t shown = std::min<std::size_t>(n, kPbvLength);
        for (std::size_t i = 0; i < kPbvLength; ++i) CHECK(o[i] == (i < shown ? 0xAB : 0));
    }
}

TEST_CASE("IP total length bounds the datagram (Ethernet padding ignored)") {
    FilterPolicy p;
    auto frame = ethernet(0x0800, ipv4(6, tcp(1, 443, {})));
    frame.resize(frame.size() + 6, 0xEE);  // minimum-frame padding
    auto o = to_pbv_octets(eth_packet(frame), p);
    for (std::size_t i = 40; i < kPbvLength; ++i) CHECK(o[i] == 0);
}

TEST_CASE("manifest parsing") {
    auto m = Manifest::parse(R"({"classes":["a","b"],"entries":[{"path":"x.pcap","label":"a"},{"path":"/abs.pcap","label":null}]})", "/base");
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].path == std::filesystem::path("/base/x.pcap"));
    CHECK(m.entries[0].label == "a");
    CHECK(m.entries[1].path == std::filesystem::path("/abs.pcap"));
    CHECK(!m.entries[1].label);
    CHECK_THROWS_AS(Manifest::parse(R"({"classes":["a","a"],"entries":[]})", "."), ConfigError);
    CHECK_THROWS_AS(Manifest::parse(R"({"classes":["a","b"],"entries":[],"x":1})", "."), ConfigError);
    CHECK_THROWS_AS(Manifest::parse(R"({"classes":["a","b"],"entries":[{"path":"p","label":"c"}]})", "."), ConfigError);
    CHECK_THROWS_AS(Manifest::parse("not json", "."), ConfigError);
}

TEST_CASE("build_dataset counts, orders and reproduces its output") {
    auto dir = scratch_dir("build");
    write_capture(dir / "a.pcap", {tls_frame(10, 1), arp_request(), tls_frame(20, 2), icmp_echo()});
    write_capture(dir / "b.pcap", {tls_frame(30, 3)});
    write_capture(dir / "arp.pcap", {arp_request(), arp_request()});
    write_text_file((dir / "m.json").string(),
                    R"({"classes":["web","mail"],"entries":[{"path":"a.pcap","label":"web"},)"
                    R"({"path":"b.pcap","label":"mail"},{"path":"arp.pcap","label":null}]})");
    auto m = Manifest::load(dir / "m.json");
    auto s1 = build_dataset(m, FilterPolicy{}, dir / "out1.pbvd");
    auto s2 = build_dataset(m, FilterPolicy{}, dir / "out2.pbvd");
    CHECK(file_digest((dir / "out1.pbvd").string()) == file_digest((dir / "out2.pbvd").string()));
    CHECK(s1.inputs.size() == 3);
    CHECK(s1.total_packets == 7);
    CHECK(s1.kept == 3);
    CHECK(s1.dropped == 4);
    CHECK(s1.kept + s1.dropped == s1.total_packets);
    CHECK(s1.per_class["web"].dropped["arp"] == 1);
    CHECK(s1.per_class["web"].dropped["icmpv4"] == 1);
    CHECK(s1.per_class[kUnlabeledKey].dropped_total() == 2);
    CHECK(summary_to_json(s1) == summary_to_json(s2));

    auto ds = TrafficDataset::load(dir / "out1.pbvd");
    REQUIRE(ds.size() == 3);
    CHECK(ds.label(0) == 0);
    CHECK(ds.label(2) == 1);
    auto first = to_pbv_octets(eth_packet(tls_frame(10, 1)), FilterPolicy{});
    CHECK(std::equal(first.begin(), first.end(), ds.octets(0).begin()));

    write_text_file((dir / "missing.json").string(), R"({"classes":["x","y"],"entries":[{"path":"nope.pcap","label":"x"}]})");
    try {
        build_dataset(Manifest::load(dir / "missing.json"), FilterPolicy{}, dir / "o.pbvd");
        FAIL("expected an I/O error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("nope.pcap") != std::string::npos);
    }
}

TEST_CASE("an all-ARP capture yields an empty dataset") {
    auto dir = scratch_dir("build_arp");
    write_capture(dir / "arp.pcap", {arp_request(), arp_request(), arp_request()});
    Manifest m;
    m.classes = {"x", "y"};
    m.entries = {{dir / "arp.pcap", std::string("x")}};
    auto s = build_dataset(m, FilterPolicy{}, dir / "o.pbvd");
    CHECK(s.kept == 0);
    CHECK(s.dropped == 3);
    CHECK(TrafficDataset::load(dir / "o.pbvd").size() == 0);
}
