#include <doctest.h>

#include <algorithm>
#include <set>

#include "bytesgan/dataset.hpp"
#include "bytesgan/errors.hpp"
#include "bytesgan/util.hpp"
#include "packets.hpp"

using namespace bytesgan;
using bytesgan::testing::scratch_dir;

namespace {

// Class c, sample i: octet 0 = c, octets 1..2 = i, the rest a fixed ramp.
TrafficDataset toy_dataset(std::size_t classes, std::size_t per_class, std::size_t unlabeled = 0) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
    TrafficDataset ds{ClassSchema(names)};
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            PbvOctets o{};
            o[0] = static_cast<std::uint8_t>(c);
            o[1] = static_cast<std::uint8_t>(i >> 8);
            o[2] = static_cast<std::uint8_t>(i);
            for (std::size_t j = 3; j < kPbvLength; ++j) o[j] = static_cast<std::uint8_t>(j * 7 + c);
            ds.add(o, static_cast<std::uint16_t>(c));
        }
    }
    for (std::size_t i = 0; i < unlabeled; ++i) {
        PbvOctets o{};
        o[0] = 0xEE;
        ds.add(o, kUnlabeled);
    }
    return ds;
}

std::set<std::uint64_t> id_set(const SamplePool& p) { return {p.ids().begin(), p.ids().end()}; }

} // namespace

TEST_CASE("class schema validation") {
    CHECK_THROWS_AS(ClassSchema({"a"}), ConfigError);
    CHECK_THROWS_AS(ClassSchema({"a", "a"}), ConfigError);
    CHECK_THROWS_AS(ClassSchema({"a", ""}), ConfigError);
    ClassSchema s({"x", "y", "z"});
    CHECK(s.size() == 3);
    CHECK(s.index_of("z") == 2u);
    CHECK(!s.index_of("w"));
}

TEST_CASE("dataset file round-trip is byte exact") {
    auto dir = scratch_dir("dataset_rt");
    auto ds = toy_dataset(3, 5, 2);
    ds.save(dir / "d.pbvd");
    auto back = TrafficDataset::load(dir / "d.pbvd");
    CHECK(back.schema() == ds.schema());
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.label(i) == ds.label(i));
        CHECK(std::equal(ds.octets(i).begin(), ds.octets(i).end(), back.octets(i).begin()));
    }
    CHECK(back.serialize() == ds.serialize());
    CHECK(back.class_counts() == std::vector<std::size_t>{5, 5, 5});
    auto v = back.vector(0);
    CHECK(v.size() == kPbvLength);
    CHECK(v[0] == -1.0f);
}

TEST_CASE("dataset format layout") {
    TrafficDataset ds{ClassSchema({"ab", "c"})};
    PbvOctets o{};
    o[0] = 9;
    ds.add(o, 1);
    auto b = ds.serialize();
    REQUIRE(b.size() == 4 + 2 + 2 + (2 + 2) + (2 + 1) + 8 + 2 + kPbvLength);
    CHECK(std::string(b.begin(), b.begin() + 4) == "PBVD");
    CHECK(b[4] == 1);  // version, little-endian
    CHECK(b[5] == 0);
    CHECK(b[6] == 2);  // class count
    CHECK(b[8] == 2);
    CHECK(b[10] == 'a');
    CHECK(b[15] == 1);  // sample count
    CHECK(b[23] == 1);  // first label
    CHECK(b[25] == 9);  // first octet
}

TEST_CASE("dataset loader rejects corrupt files") {
    auto ds = toy_dataset(2, 5);
    auto bytes = ds.serialize();

    auto short_by_one = bytes;
    short_by_one.resize(bytes.size() - (2 + kPbvLength));
    try {
        TrafficDataset::deserialize(short_by_one, "mem");
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("10 samples") != std::string::npos);
    }

    auto bad_version = bytes;
    bad_version[4] = 7;
    CHECK_THROWS_AS(TrafficDataset::deserialize(bad_version, "mem"), FormatError);

    auto bad_label = bytes;
    const std::size_t first_label = 4 + 2 + 2 + (2 + 2) * 2 + 8;
    bad_label[first_label] = 5;
    CHECK_THROWS_AS(TrafficDataset::deserialize(bad_label, "mem"), FormatError);

    auto bad_magic = bytes;
    bad_magic[0] = 'Q';
    CHECK_THROWS_AS(TrafficDataset::deserialize(bad_magic, "mem"), FormatError);
    CHECK_THROWS_AS(TrafficDataset::load("/nonexistent/file.pbvd"), IoError);
}

TEST_CASE("splits are stratified, disjoint and reproducible") {
    auto ds = toy_dataset(4, 50, 10);
    SplitSpec spec;
    spec.labeled_per_class = 5;
    spec.unlabeled_per_class = 20;
    spec.test_fraction = 0.2;
    spec.seed = 7;
    auto s = make_splits(ds, spec);
    CHECK(s.labeled.size() == 20);
    CHECK(s.unlabeled.size() == 80);
    CHECK(s.test.size() == 40);
    std::vector<int> per(4, 0);
    for (auto y : s.labeled.labels()) ++per[y];
    CHECK(per == std::vector<int>{5, 5, 5, 5});

    auto L = id_set(s.labeled), U = id_set(s.unlabeled), T = id_set(s.test);
    for (auto id : L) CHECK((!U.count(id) && !T.count(id)));
    for (auto id : U) CHECK(!T.count(id));
    // a pool row is the dataset row with that identity
    for (std::size_t i = 0; i < s.labeled.size(); ++i) {
        const auto id = s.labeled.id(i);
        CHECK(std::equal(ds.octets(id).begin(), ds.octets(id).end(), s.labeled.octets(i).begin()));
        CHECK(s.labeled.label(i) == ds.label(id));
    }

    auto again = make_splits(ds, spec);
    CHECK(again.labeled.ids() == s.labeled.ids());
    CHECK(again.unlabeled.ids() == s.unlabeled.ids());
    CHECK(again.test.ids() == s.test.ids());
    spec.seed = 8;
    CHECK(make_splits(ds, spec).labeled.ids() != s.labeled.ids());
}

TEST_CASE("all-remaining unlabeled draw includes the dataset's unlabeled rows") {
    auto ds = toy_dataset(2, 20, 6);
    SplitSpec spec;
    spec.labeled_per_class = 2;
    spec.test_fraction = 0.25;
    auto s = make_splits(ds, spec);
    CHECK(s.test.size() == 10);
    CHECK(s.labeled.size() == 4);
    CHECK(s.unlabeled.size() == 2 * (20 - 5 - 2) + 6);
}

TEST_CASE("splits report capacity shortfalls by class") {
    auto ds = toy_dataset(2, 10);
    SplitSpec spec;
    spec.labeled_per_class = 10;
    spec.test_fraction = 0.5;
    try {
        make_splits(ds, spec);
        FAIL("expected a capacity error");
    } catch (const CapacityError& e) {
        CHECK(std::string(e.what()).find("c0") != std::string::npos);
    }
    spec.labeled_per_class = 3;
    spec.unlabeled_per_class = 3;
    CHECK_THROWS_AS(make_splits(ds, spec), CapacityError);
    spec.labeled_per_class = 0;
    CHECK_THROWS_AS(make_splits(ds, spec), ConfigError);
}

TEST_CASE("batches: sizes, determinism and per-epoch coverage") {
    auto ds = toy_dataset(2, 5);
    auto pool = LabeledPool::from_dataset(ds);
    auto b = batches(pool, 4, 7, 0);
    REQUIRE(b.size() == 3);
    CHECK(b[0].rows == 4);
    CHECK(b[1].rows == 4);
    CHECK(b[2].rows == 2);
    auto again = batches(pool, 4, 7, 0);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(again[i].ids == b[i].ids);
    auto next_epoch = batches(pool, 4, 7, 1);
    std::vector<std::uint64_t> e0, e1;
    for (auto& x : b) e0.insert(e0.end(), x.ids.begin(), x.ids.end());
    for (auto& x : next_epoch) e1.insert(e1.end(), x.ids.begin(), x.ids.end());
    CHECK(e0 != e1);

    for (const auto& x : b) {
        CHECK(x.kind == BatchKind::labeled);
        CHECK(x.vectors.size() == x.rows * kPbvLength);
        for (std::size_t r = 0; r < x.rows; ++r) CHECK(x.labels[r] == static_cast<int>(ds.label(x.ids[r])));
    }
    CHECK(batches(LabeledPool{}, 4, 1, 0).empty());
}

TEST_CASE("an epoch covers a 1000-sample pool exactly once") {
    auto ds = toy_dataset(4, 250);
    auto pool = LabeledPool::from_dataset(ds);
    std::multiset<std::uint64_t> seen;
    std::multiset<std::vector<std::uint8_t>> rows_seen, rows_pool;
    for (const auto& b : batches(pool, 64, 99, 3)) {
        seen.insert(b.ids.begin(), b.ids.end());
        for (std::size_t r = 0; r < b.rows; ++r) {
            std::vector<std::uint8_t> row(kPbvLength);
            for (std::size_t j = 0; j < kPbvLength; ++j) row[j] = denormalize_octet(b.vectors[r * kPbvLength + j]);
            rows_seen.insert(row);
        }
    }
    for (std::size_t i = 0; i < pool.size(); ++i) rows_pool.insert({pool.octets(i).begin(), pool.octets(i).end()});
    CHECK(seen.size() == 1000);
    CHECK(std::set<std::uint64_t>(seen.begin(), seen.end()).size() == 1000);
    CHECK(rows_seen == rows_pool);
}

TEST_CASE("unlabeled batches carry no labels") {
    auto ds = toy_dataset(2, 10);
    SplitSpec spec;
    spec.labeled_per_class = 1;
    auto s = make_splits(ds, spec);
    for (const auto& b : batches(s.unlabeled, 3, 1, 0)) {
        CHECK(b.kind == BatchKind::unlabeled);
        for (int y : b.labels) CHECK(y == kNoLabel);
    }
}
