#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>

#include "are/direct_table.hpp"

using namespace are;

TEST_CASE("direct table places losses at their event index") {
    const EventLossTable elt{10, {{EventId(2), 5.0}, {EventId(7), 3.5}}, {2.0, 1.0, 100.0, 0.5}};
    const DirectAccessTable table(elt);
    REQUIRE(table.slot_count() == 11);
    const auto losses = table.losses();
    for (std::size_t i = 0; i < losses.size(); ++i) {
        CAPTURE(i);
        CHECK(losses[i] == (i == 2 ? 5.0 : i == 7 ? 3.5 : 0.0));
    }
    CHECK(table.nonzero_count() == 2);
    CHECK(table.terms() == elt.terms);

    CHECK(table.lookup(EventId(7)) == 3.5);
    CHECK(table.lookup(EventId(1)) == 0.0);
    CHECK_THROWS_AS(table.lookup(EventId(11)), TableRangeError);
    CHECK_THROWS_AS(table.lookup(EventId(0)), TableRangeError);
}

TEST_CASE("empty ELT gives an all-zero table") {
    const DirectAccessTable table(EventLossTable{50, {}, {}});
    CHECK(table.nonzero_count() == 0);
    for (const double x : table.losses()) {
        CHECK(x == 0.0);
    }
}

TEST_CASE("explicit zero loss is stored as absence and not counted") {
    const DirectAccessTable table(EventLossTable{5, {{EventId(3), 0.0}, {EventId(4), 1.0}}, {}});
    CHECK(table.nonzero_count() == 1);
    CHECK(table.lookup(EventId(3)) == 0.0);
}

TEST_CASE("building from an out-of-catalog record fails") {
    CHECK_THROWS_AS(DirectAccessTable(EventLossTable{10, {{EventId(11), 1.0}}, {}}), TableRangeError);
}

TEST_CASE("2M-event catalog with a 20K-record ELT: 1.98M zero slots") {
    std::mt19937_64 rng(7);
    EventLossTable elt;
    elt.catalog_size = 2'000'000;
    std::vector<std::uint32_t> ids(2'000'000);
    std::iota(ids.begin(), ids.end(), 1u);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < 20'000; ++i) {
        elt.records.push_back({EventId(ids[i]), 1.0 + static_cast<double>(i)});
    }
    const DirectAccessTable table(elt);
    CHECK(table.catalog_size() == 2'000'000);
    CHECK(table.nonzero_count() == 20'000);
    std::size_t zeros = 0;
    for (std::size_t e = 1; e < table.slot_count(); ++e) {
        zeros += table.losses()[e] == 0.0;
    }
    CHECK(zeros == 1'980'000);
}

TEST_CASE("memory footprint accounting") {
    SUBCASE("empty sequence") {
        const auto fp = memory_footprint(std::span<const DirectAccessTable>{});
        CHECK(fp.loss_slots == 0);
        CHECK(fp.loss_bytes == 0);
    }
    SUBCASE("one table over 1000 events") {
        const std::vector<DirectAccessTable> tables{DirectAccessTable(EventLossTable{1000, {}, {}})};
        const auto fp = memory_footprint(tables);
        CHECK(fp.loss_slots == 1000);
        CHECK(fp.allocated_slots == 1001);
        CHECK(fp.loss_bytes == 8008);
        CHECK(fp.overhead_bytes > 0);
    }
    SUBCASE("15 tables over a 2M catalog") {
        std::vector<DirectAccessTable> tables;
        for (int i = 0; i < 15; ++i) {
            tables.emplace_back(EventLossTable{2'000'000, {{EventId(1 + i), 1.0}}, {}});
        }
        const auto fp = memory_footprint(tables);
        CHECK(fp.loss_slots == 30'000'000);
        CHECK(fp.loss_bytes == 15ull * 2'000'001 * 8);
    }
}

TEST_CASE("build then lookup reconstructs the source mapping exactly") {
    // Property over random ELTs; the hash map is the reference.
    std::mt19937_64 rng(42);
    for (int round = 0; round < 50; ++round) {
        const auto catalog = std::uniform_int_distribution<std::uint32_t>(1, 10'000)(rng);
        std::unordered_map<std::uint32_t, double> reference;
        EventLossTable elt{catalog, {}, {}};
        for (std::uint32_t e = 1; e <= catalog; ++e) {
            if (std::bernoulli_distribution(0.1)(rng)) {
                const double loss = std::uniform_real_distribution<double>(0.0, 1e6)(rng);
                elt.records.push_back({EventId(e), loss});
                reference[e] = loss;
            }
        }
        std::shuffle(elt.records.begin(), elt.records.end(), rng);
        const DirectAccessTable table(elt);
        for (std::uint32_t e = 1; e <= catalog; ++e) {
            const auto it = reference.find(e);
            const double expected = it == reference.end() ? 0.0 : it->second;
            if (table.lookup(EventId(e)) != expected) {
                FAIL("mismatch at event " << e << " in round " << round);
            }
        }
    }
}
