#include "doctest.h"

#include <cmath>
#include <random>

#include "are/engine.hpp"
#include "are/generator.hpp"
#include "support/naive_oracle.hpp"

using namespace are;

namespace {

std::vector<const DirectAccessTable*> ptrs(const std::vector<DirectAccessTable>& tables) {
    std::vector<const DirectAccessTable*> out;
    for (const auto& t : tables) out.push_back(&t);
    return out;
}

bool close_rel(double a, double b, double rel = 1e-9) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

double trial_of(const std::vector<std::uint32_t>& events, const Layer& layer) {
    YearEventTable yet(layer.elts.front()->catalog_size);
    std::vector<EventOccurrence> occ;
    for (std::size_t i = 0; i < events.size(); ++i) {
        occ.push_back({EventId(events[i]), static_cast<double>(i) / static_cast<double>(events.size())});
    }
    yet.add_trial(occ);
    std::vector<DirectAccessTable> tables;
    for (const auto& e : layer.elts) tables.emplace_back(*e);
    const auto p = ptrs(tables);
    return analyse_trial(yet.trial(0), layer, p);
}

}  // namespace

TEST_CASE("financial terms") {
    CHECK(apply_financial_terms(42.0, FinancialTerms::identity()) == 42.0);
    CHECK(apply_financial_terms(30.0, {2.0, 10.0, 40.0, 0.5}) == 20.0);
    CHECK(apply_financial_terms(3.0, {1.0, 5.0, kUnlimited, 1.0}) == 0.0);
}

TEST_CASE("occurrence terms") {
    CHECK(apply_occurrence_terms(100.0, {20.0, 50.0, 0.0, kUnlimited}) == 50.0);
    CHECK(apply_occurrence_terms(10.0, {20.0, 50.0, 0.0, kUnlimited}) == 0.0);
    CHECK(apply_occurrence_terms(60.0, {20.0, 50.0, 0.0, kUnlimited}) == 40.0);
}

TEST_CASE("aggregate terms: prefix, cap, difference, sum") {
    const std::vector<double> seq{30, 30, 30};
    CHECK(apply_aggregate_terms(seq, {0, kUnlimited, 50.0, 30.0}) == 30.0);
    const std::vector<double> pass{5, 5};
    CHECK(apply_aggregate_terms(pass, {}) == 10.0);
    CHECK(apply_aggregate_terms(std::span<const double>{}, {0, kUnlimited, 7.0, 100.0}) == 0.0);
}

TEST_CASE("analyse_trial worked example") {
    auto elt = std::make_shared<const EventLossTable>(
        EventLossTable{10, {{EventId(4), 100.0}, {EventId(9), 50.0}}, {}});
    Layer layer{"L", {elt}, {10.0, 60.0, 0.0, 150.0}};
    CHECK(trial_of({4, 9, 4}, layer) == 150.0);

    layer.terms.agg_limit = 0.0;
    CHECK(trial_of({4, 9, 4}, layer) == 0.0);
}

TEST_CASE("analyse_trial propagates range errors and rejects misaligned tables") {
    auto elt = std::make_shared<const EventLossTable>(EventLossTable{5, {{EventId(1), 1.0}}, {}});
    const Layer layer{"L", {elt}, {}};
    const auto yet = YearEventTable::from_columns(9, {EventId(8)}, {0.1}, {0, 1});
    std::vector<DirectAccessTable> tables{DirectAccessTable(*elt)};
    const auto p = ptrs(tables);
    CHECK_THROWS_AS(analyse_trial(yet.trial(0), layer, p), TableRangeError);
    CHECK_THROWS_AS(analyse_trial(yet.trial(0), layer, std::span<const DirectAccessTable* const>{}),
                    std::invalid_argument);
}

TEST_CASE("randomized trial against the naive oracle") {
    std::mt19937_64 rng(20120901);
    const auto inst = oracle::random_instance(rng, 1, 50, 3);
    // Three ELTs, one 50-event trial.
    auto layer = inst.layer;
    while (layer.elts.size() < 3) layer.elts.push_back(inst.elts.front());
    YearEventTable yet(inst.yet.catalog_size());
    std::vector<EventOccurrence> occ;
    for (int i = 0; i < 50; ++i) {
        occ.push_back({EventId(std::uniform_int_distribution<std::uint32_t>(1, yet.catalog_size())(rng)), i / 50.0});
    }
    yet.add_trial(occ);
    const auto expected = oracle::ylt(yet, layer);
    const auto got = run_aggregate_analysis(std::span(&layer, 1), yet, EngineConfig::unchunked());
    CHECK(close_rel(got[0].losses[0], expected[0]));
}

TEST_CASE("engine matches naive oracle on random small instances") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 200; ++round) {
        const auto inst = oracle::random_instance(rng, 30, 60, 5);
        const auto expected = oracle::ylt(inst.yet, inst.layer);
        for (const auto& cfg : {EngineConfig::unchunked(), EngineConfig::chunked(3, 2)}) {
            const auto got = run_aggregate_analysis(std::span(&inst.layer, 1), inst.yet, cfg);
            REQUIRE(got[0].losses.size() == expected.size());
            for (std::size_t i = 0; i < expected.size(); ++i) {
                if (!close_rel(got[0].losses[i], expected[i])) {
                    FAIL("round " << round << " trial " << i << ": " << got[0].losses[i] << " vs " << expected[i]);
                }
            }
        }
    }
}

TEST_CASE("telescoping identity on random sequences") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 2000; ++round) {
        const auto n = std::uniform_int_distribution<int>(0, 200)(rng);
        const bool integral = round % 2 == 0;
        std::vector<double> seq(n);
        for (auto& x : seq) {
            x = integral ? std::uniform_int_distribution<int>(0, 1000)(rng)
                         : std::uniform_real_distribution<double>(0.0, 1000.0)(rng);
        }
        LayerTerms t{0, kUnlimited, oracle::pick_retention(rng, 50'000.0), oracle::pick_limit(rng, 80'000.0)};
        if (integral) {
            t.agg_retention = std::floor(t.agg_retention);
            if (std::isfinite(t.agg_limit)) t.agg_limit = std::floor(t.agg_limit);
        }
        double total = 0.0;
        for (const double x : seq) total += x;
        const double closed = std::min(std::max(total - t.agg_retention, 0.0), t.agg_limit);
        const double got = apply_aggregate_terms(seq, t);
        if (integral) {
            CHECK(got == closed);
        } else {
            CHECK(close_rel(got, closed));
        }
    }
}

TEST_CASE("trial loss properties: bounds, monotonicity, neutrality") {
    std::mt19937_64 rng(77);
    SUBCASE("bounds and monotonicity under single-loss increases") {
        for (int round = 0; round < 10000; ++round) {
            auto inst = oracle::random_instance(rng, 1, 40, 3);
            std::vector<DirectAccessTable> tables;
            for (const auto& e : inst.layer.elts) tables.emplace_back(*e);
            const auto p = ptrs(tables);
            TrialScratch scratch;
            const double base = analyse_trial(inst.yet.trial(0), inst.layer.terms, p, scratch);
            CHECK(base >= 0.0);
            CHECK(base <= inst.layer.terms.agg_limit);

            // Bump one event's loss in one ELT.
            const auto j = std::uniform_int_distribution<std::size_t>(0, inst.elts.size() - 1)(rng);
            auto bumped = *inst.layer.elts[j];
            const auto target = inst.yet.trial(0).events[0];
            bool found = false;
            for (auto& r : bumped.records) {
                if (r.event == target) {
                    r.loss += std::uniform_real_distribution<double>(0.0, 500.0)(rng);
                    found = true;
                }
            }
            if (!found) bumped.records.push_back({target, std::uniform_real_distribution<double>(0.0, 500.0)(rng)});
            tables[j] = DirectAccessTable(bumped);
            const double after = analyse_trial(inst.yet.trial(0), inst.layer.terms, p, scratch);
            CHECK(after >= base - 1e-9 * std::max(1.0, base));
        }
    }
    SUBCASE("neutral terms sum raw losses") {
        for (int round = 0; round < 200; ++round) {
            auto inst = oracle::random_instance(rng, 5, 50, 4);
            std::vector<EltRef> neutral;
            for (const auto& e : inst.elts) {
                auto copy = *e;
                copy.terms = FinancialTerms::identity();
                neutral.push_back(std::make_shared<const EventLossTable>(copy));
            }
            const Layer layer{"n", neutral, LayerTerms{0, kUnlimited, 0, kUnlimited}};
            const auto ylt = run_aggregate_analysis(std::span(&layer, 1), inst.yet, EngineConfig::unchunked());
            for (std::size_t i = 0; i < inst.yet.trial_count(); ++i) {
                double raw = 0.0;
                for (const auto e : inst.yet.trial(i).events) {
                    for (const auto& elt : neutral) {
                        for (const auto& r : elt->records) {
                            if (r.event == e) raw += r.loss;
                        }
                    }
                }
                CHECK(close_rel(ylt[0].losses[i], raw));
            }
        }
    }
}

TEST_CASE("determinism across workers and chunk sizes") {
    GeneratorSpec spec;
    spec.seed = 11;
    spec.catalog_size = 5000;
    spec.trial_count = 1500;
    spec.events_per_trial = {50, 150};
    spec.elt_count = 4;
    spec.elt_size = {500, 1500};
    const auto yet = generate_yet(spec);
    const auto elts = generate_elts(spec);
    auto layers = generate_layers(elts, 2, 3, {1e4, 2e5, 5e4, 3e6});

    const auto reference = run_aggregate_analysis(layers, yet, EngineConfig::unchunked(1));
    REQUIRE(reference.size() == 2);
    CHECK(reference[0].losses.size() == 1500);
    for (const std::size_t w : {1, 2, 4, 8}) {
        for (const std::optional<std::size_t> chunk : {std::optional<std::size_t>{}, std::optional<std::size_t>{1},
                                                       std::optional<std::size_t>{4}, std::optional<std::size_t>{12}}) {
            EngineConfig cfg;
            cfg.worker_count = w;
            cfg.chunk_size = chunk;
            cfg.trial_batch = 37;
            const auto got = run_aggregate_analysis(layers, yet, cfg);
            CHECK(got == reference);  // bit-identical
        }
    }
    const auto chunked = run_chunked(layers, yet, EngineConfig::chunked(4, 3));
    CHECK(chunked == reference);
    CHECK_THROWS_AS(run_chunked(layers, yet, EngineConfig::unchunked()), std::invalid_argument);
}

TEST_CASE("composition: YLT entries are per-trial analyse_trial results") {
    auto elt = std::make_shared<const EventLossTable>(
        EventLossTable{10, {{EventId(4), 100.0}, {EventId(9), 50.0}, {EventId(2), 7.0}}, {}});
    const Layer layer{"L", {elt}, {10.0, 60.0, 0.0, 150.0}};
    YearEventTable yet(10);
    yet.add_trial({{EventId(4), 0.1}, {EventId(9), 0.2}, {EventId(4), 0.3}});
    yet.add_trial({{EventId(2), 0.5}, {EventId(9), 0.6}});
    const auto ylt = run_aggregate_analysis(std::span(&layer, 1), yet, {});
    REQUIRE(ylt.size() == 1);
    CHECK(ylt[0].layer_id == "L");
    CHECK(ylt[0].losses == std::vector<double>{150.0, 40.0});
}

TEST_CASE("lookup counter equals trials x events x ELTs") {
    GeneratorSpec spec;
    spec.catalog_size = 1000;
    spec.trial_count = 123;
    spec.events_per_trial = {17, 17};
    spec.elt_count = 5;
    spec.elt_size = {100, 200};
    const auto yet = generate_yet(spec);
    const auto elts = generate_elts(spec);
    const auto layers = generate_layers(elts, 3, 5);
    for (const std::size_t w : {1, 3}) {
        const auto result = analyse_portfolio(layers, yet, EngineConfig::chunked(4, w));
        CHECK(result.stats.lookups == 123ull * 17 * 5 * 3);
        CHECK(result.stats.lookups == planned_lookups(layers, yet));
        CHECK(result.stats.peak_tables.loss_slots == 5ull * 1000);
    }
    static_assert(planned_lookups(1'000'000, 1000, 15) == 15'000'000'000ull);
}

TEST_CASE("invalid portfolio is rejected before any work") {
    auto elt = std::make_shared<const EventLossTable>(EventLossTable{10, {{EventId(11), 1.0}}, {}});
    const std::vector<Layer> layers{{"bad", {elt}, {}}, {"empty", {}, {}}};
    YearEventTable yet(10);
    yet.add_trial({{EventId(1), 0.5}});
    try {
        run_aggregate_analysis(layers, yet, {});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.violations().size() == 2);
    }
    EngineConfig zero_chunk;
    zero_chunk.chunk_size = 0;
    const std::vector<Layer> ok{{"ok", {std::make_shared<const EventLossTable>(EventLossTable{10, {}, {}})}, {}}};
    CHECK_THROWS_AS(run_aggregate_analysis(ok, yet, zero_chunk), std::invalid_argument);
    EngineConfig zero_workers;
    zero_workers.worker_count = 0;
    CHECK_THROWS_AS(run_aggregate_analysis(ok, yet, zero_workers), std::invalid_argument);
}

TEST_CASE("worker pool propagates exceptions and covers every index once") {
    WorkerPool pool(3);
    std::vector<int> hits(1000, 0);
    pool.parallel_for(hits.size(), 7, [&](std::size_t b, std::size_t e, std::size_t w) {
        CHECK(w < 3);
        for (auto i = b; i < e; ++i) ++hits[i];
    });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK_THROWS_AS(pool.parallel_for(100, 1,
                                      [](std::size_t b, std::size_t, std::size_t) {
                                          if (b == 42) throw std::runtime_error("boom");
                                      }),
                    std::runtime_error);
    pool.parallel_for(0, 1, [](std::size_t, std::size_t, std::size_t) { FAIL("no work expected"); });
}
