#include "doctest.h"

#include <algorithm>
#include <set>

#include "are/generator.hpp"
#include "are/worker_pool.hpp"

using namespace are;

namespace {

GeneratorSpec small_spec() {
    GeneratorSpec spec;
    spec.seed = 42;
    spec.catalog_size = 20'000;
    spec.trial_count = 300;
    spec.events_per_trial = {100, 300};
    spec.elt_count = 3;
    spec.elt_size = {1000, 3000};
    return spec;
}

}  // namespace

TEST_CASE("same seed gives identical output, pool or not") {
    const auto spec = small_spec();
    const auto a = generate_yet(spec);
    WorkerPool pool(3);
    const auto b = generate_yet(spec, &pool);
    CHECK(a == b);
    CHECK(generate_elt(spec, 1) == generate_elt(spec, 1));

    auto other = spec;
    other.seed = 43;
    CHECK_FALSE(generate_yet(other) == a);
}

TEST_CASE("degenerate range gives exact trial lengths") {
    auto spec = small_spec();
    spec.events_per_trial = {1000, 1000};
    spec.trial_count = 20;
    const auto yet = generate_yet(spec);
    for (std::size_t i = 0; i < yet.trial_count(); ++i) {
        CHECK(yet.trial(i).size() == 1000);
    }
    CHECK(validate_yet(yet).empty());
}

TEST_CASE("trials are sorted, in range, within the length bounds") {
    const auto spec = small_spec();
    const auto yet = generate_yet(spec);
    CHECK(yet.trial_count() == spec.trial_count);
    for (std::size_t i = 0; i < yet.trial_count(); ++i) {
        const auto t = yet.trial(i);
        CHECK(t.size() >= 100);
        CHECK(t.size() <= 300);
        CHECK(std::is_sorted(t.timestamps.begin(), t.timestamps.end()));
        for (std::size_t d = 0; d < t.size(); ++d) {
            REQUIRE(t.events[d].value >= 1);
            REQUIRE(t.events[d].value <= spec.catalog_size);
            REQUIRE(t.timestamps[d] >= 0.0);
            REQUIRE(t.timestamps[d] <= 1.0);
        }
    }
}

TEST_CASE("ELT has distinct ids and positive losses") {
    auto spec = small_spec();
    spec.catalog_size = 100;
    spec.elt_size = {100, 100};
    const auto elt = generate_elt(spec, 0);
    REQUIRE(elt.records.size() == 100);
    std::set<std::uint32_t> ids;
    for (const auto& r : elt.records) {
        ids.insert(r.event.value);
        CHECK(r.loss > 0.0);
    }
    CHECK(ids.size() == 100);
    CHECK(elt.terms == FinancialTerms::identity());
    CHECK(validate_elt(elt).empty());
}

TEST_CASE("ELT larger than the catalog is an error") {
    auto spec = small_spec();
    spec.catalog_size = 5;
    spec.elt_size = {10, 10};
    CHECK_THROWS_AS(generate_elt(spec, 0), GeneratorError);
}

TEST_CASE("invalid specs are rejected") {
    auto spec = small_spec();
    spec.events_per_trial = {10, 5};
    CHECK_THROWS_AS(check_spec(spec), GeneratorError);
    spec = small_spec();
    spec.trial_count = 0;
    CHECK_THROWS_AS(check_spec(spec), GeneratorError);
    spec = small_spec();
    spec.loss_scale = 0.0;
    CHECK_THROWS_AS(check_spec(spec), GeneratorError);
}

TEST_CASE("layers cover ELTs round-robin") {
    const auto elts = generate_elts(small_spec());
    const auto layers = generate_layers(elts, 2, 2, {1.0, 2.0, 3.0, 4.0});
    REQUIRE(layers.size() == 2);
    CHECK(layers[0].id == "L1");
    CHECK(layers[1].id == "L2");
    CHECK(layers[0].elts[0] == elts[0]);
    CHECK(layers[0].elts[1] == elts[1]);
    CHECK(layers[1].elts[0] == elts[2]);
    CHECK(layers[1].elts[1] == elts[0]);
    CHECK(layers[1].terms.agg_limit == 4.0);
}
