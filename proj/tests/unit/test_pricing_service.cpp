#include "doctest.h"

#include <filesystem>
#include <thread>

#include "are/engine.hpp"
#include "are/generator.hpp"
#include "are/io.hpp"
#include "are/pricing_service.hpp"

using namespace are;
namespace fs = std::filesystem;

namespace {

GeneratorSpec small_spec(std::uint64_t seed = 3) {
    GeneratorSpec spec;
    spec.seed = seed;
    spec.catalog_size = 5000;
    spec.trial_count = 1000;
    spec.events_per_trial = {50, 120};
    spec.elt_count = 3;
    spec.elt_size = {500, 1500};
    return spec;
}

fs::path write_dataset(const std::string& name, const GeneratorSpec& spec) {
    const auto root = fs::temp_directory_path() / "are_service_root";
    fs::create_directories(root);
    Dataset data{generate_yet(spec), generate_elts(spec), {}};
    data.layers = generate_layers(data.elts, 1, spec.elt_count);
    save_dataset(data, root / name, FileFormat::Binary);
    return root;
}

ServiceErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ServiceError& e) {
        return e.code();
    }
    FAIL("expected ServiceError");
    return ServiceErrorCode::BadRequest;
}

}  // namespace

TEST_CASE("session from a dataset directory") {
    const auto root = write_dataset("ds", small_spec());
    PricingService service({1, 4, root, 4});
    const auto s = service.create_session("ds");
    CHECK(s.trials == 1000);
    CHECK(s.elt_count == 3);
    CHECK(s.catalog_size == 5000);
    CHECK(s.table_bytes == 3ull * 5001 * 8);
    CHECK(code_of([&] { service.create_session("nope"); }) == ServiceErrorCode::NotFound);
    CHECK(code_of([&] { service.create_session("../etc"); }) == ServiceErrorCode::BadRequest);
}

TEST_CASE("identical inputs give identical summaries and prices") {
    PricingService service({2, 4, ".", 4});
    const auto a = service.create_session(small_spec());
    const auto b = service.create_session(small_spec());
    CHECK(a.id != b.id);
    CHECK(a.trials == b.trials);
    CHECK(a.occurrences == b.occurrences);
    CHECK(a.table_bytes == b.table_bytes);

    PricingRequest req{a.id, {1e4, 5e5, 1e5, 2e6}, std::nullopt, {10, 100}};
    const auto ra = service.reprice(req);
    req.session_id = b.id;
    const auto rb = service.reprice(req);
    REQUIRE(ra.metrics.size() == 2);
    CHECK(ra.metrics[0].pml == rb.metrics[0].pml);
    CHECK(ra.metrics[1].tvar == rb.metrics[1].tvar);
    CHECK(ra.mean_loss == rb.mean_loss);
    CHECK(ra.elts == std::vector<std::uint32_t>{0, 1, 2});
}

TEST_CASE("repricing matches the offline pipeline") {
    const auto spec = small_spec(9);
    PricingService service({1, 4, ".", 4});
    const auto s = service.create_session(spec);
    const LayerTerms terms{2e4, 3e5, 5e4, 1e6};
    const std::vector<std::uint32_t> selection{0, 2};
    const auto r = service.reprice({s.id, terms, selection, {2, 10, 100}});

    const auto yet = generate_yet(spec);
    const auto elts = generate_elts(spec);
    const std::vector<Layer> layers{{"x", {elts[0], elts[2]}, terms}};
    const auto ylt = run_aggregate_analysis(layers, yet, {});
    const std::vector<double> rps{2, 10, 100};
    const auto expected = tail_metrics(ylt[0].losses, rps);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r.metrics[i].pml == expected[i].pml);
        CHECK(r.metrics[i].tvar == expected[i].tvar);
    }
    CHECK(r.lookups == planned_lookups(layers, yet));
}

TEST_CASE("zero aggregate limit prices to zero") {
    PricingService service({1, 4, ".", 4});
    const auto s = service.create_session(small_spec());
    const auto r = service.reprice({s.id, {0, kUnlimited, 0, 0}, std::nullopt, {}});
    CHECK(r.max_loss == 0.0);
    for (const auto& m : r.metrics) {
        CHECK(m.pml == 0.0);
        CHECK(m.tvar == 0.0);
        CHECK(m.return_period <= 1000);
    }
}

TEST_CASE("bad requests are rejected") {
    PricingService service({1, 4, ".", 4});
    const auto s = service.create_session(small_spec());
    CHECK(code_of([&] { service.reprice({"s-missing", {}, std::nullopt, {}}); }) == ServiceErrorCode::NotFound);
    CHECK(code_of([&] { service.reprice({s.id, {-1, kUnlimited, 0, kUnlimited}, std::nullopt, {}}); }) ==
          ServiceErrorCode::Validation);
    CHECK(code_of([&] { service.reprice({s.id, {}, std::vector<std::uint32_t>{}, {}}); }) ==
          ServiceErrorCode::Validation);
    CHECK(code_of([&] { service.reprice({s.id, {}, std::vector<std::uint32_t>{0, 0}, {}}); }) ==
          ServiceErrorCode::Validation);
    CHECK(code_of([&] { service.reprice({s.id, {}, std::vector<std::uint32_t>{7}, {}}); }) ==
          ServiceErrorCode::Validation);
    CHECK(code_of([&] { service.reprice({s.id, {}, std::nullopt, {1.0}}); }) == ServiceErrorCode::Validation);
    CHECK(code_of([&] { service.reprice({s.id, {}, std::nullopt, {5000.0}}); }) == ServiceErrorCode::Validation);
}

TEST_CASE("session lifecycle, LRU eviction and build counting") {
    PricingService service({1, 2, ".", 4});
    const auto a = service.create_session(small_spec(1));
    const auto b = service.create_session(small_spec(2));
    CHECK(service.list_sessions().size() == 2);
    CHECK(service.table_builds() == 2);

    // Touch a so b is least recently used.
    service.reprice({a.id, {}, std::nullopt, {}});
    service.reprice({a.id, {5, 10, 0, kUnlimited}, std::nullopt, {}});
    CHECK(service.table_builds() == 2);

    const auto c = service.create_session(small_spec(3));
    const auto listed = service.list_sessions();
    REQUIRE(listed.size() == 2);
    CHECK(listed[0].id == c.id);
    CHECK(listed[1].id == a.id);
    CHECK(code_of([&] { service.reprice({b.id, {}, std::nullopt, {}}); }) == ServiceErrorCode::NotFound);

    service.close_session(a.id);
    CHECK(service.list_sessions().size() == 1);
    CHECK(code_of([&] { service.close_session(a.id); }) == ServiceErrorCode::NotFound);
}

TEST_CASE("concurrent reprices agree") {
    PricingService service({2, 4, ".", 4});
    const auto s = service.create_session(small_spec());
    const PricingRequest req{s.id, {1e4, 5e5, 0, kUnlimited}, std::nullopt, {10, 50}};
    const auto expected = service.reprice(req);
    std::vector<PricingResponse> got(4);
    {
        std::vector<std::jthread> threads;
        for (std::size_t i = 0; i < got.size(); ++i) {
            threads.emplace_back([&, i] { got[i] = service.reprice(req); });
        }
    }
    for (const auto& g : got) {
        CHECK(g.metrics[0].pml == expected.metrics[0].pml);
        CHECK(g.metrics[1].tvar == expected.metrics[1].tvar);
    }
}
