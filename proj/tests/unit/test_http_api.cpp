#include "doctest.h"

#include <thread>

#include "httplib.h"

#include "are/http_api.hpp"

using namespace are;
using nlohmann::json;

namespace {

const char* kGenerate = R"({"generate": {"seed": 4, "catalog_size": 3000, "trial_count": 500,
                            "events_per_trial": [20, 60], "elt_count": 3, "elt_size": 400}})";

}  // namespace

TEST_CASE("routes and wire format") {
    PricingService service({1, 4, ".", 4});

    auto r = handle_request(service, "GET", "/health", "");
    CHECK(r.status == 200);
    CHECK(r.body["status"] == "ok");

    r = handle_request(service, "POST", "/sessions", kGenerate);
    REQUIRE(r.status == 201);
    const auto id = r.body["id"].get<std::string>();
    CHECK(r.body["trials"] == 500);
    CHECK(r.body["elt_count"] == 3);

    r = handle_request(service, "GET", "/sessions", "");
    CHECK(r.body["sessions"].size() == 1);
    r = handle_request(service, "GET", "/sessions/" + id, "");
    CHECK(r.status == 200);
    CHECK(r.body["id"] == id);

    r = handle_request(service, "POST", "/sessions/" + id + "/reprice",
                       R"({"terms": {"occ_retention": 1000, "occ_limit": "unlimited", "agg_retention": 0,
                                     "agg_limit": null}, "elts": [0, 2], "return_periods": [10, 100]})");
    REQUIRE(r.status == 200);
    CHECK(r.body["metrics"].size() == 2);
    CHECK(r.body["metrics"][0]["return_period"] == 10.0);
    CHECK(r.body["ep_curve"].size() == 2);
    CHECK(r.body["elts"] == json::array({0, 2}));
    CHECK(r.body["lookups"].get<std::uint64_t>() > 0);

    r = handle_request(service, "POST", "/sessions/" + id + "/reprice", R"({"terms": {"agg_limit": 0}})");
    REQUIRE(r.status == 200);
    for (const auto& m : r.body["metrics"]) CHECK(m["pml"] == 0.0);

    r = handle_request(service, "POST", "/sessions/" + id + "/reprice", R"({"terms": {"occ_retention": -5}})");
    CHECK(r.status == 422);
    CHECK(r.body["error"]["code"] == "validation");

    r = handle_request(service, "POST", "/sessions/" + id + "/reprice", "{not json");
    CHECK(r.status == 400);
    CHECK(r.body["error"]["code"] == "bad_request");

    r = handle_request(service, "POST", "/sessions", R"({"data": "x", "generate": {}})");
    CHECK(r.status == 400);

    r = handle_request(service, "DELETE", "/sessions/" + id, "");
    CHECK(r.status == 200);
    r = handle_request(service, "POST", "/sessions/" + id + "/reprice", "{}");
    CHECK(r.status == 404);
    CHECK(r.body["error"]["code"] == "not_found");

    r = handle_request(service, "GET", "/nowhere", "");
    CHECK(r.status == 404);
}

TEST_CASE("terms encode infinity as unlimited") {
    const LayerTerms t{1, kUnlimited, 2, 3};
    const auto j = to_json(t);
    CHECK(j["occ_limit"] == "unlimited");
    CHECK(terms_from_json(j) == t);
    CHECK_THROWS(terms_from_json(json{{"occ_limit", "lots"}}));
}

TEST_CASE("live server over HTTP") {
    PricingService service({1, 4, ".", 4});
    PricingServer server(service);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::jthread loop([&] { server.listen_after_bind(); });

    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/health");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");

    res = client.Post("/sessions", kGenerate, "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 201);
    const auto id = json::parse(res->body)["id"].get<std::string>();

    res = client.Post("/sessions/" + id + "/reprice", R"({"return_periods": [5]})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["metrics"].size() == 1);

    res = client.Options("/sessions");
    REQUIRE(res);
    CHECK(res->status == 204);

    res = client.Delete("/sessions/" + id);
    REQUIRE(res);
    CHECK(res->status == 200);

    server.stop();
}
