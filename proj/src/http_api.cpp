#include "are/http_api.hpp"

#include <cmath>
#include <regex>

#include "httplib.h"

namespace are {

using nlohmann::json;

namespace {

json limit_to_json(double v) {
    if (std::isinf(v)) {
        return "unlimited";
    }
    return v;
}

double limit_from_json(const json& j, const char* field) {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "unlimited")) {
        return kUnlimited;
    }
    if (!j.is_number()) {
        throw ServiceError(ServiceErrorCode::BadRequest,
                           std::string(field) + " must be a number or \"unlimited\"");
    }
    return j.get<double>();
}

double number_field(const json& obj, const char* field, double fallback) {
    if (!obj.contains(field)) {
        return fallback;
    }
    const auto& v = obj.at(field);
    if (!v.is_number()) {
        throw ServiceError(ServiceErrorCode::BadRequest, std::string(field) + " must be a number");
    }
    return v.get<double>();
}

template <typename T>
T integer_field(const json& obj, const char* field, T fallback) {
    if (!obj.contains(field)) {
        return fallback;
    }
    const auto& v = obj.at(field);
    if (!v.is_number_unsigned()) {
        throw ServiceError(ServiceErrorCode::BadRequest,
                           std::string(field) + " must be a non-negative integer");
    }
    return v.get<T>();
}

SizeRange range_field(const json& obj, const char* field, SizeRange fallback) {
    if (!obj.contains(field)) {
        return fallback;
    }
    const auto& v = obj.at(field);
    if (v.is_number_unsigned()) {
        const auto n = v.get<std::uint32_t>();
        return {n, n};
    }
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() || !v[1].is_number_unsigned()) {
        throw ServiceError(ServiceErrorCode::BadRequest,
                           std::string(field) + " must be an integer or [min, max]");
    }
    return {v[0].get<std::uint32_t>(), v[1].get<std::uint32_t>()};
}

const char* code_name(ServiceErrorCode code) {
    switch (code) {
        case ServiceErrorCode::NotFound: return "not_found";
        case ServiceErrorCode::Validation: return "validation";
        case ServiceErrorCode::BadRequest: return "bad_request";
    }
    return "error";
}

int status_for(ServiceErrorCode code) {
    switch (code) {
        case ServiceErrorCode::NotFound: return 404;
        case ServiceErrorCode::Validation: return 422;
        case ServiceErrorCode::BadRequest: return 400;
    }
    return 500;
}

HttpReply error_reply(const ServiceError& e) {
    json err{{"code", code_name(e.code())}, {"message", e.what()}};
    if (!e.details().empty()) {
        err["violations"] = e.details();
    }
    return {status_for(e.code()), json{{"error", err}}};
}

json parse_body(const std::string& body) {
    if (body.empty()) {
        return json::object();
    }
    try {
        auto j = json::parse(body);
        if (!j.is_object()) {
            throw ServiceError(ServiceErrorCode::BadRequest, "request body must be a JSON object");
        }
        return j;
    } catch (const json::parse_error& e) {
        throw ServiceError(ServiceErrorCode::BadRequest, std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

json to_json(const LayerTerms& t) {
    return {{"occ_retention", t.occ_retention},
            {"occ_limit", limit_to_json(t.occ_limit)},
            {"agg_retention", t.agg_retention},
            {"agg_limit", limit_to_json(t.agg_limit)}};
}

LayerTerms terms_from_json(const json& j) {
    if (!j.is_object()) {
        throw ServiceError(ServiceErrorCode::BadRequest, "terms must be an object");
    }
    LayerTerms t;
    t.occ_retention = number_field(j, "occ_retention", 0.0);
    t.occ_limit = j.contains("occ_limit") ? limit_from_json(j.at("occ_limit"), "occ_limit") : kUnlimited;
    t.agg_retention = number_field(j, "agg_retention", 0.0);
    t.agg_limit = j.contains("agg_limit") ? limit_from_json(j.at("agg_limit"), "agg_limit") : kUnlimited;
    return t;
}

json to_json(const SessionSummary& s) {
    return {{"id", s.id},
            {"source", s.source},
            {"trials", s.trials},
            {"occurrences", s.occurrences},
            {"catalog_size", s.catalog_size},
            {"elt_count", s.elt_count},
            {"table_bytes", s.table_bytes},
            {"created_at", s.created_at}};
}

json to_json(const PricingResponse& r) {
    json metrics = json::array();
    for (const auto& m : r.metrics) {
        metrics.push_back({{"return_period", m.return_period}, {"pml", m.pml}, {"tvar", m.tvar}});
    }
    json curve = json::array();
    for (const auto& p : r.ep_curve.points) {
        curve.push_back({{"loss", p.loss}, {"exceedance_probability", p.exceedance_probability}});
    }
    return {{"session_id", r.session_id},
            {"trials", r.trials},
            {"elts", r.elts},
            {"metrics", metrics},
            {"ep_curve", curve},
            {"trial_stats", {{"mean", r.mean_loss}, {"max", r.max_loss}}},
            {"engine_seconds", r.engine_seconds},
            {"lookups", r.lookups}};
}

PricingRequest request_from_json(const std::string& session_id, const json& body) {
    PricingRequest req;
    req.session_id = session_id;
    if (body.contains("terms")) {
        req.terms = terms_from_json(body.at("terms"));
    }
    if (body.contains("elts") && !body.at("elts").is_null()) {
        const auto& e = body.at("elts");
        if (!e.is_array()) {
            throw ServiceError(ServiceErrorCode::BadRequest, "elts must be an array of indices");
        }
        std::vector<std::uint32_t> sel;
        for (const auto& v : e) {
            if (!v.is_number_unsigned()) {
                throw ServiceError(ServiceErrorCode::BadRequest, "elts must hold non-negative integers");
            }
            sel.push_back(v.get<std::uint32_t>());
        }
        req.elts = std::move(sel);
    }
    if (body.contains("return_periods")) {
        const auto& rps = body.at("return_periods");
        if (!rps.is_array()) {
            throw ServiceError(ServiceErrorCode::BadRequest, "return_periods must be an array");
        }
        for (const auto& v : rps) {
            if (!v.is_number()) {
                throw ServiceError(ServiceErrorCode::BadRequest, "return_periods must hold numbers");
            }
            req.return_periods.push_back(v.get<double>());
        }
    }
    return req;
}

GeneratorSpec spec_from_json(const json& j) {
    if (!j.is_object()) {
        throw ServiceError(ServiceErrorCode::BadRequest, "generate must be an object");
    }
    GeneratorSpec spec;
    spec.seed = integer_field<std::uint64_t>(j, "seed", spec.seed);
    spec.catalog_size = integer_field<std::uint32_t>(j, "catalog_size", spec.catalog_size);
    spec.trial_count = integer_field<std::uint32_t>(j, "trial_count", spec.trial_count);
    spec.events_per_trial = range_field(j, "events_per_trial", spec.events_per_trial);
    spec.elt_count = integer_field<std::uint32_t>(j, "elt_count", spec.elt_count);
    spec.elt_size = range_field(j, "elt_size", spec.elt_size);
    spec.loss_scale = number_field(j, "loss_scale", spec.loss_scale);
    return spec;
}

HttpReply handle_request(PricingService& service, const std::string& method,
                         const std::string& path, const std::string& body) {
    static const std::regex session_path(R"(^/sessions/([A-Za-z0-9_-]+)$)");
    static const std::regex reprice_path(R"(^/sessions/([A-Za-z0-9_-]+)/reprice$)");
    try {
        std::smatch m;
        if (method == "GET" && path == "/health") {
            return {200,
                    {{"status", "ok"},
                     {"sessions", service.list_sessions().size()},
                     {"workers", service.config().workers},
                     {"session_cap", service.config().session_cap}}};
        }
        if (method == "GET" && path == "/sessions") {
            json list = json::array();
            for (const auto& s : service.list_sessions()) {
                list.push_back(to_json(s));
            }
            return {200, {{"sessions", list}}};
        }
        if (method == "POST" && path == "/sessions") {
            const auto j = parse_body(body);
            if (j.contains("data") == j.contains("generate")) {
                throw ServiceError(ServiceErrorCode::BadRequest,
                                   "give exactly one of \"data\" or \"generate\"");
            }
            if (j.contains("data")) {
                if (!j.at("data").is_string()) {
                    throw ServiceError(ServiceErrorCode::BadRequest, "data must be a path string");
                }
                return {201, to_json(service.create_session(j.at("data").get<std::string>()))};
            }
            return {201, to_json(service.create_session(spec_from_json(j.at("generate"))))};
        }
        if (method == "POST" && std::regex_match(path, m, reprice_path)) {
            return {200, to_json(service.reprice(request_from_json(m[1], parse_body(body))))};
        }
        if (method == "DELETE" && std::regex_match(path, m, session_path)) {
            service.close_session(m[1]);
            return {200, {{"closed", m[1].str()}}};
        }
        if (method == "GET" && std::regex_match(path, m, session_path)) {
            for (const auto& s : service.list_sessions()) {
                if (s.id == m[1]) {
                    return {200, to_json(s)};
                }
            }
            throw ServiceError(ServiceErrorCode::NotFound, "unknown session '" + m[1].str() + "'");
        }
        return {404, {{"error", {{"code", "not_found"}, {"message", "no route " + method + " " + path}}}}};
    } catch (const ServiceError& e) {
        return error_reply(e);
    } catch (const json::exception& e) {
        return error_reply(ServiceError(ServiceErrorCode::BadRequest, e.what()));
    } catch (const std::exception& e) {
        return {500, {{"error", {{"code", "internal"}, {"message", e.what()}}}}};
    }
}

struct PricingServer::Impl {
    PricingService& service;
    httplib::Server server;

    explicit Impl(PricingService& s) : service(s) {
        auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
            const auto reply = handle_request(service, req.method, req.path, req.body);
            res.status = reply.status;
            res.set_content(reply.body.dump(), "application/json");
        };
        server.Get(".*", dispatch);
        server.Post(".*", dispatch);
        server.Delete(".*", dispatch);
        // The browser workbench is served from a different origin.
        server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
    }
};

PricingServer::PricingServer(PricingService& service) : impl_(std::make_unique<Impl>(service)) {}
PricingServer::~PricingServer() = default;

int PricingServer::bind(const std::string& host, int port) {
    if (port == 0) {
        return impl_->server.bind_to_any_port(host);
    }
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool PricingServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void PricingServer::stop() { impl_->server.stop(); }

}  // namespace are
