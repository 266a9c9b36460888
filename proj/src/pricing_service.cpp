#include "are/pricing_service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>

#include "are/io.hpp"

namespace are {

namespace fs = std::filesystem;

namespace {

std::string new_session_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    char buf[24];
    std::snprintf(buf, sizeof buf, "s-%016llx", static_cast<unsigned long long>(rng()));
    return buf;
}

std::vector<std::string> messages(const std::vector<Violation>& violations) {
    std::vector<std::string> out;
    out.reserve(violations.size());
    for (const auto& v : violations) {
        out.push_back(v.message);
    }
    return out;
}

}  // namespace

PricingService::PricingService(ServiceConfig config)
    : config_(std::move(config)), pool_(std::max<std::size_t>(config_.workers, 1)) {
    if (config_.session_cap == 0) {
        throw std::invalid_argument("session cap must be at least 1");
    }
}

SessionSummary PricingService::create_session(const std::string& location) {
    std::error_code ec;
    const auto root = fs::weakly_canonical(config_.data_root, ec);
    const auto dir = fs::weakly_canonical(config_.data_root / location, ec);
    const auto rel = dir.lexically_relative(root);
    if (ec || location.empty() || rel.empty() || *rel.begin() == "..") {
        throw ServiceError(ServiceErrorCode::BadRequest,
                           "data location '" + location + "' is outside the data root");
    }
    if (!fs::is_directory(dir)) {
        throw ServiceError(ServiceErrorCode::NotFound, "no dataset at '" + location + "'");
    }
    Dataset data;
    try {
        data = load_dataset(dir);
    } catch (const IoError& e) {
        throw ServiceError(ServiceErrorCode::Validation, "cannot load dataset: " + std::string(e.what()));
    }
    return install(std::make_shared<const YearEventTable>(std::move(data.yet)), std::move(data.elts),
                   "data:" + location);
}

SessionSummary PricingService::create_session(const GeneratorSpec& spec) {
    try {
        auto yet = generate_yet(spec, &pool_);
        return install(std::make_shared<const YearEventTable>(std::move(yet)), generate_elts(spec),
                       "generated:seed=" + std::to_string(spec.seed));
    } catch (const GeneratorError& e) {
        throw ServiceError(ServiceErrorCode::Validation, e.what());
    }
}

SessionSummary PricingService::install(std::shared_ptr<const YearEventTable> yet,
                                       std::vector<EltRef> elts, std::string source) {
    if (elts.empty()) {
        throw ServiceError(ServiceErrorCode::Validation, "dataset has no ELTs");
    }
    // Validate the YET and every ELT through a layer that covers all of them.
    const Layer everything{"session", elts, {}};
    auto violations = validate_portfolio(std::span(&everything, 1), *yet);
    if (!violations.empty()) {
        throw ServiceError(ServiceErrorCode::Validation, "dataset failed validation",
                           messages(violations));
    }

    auto session = std::make_shared<Session>();
    session->yet = std::move(yet);
    session->tables.reserve(elts.size());
    for (const auto& elt : elts) {
        session->tables.push_back(std::make_unique<DirectAccessTable>(*elt));
    }
    ++table_builds_;

    std::vector<const DirectAccessTable*> ptrs;
    for (const auto& t : session->tables) {
        ptrs.push_back(t.get());
    }
    auto& s = session->summary;
    s.id = new_session_id();
    s.source = std::move(source);
    s.trials = session->yet->trial_count();
    s.occurrences = session->yet->occurrence_count();
    s.catalog_size = session->yet->catalog_size();
    s.elt_count = elts.size();
    s.table_bytes = memory_footprint(std::span<const DirectAccessTable* const>(ptrs)).loss_bytes;
    s.created_at = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();

    std::lock_guard lock(mutex_);
    while (sessions_.size() >= config_.session_cap) {
        const auto victim = lru_.back();
        lru_.pop_back();
        sessions_.erase(victim);
    }
    lru_.push_front(s.id);
    sessions_.emplace(s.id, std::make_pair(std::shared_ptr<const Session>(session), lru_.begin()));
    return s;
}

std::shared_ptr<const PricingService::Session> PricingService::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw ServiceError(ServiceErrorCode::NotFound, "unknown session '" + id + "'");
    }
    lru_.splice(lru_.begin(), lru_, it->second.second);
    return it->second.first;
}

PricingResponse PricingService::reprice(const PricingRequest& request) const {
    const auto session = find(request.session_id);
    const auto trials = session->yet->trial_count();

    if (!valid(request.terms)) {
        throw ServiceError(ServiceErrorCode::Validation,
                           "layer terms must be non-negative; retentions must be finite");
    }

    std::vector<std::uint32_t> selection;
    if (request.elts) {
        selection = *request.elts;
        if (selection.empty()) {
            throw ServiceError(ServiceErrorCode::Validation, "ELT selection is empty");
        }
        auto sorted = selection;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw ServiceError(ServiceErrorCode::Validation, "ELT selection has duplicates");
        }
        if (sorted.back() >= session->tables.size()) {
            throw ServiceError(ServiceErrorCode::Validation,
                               "ELT index " + std::to_string(sorted.back()) + " outside session of " +
                                   std::to_string(session->tables.size()) + " ELTs");
        }
    } else {
        selection.resize(session->tables.size());
        for (std::uint32_t i = 0; i < selection.size(); ++i) {
            selection[i] = i;
        }
    }

    std::vector<double> rps = request.return_periods;
    if (rps.empty()) {
        for (const double rp : kDefaultReturnPeriods) {
            if (rp <= static_cast<double>(trials)) {
                rps.push_back(rp);
            }
        }
    }
    for (const double rp : rps) {
        if (!(rp > 1.0) || !(rp <= static_cast<double>(trials))) {
            throw ServiceError(ServiceErrorCode::Validation,
                               "return period " + std::to_string(rp) + " outside (1, " +
                                   std::to_string(trials) + "]");
        }
    }

    std::vector<const DirectAccessTable*> tables;
    tables.reserve(selection.size());
    for (const auto idx : selection) {
        tables.push_back(session->tables[idx].get());
    }

    EngineConfig cfg;
    cfg.worker_count = pool_.size();
    cfg.chunk_size = config_.chunk_size;

    PricingResponse response;
    response.session_id = request.session_id;
    response.trials = trials;
    response.elts = selection;

    const auto start = std::chrono::steady_clock::now();
    const auto ylt = run_layer(*session->yet, "reprice", request.terms, tables, cfg, pool_,
                               &response.lookups);
    response.engine_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    response.metrics = tail_metrics(ylt.losses, rps);
    response.ep_curve = ep_curve(ylt, rps);
    double sum = 0.0;
    for (const double x : ylt.losses) {
        sum += x;
        response.max_loss = std::max(response.max_loss, x);
    }
    response.mean_loss = sum / static_cast<double>(trials);
    return response;
}

void PricingService::close_session(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw ServiceError(ServiceErrorCode::NotFound, "unknown session '" + id + "'");
    }
    lru_.erase(it->second.second);
    sessions_.erase(it);
}

std::vector<SessionSummary> PricingService::list_sessions() const {
    std::lock_guard lock(mutex_);
    std::vector<SessionSummary> out;
    out.reserve(sessions_.size());
    for (const auto& id : lru_) {
        out.push_back(sessions_.at(id).first->summary);
    }
    return out;
}

}  // namespace are
