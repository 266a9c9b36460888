#ifndef ARE_PRICING_SERVICE_HPP
#define ARE_PRICING_SERVICE_HPP

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "are/direct_table.hpp"
#include "are/domain.hpp"
#include "are/engine.hpp"
#include "are/generator.hpp"
#include "are/metrics.hpp"
#include "are/worker_pool.hpp"

namespace are {

enum class ServiceErrorCode { NotFound, Validation, BadRequest };

class ServiceError : public std::runtime_error {
public:
    ServiceError(ServiceErrorCode code, const std::string& what, std::vector<std::string> details = {})
        : std::runtime_error(what), code_(code), details_(std::move(details)) {}

    ServiceErrorCode code() const { return code_; }
    const std::vector<std::string>& details() const { return details_; }

private:
    ServiceErrorCode code_;
    std::vector<std::string> details_;
};

struct ServiceConfig {
    std::size_t workers = 1;
    std::size_t session_cap = 4;
    std::filesystem::path data_root = ".";
    std::optional<std::size_t> chunk_size = EngineConfig::kDefaultChunkSize;
};

struct SessionSummary {
    std::string id;
    std::string source;
    std::size_t trials = 0;
    std::size_t occurrences = 0;
    std::uint32_t catalog_size = 0;
    std::size_t elt_count = 0;
    std::uint64_t table_bytes = 0;
    std::int64_t created_at = 0;  // unix seconds
};

struct PricingRequest {
    std::string session_id;
    LayerTerms terms;
    std::optional<std::vector<std::uint32_t>> elts;  // nullopt: every ELT in the session
    std::vector<double> return_periods;              // empty: defaults that fit the trial count
};

struct PricingResponse {
    std::string session_id;
    std::size_t trials = 0;
    std::vector<std::uint32_t> elts;
    std::vector<TailMetrics> metrics;
    EPCurve ep_curve;
    double mean_loss = 0.0;
    double max_loss = 0.0;
    double engine_seconds = 0.0;
    std::uint64_t lookups = 0;
};

// Holds loaded portfolios in memory and re-prices layer terms against them.
// Tables are built once when a session is created; re-pricing only selects
// among them. Safe for concurrent use.
class PricingService {
public:
    static constexpr double kDefaultReturnPeriods[] = {2, 5, 10, 25, 50, 100, 200, 250, 500, 1000};

    explicit PricingService(ServiceConfig config);

    // `location` is a dataset directory relative to the data root.
    SessionSummary create_session(const std::string& location);
    SessionSummary create_session(const GeneratorSpec& spec);

    PricingResponse reprice(const PricingRequest& request) const;

    void close_session(const std::string& id);
    std::vector<SessionSummary> list_sessions() const;

    const ServiceConfig& config() const { return config_; }
    // Number of table-build passes (one per created session).
    std::uint64_t table_builds() const { return table_builds_.load(); }

private:
    struct Session {
        SessionSummary summary;
        std::shared_ptr<const YearEventTable> yet;
        std::vector<std::unique_ptr<DirectAccessTable>> tables;
    };

    SessionSummary install(std::shared_ptr<const YearEventTable> yet, std::vector<EltRef> elts,
                           std::string source);
    std::shared_ptr<const Session> find(const std::string& id) const;

    ServiceConfig config_;
    mutable WorkerPool pool_;
    std::atomic<std::uint64_t> table_builds_{0};

    mutable std::mutex mutex_;
    // Most recently used at the front.
    mutable std::list<std::string> lru_;
    std::unordered_map<std::string, std::pair<std::shared_ptr<const Session>, std::list<std::string>::iterator>>
        sessions_;
};

}  // namespace are

#endif  // ARE_PRICING_SERVICE_HPP
