#ifndef ARE_ENGINE_HPP
#define ARE_ENGINE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "are/direct_table.hpp"
#include "are/domain.hpp"
#include "are/worker_pool.hpp"

namespace are {

struct EngineConfig {
    static constexpr std::size_t kDefaultChunkSize = 4;

    std::size_t worker_count = 1;
    // Occurrences per block; nullopt runs the unchunked path.
    std::optional<std::size_t> chunk_size = kDefaultChunkSize;
    // Trials per scheduled task.
    std::size_t trial_batch = 256;
    bool deterministic = true;

    static EngineConfig unchunked(std::size_t workers = 1) { return {workers, std::nullopt}; }
    static EngineConfig chunked(std::size_t k, std::size_t workers = 1) { return {workers, k}; }
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

inline double apply_financial_terms(double loss, const FinancialTerms& t) {
    return t.share * std::min(std::max(t.exchange_rate * loss - t.event_retention, 0.0), t.event_limit);
}

inline double apply_occurrence_terms(double loss, const LayerTerms& t) {
    return std::min(std::max(loss - t.occ_retention, 0.0), t.occ_limit);
}

inline double cap_aggregate(double cumulative, const LayerTerms& t) {
    return std::min(std::max(cumulative - t.agg_retention, 0.0), t.agg_limit);
}

// Prefix-sum, cap, difference and sum over occurrence-net losses in trial order.
double apply_aggregate_terms(std::span<const double> occ_losses, const LayerTerms& terms);

// Per-worker buffers for the unchunked path, reused across trials.
class TrialScratch {
public:
    std::span<double> reset(std::size_t occurrences) {
        combined_.assign(occurrences, 0.0);
        return combined_;
    }
    std::span<double> combined() { return combined_; }

private:
    std::vector<double> combined_;
};

// Full per-trial body. Lookups are bounds-checked; an out-of-range event
// raises TableRangeError. `tables` is index-aligned with layer.elts.
double analyse_trial(const TrialView& trial, const Layer& layer,
                     std::span<const DirectAccessTable* const> tables);

// Same computation on caller-supplied terms, used by the batch paths.
double analyse_trial(const TrialView& trial, const LayerTerms& terms,
                     std::span<const DirectAccessTable* const> tables, TrialScratch& scratch);
double analyse_trial_chunked(const TrialView& trial, const LayerTerms& terms,
                             std::span<const DirectAccessTable* const> tables, std::size_t chunk,
                             TrialScratch& scratch);

struct RunStats {
    std::uint64_t lookups = 0;
    std::uint64_t trials = 0;
    double analysis_seconds = 0.0;
    MemoryFootprint peak_tables;
};

struct AnalysisResult {
    std::vector<YearLossTable> ylts;
    RunStats stats;
};

// Runs one layer over every trial against prebuilt tables. The tables must
// match the YET catalog; the YET must already be validated. Output is
// bit-identical for any worker count or chunk size.
YearLossTable run_layer(const YearEventTable& yet, std::string layer_id, const LayerTerms& terms,
                        std::span<const DirectAccessTable* const> tables,
                        const EngineConfig& cfg, WorkerPool& pool,
                        std::uint64_t* lookups = nullptr);

// Validates, then processes layers sequentially: build the layer's tables,
// run all trials in parallel, release the tables. Throws ValidationError
// before any work if the portfolio is invalid.
AnalysisResult analyse_portfolio(std::span<const Layer> layers, const YearEventTable& yet,
                                 const EngineConfig& cfg, WorkerPool* pool = nullptr);

std::vector<YearLossTable> run_aggregate_analysis(std::span<const Layer> layers,
                                                  const YearEventTable& yet,
                                                  const EngineConfig& cfg);

// Requires cfg.chunk_size to be set and >= 1.
std::vector<YearLossTable> run_chunked(std::span<const Layer> layers, const YearEventTable& yet,
                                       const EngineConfig& cfg);

// Lookups the engine performs for this input: sum over layers of
// occurrences * ELTs in the layer.
std::uint64_t planned_lookups(std::span<const Layer> layers, const YearEventTable& yet);
constexpr std::uint64_t planned_lookups(std::uint64_t trials, std::uint64_t events_per_trial,
                                        std::uint64_t elts_per_layer, std::uint64_t layers = 1) {
    return trials * events_per_trial * elts_per_layer * layers;
}

}  // namespace are

#endif  // ARE_ENGINE_HPP
