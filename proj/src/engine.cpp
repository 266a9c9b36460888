#include "are/engine.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <memory>
#include <unordered_map>

namespace are {

namespace {

std::string summarise(const std::vector<Violation>& violations) {
    std::string msg = "portfolio validation failed (" + std::to_string(violations.size()) +
                      " violation" + (violations.size() == 1 ? "" : "s") + ")";
    if (!violations.empty()) {
        msg += ": " + violations.front().message;
    }
    return msg;
}

template <bool Checked>
double lookup_loss(const DirectAccessTable& table, EventId e) {
    if constexpr (Checked) {
        return table.lookup(e);
    } else {
        return table[e];
    }
}

// Prefix sum, aggregate cap and differencing over a buffer already holding
// occurrence-net losses. Each step is its own pass; the buffer is overwritten.
double aggregate_in_place(std::span<double> lo, const LayerTerms& terms) {
    double running = 0.0;
    for (auto& x : lo) {
        running += x;
        x = running;
    }
    for (auto& x : lo) {
        x = cap_aggregate(x, terms);
    }
    double previous = 0.0;
    for (auto& x : lo) {
        const double capped = x;
        x = capped - previous;
        previous = capped;
    }
    double trial_loss = 0.0;
    for (const double x : lo) {
        trial_loss += x;
    }
    return trial_loss;
}

template <bool Checked>
double trial_unchunked(const TrialView& trial, const LayerTerms& terms,
                       std::span<const DirectAccessTable* const> tables, TrialScratch& scratch) {
    const std::size_t n = trial.size();
    auto combined = scratch.reset(n);
    // Lookup, financial terms, accumulate across ELTs.
    for (std::size_t d = 0; d < n; ++d) {
        const EventId e = trial.events[d];
        double sum = 0.0;
        for (const auto* table : tables) {
            sum += apply_financial_terms(lookup_loss<Checked>(*table, e), table->terms());
        }
        combined[d] = sum;
    }
    // Occurrence terms.
    for (auto& x : combined) {
        x = apply_occurrence_terms(x, terms);
        assert(x >= 0.0);
    }
    return aggregate_in_place(combined, terms);
}

template <bool Checked>
double trial_chunked(const TrialView& trial, const LayerTerms& terms,
                     std::span<const DirectAccessTable* const> tables, std::size_t chunk,
                     TrialScratch& scratch) {
    const std::size_t n = trial.size();
    auto block = scratch.reset(std::min(chunk, n));
    double running = 0.0;
    double previous = 0.0;
    double trial_loss = 0.0;
    for (std::size_t start = 0; start < n; start += chunk) {
        const std::size_t len = std::min(chunk, n - start);
        for (std::size_t j = 0; j < len; ++j) {
            const EventId e = trial.events[start + j];
            double sum = 0.0;
            for (const auto* table : tables) {
                sum += apply_financial_terms(lookup_loss<Checked>(*table, e), table->terms());
            }
            block[j] = apply_occurrence_terms(sum, terms);
        }
        for (std::size_t j = 0; j < len; ++j) {
            running += block[j];
            const double capped = cap_aggregate(running, terms);
            trial_loss += capped - previous;
            previous = capped;
        }
    }
    return trial_loss;
}

std::vector<const DirectAccessTable*> pointers(const std::vector<std::unique_ptr<DirectAccessTable>>& owned) {
    std::vector<const DirectAccessTable*> out;
    out.reserve(owned.size());
    for (const auto& t : owned) {
        out.push_back(t.get());
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(summarise(violations)), violations_(std::move(violations)) {}

double apply_aggregate_terms(std::span<const double> occ_losses, const LayerTerms& terms) {
    std::vector<double> lo(occ_losses.begin(), occ_losses.end());
    const double trial_loss = aggregate_in_place(lo, terms);
#ifndef NDEBUG
    double total = 0.0;
    for (const double x : occ_losses) {
        total += x;
    }
    const double closed = cap_aggregate(total, terms);
    assert(std::abs(trial_loss - closed) <= 1e-9 * std::max(1.0, std::abs(closed)));
#endif
    return trial_loss;
}

double analyse_trial(const TrialView& trial, const Layer& layer,
                     std::span<const DirectAccessTable* const> tables) {
    if (tables.size() != layer.elts.size()) {
        throw std::invalid_argument("table count does not match the layer's ELT count");
    }
    TrialScratch scratch;
    return trial_unchunked<true>(trial, layer.terms, tables, scratch);
}

double analyse_trial(const TrialView& trial, const LayerTerms& terms,
                     std::span<const DirectAccessTable* const> tables, TrialScratch& scratch) {
    return trial_unchunked<true>(trial, terms, tables, scratch);
}

double analyse_trial_chunked(const TrialView& trial, const LayerTerms& terms,
                             std::span<const DirectAccessTable* const> tables, std::size_t chunk,
                             TrialScratch& scratch) {
    if (chunk == 0) {
        throw std::invalid_argument("chunk size must be at least 1");
    }
    return trial_chunked<true>(trial, terms, tables, chunk, scratch);
}

YearLossTable run_layer(const YearEventTable& yet, std::string layer_id, const LayerTerms& terms,
                        std::span<const DirectAccessTable* const> tables,
                        const EngineConfig& cfg, WorkerPool& pool, std::uint64_t* lookups) {
    if (cfg.chunk_size && *cfg.chunk_size == 0) {
        throw std::invalid_argument("chunk size must be at least 1");
    }
    for (const auto* t : tables) {
        if (t->catalog_size() < yet.catalog_size()) {
            throw std::invalid_argument("direct table smaller than the YET catalog");
        }
    }

    YearLossTable ylt{std::move(layer_id), std::vector<double>(yet.trial_count(), 0.0)};
    std::vector<TrialScratch> scratch(pool.size());
    std::vector<std::uint64_t> counted(pool.size(), 0);
    double* out = ylt.losses.data();

    pool.parallel_for(yet.trial_count(), cfg.trial_batch,
                      [&](std::size_t begin, std::size_t end, std::size_t worker) {
                          auto& buf = scratch[worker];
                          std::uint64_t n = 0;
                          for (std::size_t i = begin; i < end; ++i) {
                              const auto trial = yet.trial(i);
                              out[i] = cfg.chunk_size
                                           ? trial_chunked<false>(trial, terms, tables,
                                                                  *cfg.chunk_size, buf)
                                           : trial_unchunked<false>(trial, terms, tables, buf);
                              n += trial.size();
                          }
                          counted[worker] += n * tables.size();
                      });

    if (lookups) {
        for (const auto c : counted) {
            *lookups += c;
        }
    }
    return ylt;
}

AnalysisResult analyse_portfolio(std::span<const Layer> layers, const YearEventTable& yet,
                                 const EngineConfig& cfg, WorkerPool* pool) {
    if (cfg.worker_count == 0) {
        throw std::invalid_argument("worker_count must be at least 1");
    }
    auto violations = validate_portfolio(layers, yet);
    if (!violations.empty()) {
        throw ValidationError(std::move(violations));
    }

    std::unique_ptr<WorkerPool> local;
    if (!pool) {
        local = std::make_unique<WorkerPool>(cfg.worker_count);
        pool = local.get();
    }

    AnalysisResult result;
    result.ylts.reserve(layers.size());
    for (const auto& layer : layers) {
        std::vector<std::unique_ptr<DirectAccessTable>> owned;
        owned.reserve(layer.elts.size());
        for (const auto& elt : layer.elts) {
            owned.push_back(std::make_unique<DirectAccessTable>(*elt));
        }
        const auto tables = pointers(owned);
        const auto fp = memory_footprint(std::span<const DirectAccessTable* const>(tables));
        if (fp.loss_bytes > result.stats.peak_tables.loss_bytes) {
            result.stats.peak_tables = fp;
        }

        const auto start = std::chrono::steady_clock::now();
        result.ylts.push_back(
            run_layer(yet, layer.id, layer.terms, tables, cfg, *pool, &result.stats.lookups));
        result.stats.analysis_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.stats.trials += yet.trial_count();
    }
    return result;
}

std::vector<YearLossTable> run_aggregate_analysis(std::span<const Layer> layers,
                                                  const YearEventTable& yet,
                                                  const EngineConfig& cfg) {
    return analyse_portfolio(layers, yet, cfg).ylts;
}

std::vector<YearLossTable> run_chunked(std::span<const Layer> layers, const YearEventTable& yet,
                                       const EngineConfig& cfg) {
    if (!cfg.chunk_size || *cfg.chunk_size == 0) {
        throw std::invalid_argument("run_chunked requires a chunk size of at least 1");
    }
    return analyse_portfolio(layers, yet, cfg).ylts;
}

std::uint64_t planned_lookups(std::span<const Layer> layers, const YearEventTable& yet) {
    std::uint64_t total = 0;
    for (const auto& layer : layers) {
        total += static_cast<std::uint64_t>(yet.occurrence_count()) * layer.elts.size();
    }
    return total;
}

}  // namespace are
