#include "are/generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "are/rng.hpp"
#include "are/worker_pool.hpp"

namespace are {

namespace {

constexpr std::uint64_t kTrialDomain = 1;
constexpr std::uint64_t kEltDomain = 2;

void check_range(const SizeRange& r, const char* name) {
    if (r.min == 0 || r.min > r.max) {
        throw GeneratorError(std::string(name) + " range must satisfy 1 <= min <= max");
    }
}

void fill_trial(const GeneratorSpec& spec, std::size_t index, std::vector<EventOccurrence>& occ) {
    auto rng = Xoshiro256::stream(spec.seed, kTrialDomain, index);
    const auto count = rng.uniform_int(spec.events_per_trial.min, spec.events_per_trial.max);
    occ.resize(count);
    for (auto& o : occ) {
        o.event = EventId(static_cast<std::uint32_t>(rng.uniform_int(1, spec.catalog_size)));
        o.timestamp = rng.uniform();
    }
    std::stable_sort(occ.begin(), occ.end(), [](const auto& a, const auto& b) {
        return a.timestamp < b.timestamp;
    });
}

}  // namespace

void check_spec(const GeneratorSpec& spec) {
    if (spec.catalog_size == 0) {
        throw GeneratorError("catalog size must be positive");
    }
    if (spec.trial_count == 0) {
        throw GeneratorError("trial count must be positive");
    }
    check_range(spec.events_per_trial, "events per trial");
    if (spec.events_per_trial.max > YearEventTable::kMaxTrialLength) {
        throw GeneratorError("events per trial may not exceed " +
                             std::to_string(YearEventTable::kMaxTrialLength));
    }
    check_range(spec.elt_size, "ELT size");
    if (!(spec.loss_scale > 0.0) || !std::isfinite(spec.loss_scale)) {
        throw GeneratorError("loss scale must be positive");
    }
}

YearEventTable generate_yet(const GeneratorSpec& spec, WorkerPool* pool) {
    check_spec(spec);
    const std::size_t n = spec.trial_count;

    // Offsets depend only on per-trial counts, so fill directly into the
    // final columns once the counts are known.
    std::vector<std::uint64_t> offsets(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = Xoshiro256::stream(spec.seed, kTrialDomain, i);
        offsets[i + 1] =
            offsets[i] + rng.uniform_int(spec.events_per_trial.min, spec.events_per_trial.max);
    }
    std::vector<EventId> events(offsets.back());
    std::vector<double> timestamps(offsets.back());

    auto body = [&](std::size_t begin, std::size_t end, std::size_t) {
        std::vector<EventOccurrence> occ;
        for (std::size_t i = begin; i < end; ++i) {
            fill_trial(spec, i, occ);
            const auto base = static_cast<std::size_t>(offsets[i]);
            for (std::size_t d = 0; d < occ.size(); ++d) {
                events[base + d] = occ[d].event;
                timestamps[base + d] = occ[d].timestamp;
            }
        }
    };
    if (pool) {
        pool->parallel_for(n, 512, body);
    } else {
        body(0, n, 0);
    }
    return YearEventTable::from_columns(spec.catalog_size, std::move(events),
                                        std::move(timestamps), std::move(offsets));
}

EventLossTable generate_elt(const GeneratorSpec& spec, std::uint32_t index) {
    check_spec(spec);
    auto rng = Xoshiro256::stream(spec.seed, kEltDomain, index);
    const auto size = static_cast<std::uint32_t>(rng.uniform_int(spec.elt_size.min, spec.elt_size.max));
    if (size > spec.catalog_size) {
        throw GeneratorError("ELT size " + std::to_string(size) + " exceeds catalog size " +
                             std::to_string(spec.catalog_size));
    }

    // Floyd's sampling: exactly `size` distinct ids from [1, catalog_size].
    std::unordered_set<std::uint32_t> chosen;
    chosen.reserve(size);
    std::vector<std::uint32_t> ids;
    ids.reserve(size);
    for (std::uint32_t j = spec.catalog_size - size + 1; j <= spec.catalog_size; ++j) {
        const auto t = static_cast<std::uint32_t>(rng.uniform_int(1, j));
        const auto pick = chosen.contains(t) ? j : t;
        chosen.insert(pick);
        ids.push_back(pick);
    }
    std::sort(ids.begin(), ids.end());

    EventLossTable elt;
    elt.catalog_size = spec.catalog_size;
    elt.terms = FinancialTerms::identity();
    elt.records.reserve(size);
    for (const auto id : ids) {
        elt.records.push_back({EventId(id), spec.loss_scale * std::exp(rng.normal())});
    }
    return elt;
}

std::vector<EltRef> generate_elts(const GeneratorSpec& spec) {
    std::vector<EltRef> out;
    out.reserve(spec.elt_count);
    for (std::uint32_t i = 0; i < spec.elt_count; ++i) {
        out.push_back(std::make_shared<const EventLossTable>(generate_elt(spec, i)));
    }
    return out;
}

std::vector<Layer> generate_layers(const std::vector<EltRef>& elts, std::uint32_t layer_count,
                                   std::uint32_t elts_per_layer, const LayerTerms& terms) {
    if (elts.empty() || elts_per_layer == 0) {
        throw GeneratorError("layers need at least one ELT each");
    }
    std::vector<Layer> layers;
    layers.reserve(layer_count);
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        Layer layer{"L" + std::to_string(i + 1), {}, terms};
        for (std::uint32_t j = 0; j < elts_per_layer; ++j) {
            layer.elts.push_back(elts[(static_cast<std::size_t>(i) * elts_per_layer + j) % elts.size()]);
        }
        layers.push_back(std::move(layer));
    }
    return layers;
}

}  // namespace are
