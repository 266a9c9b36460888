#include "are/domain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace are {

YearEventTable::YearEventTable(std::uint32_t catalog_size) : catalog_size_(catalog_size) {}

YearEventTable YearEventTable::from_columns(std::uint32_t catalog_size, std::vector<EventId> events,
                                            std::vector<double> timestamps,
                                            std::vector<std::uint64_t> offsets) {
    if (events.size() != timestamps.size()) {
        throw std::invalid_argument("event and timestamp columns differ in length");
    }
    if (offsets.empty() || offsets.front() != 0 || offsets.back() != events.size()) {
        throw std::invalid_argument("trial offsets do not cover the event column");
    }
    if (!std::is_sorted(offsets.begin(), offsets.end())) {
        throw std::invalid_argument("trial offsets must be non-decreasing");
    }
    YearEventTable yet(catalog_size);
    yet.events_ = std::move(events);
    yet.timestamps_ = std::move(timestamps);
    yet.offsets_ = std::move(offsets);
    return yet;
}

void YearEventTable::add_trial(std::vector<EventOccurrence> occurrences) {
    std::stable_sort(occurrences.begin(), occurrences.end(),
                     [](const EventOccurrence& a, const EventOccurrence& b) {
                         return a.timestamp < b.timestamp;
                     });
    events_.reserve(events_.size() + occurrences.size());
    timestamps_.reserve(timestamps_.size() + occurrences.size());
    for (const auto& occ : occurrences) {
        events_.push_back(occ.event);
        timestamps_.push_back(occ.timestamp);
    }
    offsets_.push_back(events_.size());
}

TrialView YearEventTable::trial(std::size_t i) const {
    const auto begin = static_cast<std::size_t>(offsets_[i]);
    const auto count = static_cast<std::size_t>(offsets_[i + 1]) - begin;
    return {std::span(events_).subspan(begin, count), std::span(timestamps_).subspan(begin, count)};
}

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::EventOutOfRange: return "event id out of catalog range";
        case ViolationKind::UnsortedTrial: return "trial occurrences not sorted by timestamp";
        case ViolationKind::TrialLength: return "trial length outside [1, 10000]";
        case ViolationKind::EmptyYet: return "year event table has no trials";
        case ViolationKind::TimestampRange: return "timestamp outside [0, 1]";
        case ViolationKind::InvalidFinancialTerms: return "invalid financial terms";
        case ViolationKind::NegativeLoss: return "negative or non-finite loss";
        case ViolationKind::DuplicateEvent: return "duplicate event id in ELT";
        case ViolationKind::CatalogMismatch: return "catalog size mismatch";
        case ViolationKind::InvalidLayerTerms: return "invalid layer terms";
        case ViolationKind::EmptyLayer: return "layer has no ELTs";
        case ViolationKind::NullElt: return "layer references a missing ELT";
    }
    return "unknown violation";
}

bool valid(const FinancialTerms& t) {
    // NaN fails every comparison below.
    return t.exchange_rate > 0.0 && std::isfinite(t.exchange_rate) && t.event_retention >= 0.0 &&
           std::isfinite(t.event_retention) && t.event_limit > 0.0 && t.share >= 0.0 &&
           t.share <= 1.0;
}

bool valid(const LayerTerms& t) {
    return t.occ_retention >= 0.0 && std::isfinite(t.occ_retention) && t.occ_limit >= 0.0 &&
           t.agg_retention >= 0.0 && std::isfinite(t.agg_retention) && t.agg_limit >= 0.0;
}

namespace {

void report(std::vector<Violation>& out, ViolationKind kind, std::string detail) {
    std::string message = to_string(kind);
    if (!detail.empty()) {
        message += ": ";
        message += detail;
    }
    out.push_back({kind, std::move(message)});
}

}  // namespace

std::vector<Violation> validate_elt(const EventLossTable& elt) {
    std::vector<Violation> out;
    if (!valid(elt.terms)) {
        report(out, ViolationKind::InvalidFinancialTerms, "");
    }
    std::unordered_set<std::uint32_t> seen;
    seen.reserve(elt.records.size());
    for (const auto& rec : elt.records) {
        if (rec.event.value == 0 || rec.event.value > elt.catalog_size) {
            report(out, ViolationKind::EventOutOfRange,
                   "event " + std::to_string(rec.event.value) + " with catalog size " +
                       std::to_string(elt.catalog_size));
        }
        if (!(rec.loss >= 0.0) || !std::isfinite(rec.loss)) {
            report(out, ViolationKind::NegativeLoss, "event " + std::to_string(rec.event.value));
        }
        if (!seen.insert(rec.event.value).second) {
            report(out, ViolationKind::DuplicateEvent, "event " + std::to_string(rec.event.value));
        }
    }
    return out;
}

std::vector<Violation> validate_yet(const YearEventTable& yet) {
    std::vector<Violation> out;
    if (yet.trial_count() == 0) {
        report(out, ViolationKind::EmptyYet, "");
        return out;
    }
    for (std::size_t i = 0; i < yet.trial_count(); ++i) {
        const auto trial = yet.trial(i);
        const auto where = "trial " + std::to_string(i);
        if (trial.size() == 0 || trial.size() > YearEventTable::kMaxTrialLength) {
            report(out, ViolationKind::TrialLength, where);
        }
        for (std::size_t d = 0; d < trial.size(); ++d) {
            const auto e = trial.events[d].value;
            if (e == 0 || e > yet.catalog_size()) {
                report(out, ViolationKind::EventOutOfRange,
                       where + ", event " + std::to_string(e) + " with catalog size " +
                           std::to_string(yet.catalog_size()));
            }
            const double t = trial.timestamps[d];
            if (!(t >= 0.0 && t <= 1.0)) {
                report(out, ViolationKind::TimestampRange, where);
            }
            if (d > 0 && trial.timestamps[d - 1] > t) {
                report(out, ViolationKind::UnsortedTrial, where);
            }
        }
    }
    return out;
}

std::vector<Violation> validate_portfolio(std::span<const Layer> layers,
                                          const YearEventTable& yet) {
    auto out = validate_yet(yet);
    std::unordered_set<const EventLossTable*> checked;
    for (const auto& layer : layers) {
        const auto where = "layer '" + layer.id + "'";
        if (layer.elts.empty()) {
            report(out, ViolationKind::EmptyLayer, where);
        }
        if (!valid(layer.terms)) {
            report(out, ViolationKind::InvalidLayerTerms, where);
        }
        for (const auto& elt : layer.elts) {
            if (!elt) {
                report(out, ViolationKind::NullElt, where);
                continue;
            }
            if (!checked.insert(elt.get()).second) {
                continue;
            }
            if (elt->catalog_size != yet.catalog_size()) {
                report(out, ViolationKind::CatalogMismatch,
                       where + ": ELT catalog " + std::to_string(elt->catalog_size) +
                           " vs YET catalog " + std::to_string(yet.catalog_size()));
            }
            auto elt_violations = validate_elt(*elt);
            for (auto& v : elt_violations) {
                v.message = where + ": " + v.message;
                out.push_back(std::move(v));
            }
        }
    }
    return out;
}

}  // namespace are
