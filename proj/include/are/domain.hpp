#ifndef ARE_DOMAIN_HPP
#define ARE_DOMAIN_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace are {

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

// Dense catalog index in [1, catalog_size]. 0 is reserved as "no event".
struct EventId {
    std::uint32_t value = 0;

    constexpr EventId() = default;
    constexpr explicit EventId(std::uint32_t v) : value(v) {}

    friend constexpr bool operator==(EventId, EventId) = default;
    friend constexpr auto operator<=>(EventId, EventId) = default;
};

struct EventOccurrence {
    EventId event;
    double timestamp = 0.0;  // fraction of the contractual year, [0, 1]
};

// Read-only view of one trial inside a YearEventTable.
struct TrialView {
    std::span<const EventId> events;
    std::span<const double> timestamps;

    std::size_t size() const { return events.size(); }
};

// Columnar store of all trials: one flat event vector, one flat timestamp
// vector and a boundary offset array of length trial_count + 1.
class YearEventTable {
public:
    static constexpr std::size_t kMaxTrialLength = 10000;

    YearEventTable() = default;
    explicit YearEventTable(std::uint32_t catalog_size);

    // Rebuild from raw columns; offsets must start at 0 and be non-decreasing.
    static YearEventTable from_columns(std::uint32_t catalog_size, std::vector<EventId> events,
                                       std::vector<double> timestamps,
                                       std::vector<std::uint64_t> offsets);

    // Appends a trial, stable-sorting occurrences by timestamp.
    void add_trial(std::vector<EventOccurrence> occurrences);

    std::uint32_t catalog_size() const { return catalog_size_; }
    std::size_t trial_count() const { return offsets_.size() - 1; }
    std::size_t occurrence_count() const { return events_.size(); }
    TrialView trial(std::size_t i) const;

    std::span<const EventId> events() const { return events_; }
    std::span<const double> timestamps() const { return timestamps_; }
    std::span<const std::uint64_t> offsets() const { return offsets_; }

    friend bool operator==(const YearEventTable&, const YearEventTable&) = default;

private:
    std::uint32_t catalog_size_ = 0;
    std::vector<EventId> events_;
    std::vector<double> timestamps_;
    std::vector<std::uint64_t> offsets_{0};
};

// Per-event transformation applied to every loss drawn from an ELT.
struct FinancialTerms {
    double exchange_rate = 1.0;
    double event_retention = 0.0;
    double event_limit = kUnlimited;
    double share = 1.0;

    static constexpr FinancialTerms identity() { return {}; }
    friend bool operator==(const FinancialTerms&, const FinancialTerms&) = default;
};

struct EventLoss {
    EventId event;
    double loss = 0.0;

    friend bool operator==(const EventLoss&, const EventLoss&) = default;
};

struct EventLossTable {
    std::uint32_t catalog_size = 0;
    std::vector<EventLoss> records;
    FinancialTerms terms;

    friend bool operator==(const EventLossTable&, const EventLossTable&) = default;
};

struct LayerTerms {
    double occ_retention = 0.0;
    double occ_limit = kUnlimited;
    double agg_retention = 0.0;
    double agg_limit = kUnlimited;

    friend bool operator==(const LayerTerms&, const LayerTerms&) = default;
};

using EltRef = std::shared_ptr<const EventLossTable>;

struct Layer {
    std::string id;
    std::vector<EltRef> elts;
    LayerTerms terms;
};

struct YearLossTable {
    std::string layer_id;
    std::vector<double> losses;

    friend bool operator==(const YearLossTable&, const YearLossTable&) = default;
};

enum class ViolationKind {
    EventOutOfRange,
    UnsortedTrial,
    TrialLength,
    EmptyYet,
    TimestampRange,
    InvalidFinancialTerms,
    NegativeLoss,
    DuplicateEvent,
    CatalogMismatch,
    InvalidLayerTerms,
    EmptyLayer,
    NullElt,
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string message;
};

bool valid(const FinancialTerms& terms);
bool valid(const LayerTerms& terms);

std::vector<Violation> validate_elt(const EventLossTable& elt);
std::vector<Violation> validate_yet(const YearEventTable& yet);

// Checks every type invariant across the portfolio, including catalog size
// consistency between the YET and every ELT. Empty result means valid.
std::vector<Violation> validate_portfolio(std::span<const Layer> layers,
                                          const YearEventTable& yet);

}  // namespace are

#endif  // ARE_DOMAIN_HPP
