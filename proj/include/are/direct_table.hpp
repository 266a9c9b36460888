#ifndef ARE_DIRECT_TABLE_HPP
#define ARE_DIRECT_TABLE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "are/domain.hpp"

namespace are {

class TableRangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Dense, catalog-indexed loss array for one ELT.
///
/// Slot e holds the ELT's loss for event e, zero when the event is absent.
/// Slot 0 is allocated but never read so event ids index the array directly.
/// Immutable once built.
class DirectAccessTable {
public:
    static constexpr std::size_t kBytesPerLoss = sizeof(double);

    // Throws TableRangeError for an event id outside [1, catalog_size].
    explicit DirectAccessTable(const EventLossTable& elt);

    std::uint32_t catalog_size() const { return catalog_size_; }
    const FinancialTerms& terms() const { return terms_; }
    std::size_t nonzero_count() const { return nonzero_count_; }
    std::size_t slot_count() const { return losses_.size(); }
    std::span<const double> losses() const { return losses_; }

    // Bounds-checked lookup.
    double lookup(EventId event) const {
        if (event.value == 0 || event.value > catalog_size_) {
            throw TableRangeError("event " + std::to_string(event.value) +
                                  " outside catalog of size " + std::to_string(catalog_size_));
        }
        return losses_[event.value];
    }

    // Hot-path lookup; caller guarantees 1 <= event <= catalog_size.
    double operator[](EventId event) const { return losses_[event.value]; }

private:
    std::uint32_t catalog_size_;
    FinancialTerms terms_;
    std::size_t nonzero_count_ = 0;
    std::vector<double> losses_;
};

struct MemoryFootprint {
    std::uint64_t loss_slots = 0;       // event-loss pairs: catalog_size summed over tables
    std::uint64_t allocated_slots = 0;  // loss_slots plus the unused slot 0 of each table
    std::uint64_t loss_bytes = 0;       // allocated_slots * kBytesPerLoss
    std::uint64_t overhead_bytes = 0;  // per-table object overhead
};

MemoryFootprint memory_footprint(std::span<const DirectAccessTable> tables);
MemoryFootprint memory_footprint(std::span<const DirectAccessTable* const> tables);

}  // namespace are

#endif  // ARE_DIRECT_TABLE_HPP
