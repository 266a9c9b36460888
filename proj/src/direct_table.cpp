#include "are/direct_table.hpp"

namespace are {

DirectAccessTable::DirectAccessTable(const EventLossTable& elt)
    : catalog_size_(elt.catalog_size),
      terms_(elt.terms),
      losses_(static_cast<std::size_t>(elt.catalog_size) + 1, 0.0) {
    for (const auto& rec : elt.records) {
        if (rec.event.value == 0 || rec.event.value > catalog_size_) {
            throw TableRangeError("ELT event " + std::to_string(rec.event.value) +
                                  " outside catalog of size " + std::to_string(catalog_size_));
        }
        losses_[rec.event.value] = rec.loss;
        if (rec.loss > 0.0) {
            ++nonzero_count_;
        }
    }
}

namespace {

void accumulate(MemoryFootprint& fp, const DirectAccessTable& table) {
    fp.loss_slots += table.catalog_size();
    fp.allocated_slots += table.slot_count();
    fp.loss_bytes += table.slot_count() * DirectAccessTable::kBytesPerLoss;
    fp.overhead_bytes += sizeof(DirectAccessTable);
}

}  // namespace

MemoryFootprint memory_footprint(std::span<const DirectAccessTable> tables) {
    MemoryFootprint fp;
    for (const auto& t : tables) {
        accumulate(fp, t);
    }
    return fp;
}

MemoryFootprint memory_footprint(std::span<const DirectAccessTable* const> tables) {
    MemoryFootprint fp;
    for (const auto* t : tables) {
        accumulate(fp, *t);
    }
    return fp;
}

}  // namespace are
