#ifndef ARE_GENERATOR_HPP
#define ARE_GENERATOR_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "are/domain.hpp"

namespace are {

class WorkerPool;

struct SizeRange {
    std::uint32_t min = 0;
    std::uint32_t max = 0;
};

// Synthetic portfolio shape. Defaults follow production shapes: 800-1500
// occurrences per trial, 10k-30k records per ELT.
struct GeneratorSpec {
    std::uint64_t seed = 1;
    std::uint32_t catalog_size = 200'000;
    std::uint32_t trial_count = 10'000;
    SizeRange events_per_trial{800, 1500};
    std::uint32_t elt_count = 15;
    SizeRange elt_size{10'000, 30'000};
    double loss_scale = 1.0e5;
};

class GeneratorError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Throws GeneratorError for empty ranges, zero counts or a non-positive scale.
void check_spec(const GeneratorSpec& spec);

// Trial i draws from its own stream, so the result does not depend on the
// pool size.
YearEventTable generate_yet(const GeneratorSpec& spec, WorkerPool* pool = nullptr);

// Distinct ids sampled without replacement; losses log-normal(0, 1) scaled
// by loss_scale; identity financial terms. Throws GeneratorError when the
// drawn size exceeds the catalog.
EventLossTable generate_elt(const GeneratorSpec& spec, std::uint32_t index);
std::vector<EltRef> generate_elts(const GeneratorSpec& spec);

// Layer i covers ELTs (i * elts_per_layer + j) mod elt_count, j < elts_per_layer.
std::vector<Layer> generate_layers(const std::vector<EltRef>& elts, std::uint32_t layer_count,
                                   std::uint32_t elts_per_layer, const LayerTerms& terms = {});

}  // namespace are

#endif  // ARE_GENERATOR_HPP
