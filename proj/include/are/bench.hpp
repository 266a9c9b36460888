#ifndef ARE_BENCH_HPP
#define ARE_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace are {

enum class Sweep { Trials, EventsPerTrial, EltsPerLayer, Layers, Workers, ChunkSize };

// Throws std::invalid_argument for an unknown name.
Sweep parse_sweep(std::string_view name);
const char* to_string(Sweep sweep);

// Fixed shape the swept parameter varies around.
struct BenchShape {
    std::uint64_t seed = 2012;
    std::uint32_t catalog_size = 100'000;
    std::uint32_t trials = 20'000;
    std::uint32_t events_per_trial = 1000;
    std::uint32_t elts_per_layer = 5;
    std::uint32_t layers = 1;
    std::uint32_t workers = 1;
    std::optional<std::size_t> chunk_size = 4;
    std::uint32_t elt_size_min = 10'000;
    std::uint32_t elt_size_max = 30'000;
    std::uint32_t repeats = 3;  // best-of-N timing per point
};

struct BenchPoint {
    double value = 0.0;
    double wall_seconds = 0.0;
    std::uint64_t lookups = 0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares y = slope * x + intercept. Needs >= 2 distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct BenchReport {
    Sweep sweep = Sweep::Trials;
    std::vector<BenchPoint> points;
    std::string environment;
    std::optional<LinearFit> fit;      // size sweeps
    std::vector<double> speedup;       // worker sweep, relative to the first point
    std::string reference;             // published figures to compare against
};

// Default sample points per sweep, scaled down from the production shapes.
std::vector<double> default_points(Sweep sweep);

// Runs the sweep; data generation and table builds are excluded from the
// timings. Throws std::invalid_argument for fewer than three points.
BenchReport run_sweep(Sweep sweep, std::span<const double> points, const BenchShape& shape);

std::string environment_descriptor();

// Tabular report: '#' metadata lines, then value,wall_seconds,lookups[,speedup].
void write_report(const BenchReport& report, const std::filesystem::path& path);
std::string format_summary(const BenchReport& report);

}  // namespace are

#endif  // ARE_BENCH_HPP
