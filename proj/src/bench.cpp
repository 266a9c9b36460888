#include "are/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "are/engine.hpp"
#include "are/generator.hpp"
#include "are/io.hpp"

namespace are {

Sweep parse_sweep(std::string_view name) {
    if (name == "trials") return Sweep::Trials;
    if (name == "events" || name == "events_per_trial") return Sweep::EventsPerTrial;
    if (name == "elts" || name == "elts_per_layer") return Sweep::EltsPerLayer;
    if (name == "layers") return Sweep::Layers;
    if (name == "workers") return Sweep::Workers;
    if (name == "chunk" || name == "chunk_size") return Sweep::ChunkSize;
    throw std::invalid_argument("unknown sweep '" + std::string(name) + "'");
}

const char* to_string(Sweep sweep) {
    switch (sweep) {
        case Sweep::Trials: return "trials";
        case Sweep::EventsPerTrial: return "events_per_trial";
        case Sweep::EltsPerLayer: return "elts_per_layer";
        case Sweep::Layers: return "layers";
        case Sweep::Workers: return "workers";
        case Sweep::ChunkSize: return "chunk_size";
    }
    return "?";
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("linear fit needs two or more paired samples");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("linear fit needs two or more distinct x values");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        ss_res += r * r;
    }
    fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

std::vector<double> default_points(Sweep sweep) {
    switch (sweep) {
        case Sweep::Trials: return {20'000, 40'000, 60'000, 80'000, 100'000};
        case Sweep::EventsPerTrial: return {800, 900, 1000, 1100, 1200};
        case Sweep::EltsPerLayer: return {3, 6, 9, 12, 15};
        case Sweep::Layers: return {1, 2, 3, 4, 5};
        case Sweep::Workers: return {1, 2, 4, 8};
        case Sweep::ChunkSize: return {0, 1, 4, 12, 32};
    }
    return {};
}

std::string environment_descriptor() {
    std::ostringstream os;
    os << "hardware_threads=" << std::thread::hardware_concurrency();
#if defined(__clang__)
    os << ";compiler=clang-" << __clang_major__ << '.' << __clang_minor__;
#elif defined(__GNUC__)
    os << ";compiler=gcc-" << __GNUC__ << '.' << __GNUC_MINOR__;
#endif
#ifdef NDEBUG
    os << ";build=release";
#else
    os << ";build=debug";
#endif
    return os.str();
}

namespace {

// Tables per layer plus the layer terms.
struct TableSet {
    std::vector<std::vector<std::unique_ptr<DirectAccessTable>>> tables;
    std::vector<LayerTerms> terms;
};

struct Workload {
    std::shared_ptr<const YearEventTable> yet;
    std::shared_ptr<const TableSet> tables;
};

YearEventTable prefix(const YearEventTable& yet, std::size_t trials) {
    const auto off = yet.offsets().first(trials + 1);
    const auto n = static_cast<std::size_t>(off.back());
    return YearEventTable::from_columns(
        yet.catalog_size(), {yet.events().begin(), yet.events().begin() + static_cast<std::ptrdiff_t>(n)},
        {yet.timestamps().begin(), yet.timestamps().begin() + static_cast<std::ptrdiff_t>(n)},
        {off.begin(), off.end()});
}

GeneratorSpec spec_for(const BenchShape& shape, std::uint32_t trials, std::uint32_t events,
                       std::uint32_t elts) {
    GeneratorSpec spec;
    spec.seed = shape.seed;
    spec.catalog_size = shape.catalog_size;
    spec.trial_count = trials;
    spec.events_per_trial = {events, events};
    spec.elt_count = elts;
    spec.elt_size = {shape.elt_size_min, shape.elt_size_max};
    return spec;
}

// `layers` layers of `per_layer` tables each; layer i uses ELTs
// i*per_layer .. i*per_layer + per_layer - 1 from `elts`.
std::shared_ptr<const TableSet> build_tables(const std::vector<EltRef>& elts, std::uint32_t layers,
                                             std::uint32_t per_layer) {
    auto set = std::make_shared<TableSet>();
    set->terms.assign(layers, LayerTerms{});
    for (std::uint32_t l = 0; l < layers; ++l) {
        auto& layer = set->tables.emplace_back();
        for (std::uint32_t j = 0; j < per_layer; ++j) {
            layer.push_back(std::make_unique<DirectAccessTable>(
                *elts[(static_cast<std::size_t>(l) * per_layer + j) % elts.size()]));
        }
    }
    return set;
}

double time_once(const Workload& w, const EngineConfig& cfg, WorkerPool& pool, std::uint64_t& lookups) {
    lookups = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t l = 0; l < w.tables->tables.size(); ++l) {
        std::vector<const DirectAccessTable*> ptrs;
        for (const auto& t : w.tables->tables[l]) {
            ptrs.push_back(t.get());
        }
        run_layer(*w.yet, "bench", w.tables->terms[l], ptrs, cfg, pool, &lookups);
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// One sweep point. Either held for all repeats or rebuilt before each timing:
// trial prefixes to bound memory, tables so each repeat gets a fresh placement
// in memory (a bad placement otherwise slows one point on every repeat).
struct PointPlan {
    double value = 0.0;
    EngineConfig cfg;
    std::shared_ptr<const Workload> held;
    std::function<Workload()> make;
};

// Best-of-N with repeats interleaved across points, so a slow spell on a
// shared machine lands on every point rather than on one.
std::vector<BenchPoint> time_points(const std::vector<PointPlan>& plans, std::uint32_t repeats) {
    std::vector<BenchPoint> best;
    for (const auto& p : plans) {
        best.push_back({p.value, std::numeric_limits<double>::infinity(), 0});
    }
    for (std::uint32_t r = 0; r < std::max<std::uint32_t>(repeats, 1); ++r) {
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const auto& p = plans[i];
            const auto w = p.held ? p.held : std::make_shared<const Workload>(p.make());
            WorkerPool pool(p.cfg.worker_count);
            std::uint64_t lookups = 0;
            best[i].wall_seconds = std::min(best[i].wall_seconds, time_once(*w, p.cfg, pool, lookups));
            best[i].lookups = lookups;
        }
    }
    return best;
}

std::uint32_t as_count(double v, const char* what) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 4.0e9) {
        throw std::invalid_argument(std::string(what) + " must be a positive integer");
    }
    return static_cast<std::uint32_t>(v);
}

}  // namespace

BenchReport run_sweep(Sweep sweep, std::span<const double> points, const BenchShape& shape) {
    if (points.size() < 3) {
        throw std::invalid_argument("a sweep needs at least three points");
    }
    BenchReport report;
    report.sweep = sweep;
    report.environment = environment_descriptor();

    EngineConfig cfg;
    cfg.worker_count = shape.workers;
    cfg.chunk_size = shape.chunk_size;

    auto gen_pool = std::make_unique<WorkerPool>(std::max<unsigned>(1, std::thread::hardware_concurrency()));
    const auto held = [](std::shared_ptr<const YearEventTable> yet, std::shared_ptr<const TableSet> tables) {
        return std::make_shared<const Workload>(Workload{std::move(yet), std::move(tables)});
    };

    std::vector<PointPlan> plans;
    switch (sweep) {
        case Sweep::Trials: {
            std::uint32_t max_trials = 0;
            for (const double p : points) {
                max_trials = std::max(max_trials, as_count(p, "trial count"));
            }
            const auto spec = spec_for(shape, max_trials, shape.events_per_trial, shape.elts_per_layer * shape.layers);
            const auto full = std::make_shared<const YearEventTable>(generate_yet(spec, gen_pool.get()));
            const auto tables = build_tables(generate_elts(spec), shape.layers, shape.elts_per_layer);
            for (const double p : points) {
                const auto n = as_count(p, "trial count");
                plans.push_back({p, cfg, nullptr, [full, tables, n] {
                                     return Workload{std::make_shared<const YearEventTable>(prefix(*full, n)),
                                                     tables};
                                 }});
            }
            break;
        }
        case Sweep::EventsPerTrial: {
            const auto base = spec_for(shape, shape.trials, shape.events_per_trial, shape.elts_per_layer * shape.layers);
            const auto tables = build_tables(generate_elts(base), shape.layers, shape.elts_per_layer);
            for (const double p : points) {
                const auto spec = spec_for(shape, shape.trials, as_count(p, "events per trial"), 1);
                plans.push_back(
                    {p, cfg, held(std::make_shared<const YearEventTable>(generate_yet(spec, gen_pool.get())), tables),
                     nullptr});
            }
            break;
        }
        case Sweep::EltsPerLayer:
        case Sweep::Layers: {
            std::uint32_t max_value = 0;
            for (const double p : points) {
                max_value = std::max(max_value, as_count(p, to_string(sweep)));
            }
            const bool elt_sweep = sweep == Sweep::EltsPerLayer;
            const auto elt_count = elt_sweep ? max_value : shape.elts_per_layer * max_value;
            const auto spec = spec_for(shape, shape.trials, shape.events_per_trial, elt_count);
            const auto elts = std::make_shared<const std::vector<EltRef>>(generate_elts(spec));
            const auto yet = std::make_shared<const YearEventTable>(generate_yet(spec, gen_pool.get()));
            for (const double p : points) {
                const auto v = as_count(p, to_string(sweep));
                const auto layers = elt_sweep ? shape.layers : v;
                const auto per_layer = elt_sweep ? v : shape.elts_per_layer;
                plans.push_back({p, cfg, nullptr, [elts, yet, layers, per_layer] {
                                     return Workload{yet, build_tables(*elts, layers, per_layer)};
                                 }});
            }
            break;
        }
        case Sweep::Workers:
        case Sweep::ChunkSize: {
            const auto spec = spec_for(shape, shape.trials, shape.events_per_trial, shape.elts_per_layer * shape.layers);
            const auto w = held(std::make_shared<const YearEventTable>(generate_yet(spec, gen_pool.get())),
                                build_tables(generate_elts(spec), shape.layers, shape.elts_per_layer));
            for (const double p : points) {
                EngineConfig point_cfg = cfg;
                if (sweep == Sweep::Workers) {
                    point_cfg.worker_count = as_count(p, "worker count");
                } else if (p == 0.0) {
                    point_cfg.chunk_size = std::nullopt;
                } else {
                    point_cfg.chunk_size = as_count(p, "chunk size");
                }
                plans.push_back({p, point_cfg, w, nullptr});
            }
            break;
        }
    }
    gen_pool.reset();
    report.points = time_points(plans, shape.repeats);

    if (sweep == Sweep::Workers) {
        const double base = report.points.front().wall_seconds;
        for (const auto& pt : report.points) {
            report.speedup.push_back(base / pt.wall_seconds);
        }
        report.reference =
            "published CPU speedups (quad-core i7, 8 hardware threads): 2 cores 1.5x, 4 cores 2.2x, 8 cores 2.6x";
    } else if (sweep != Sweep::ChunkSize) {
        std::vector<double> x, y;
        for (const auto& pt : report.points) {
            x.push_back(pt.value);
            y.push_back(pt.wall_seconds);
        }
        report.fit = fit_line(x, y);
        report.reference = "runtime expected to grow linearly in the swept parameter";
    } else {
        report.reference = "published GPU chunking result: chunk size 4 cut runtime 38.47s -> 22.72s, flat to 12";
    }
    return report;
}

void write_report(const BenchReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError(IoErrorCode::OpenFailed, "cannot open " + path.string() + " for writing");
    }
    out.precision(17);
    out << "# sweep=" << to_string(report.sweep) << '\n';
    out << "# environment=" << report.environment << '\n';
    if (report.fit) {
        out << "# fit_slope=" << report.fit->slope << '\n';
        out << "# fit_intercept=" << report.fit->intercept << '\n';
        out << "# fit_r_squared=" << report.fit->r_squared << '\n';
    }
    out << "# reference=" << report.reference << '\n';
    out << "value,wall_seconds,lookups" << (report.speedup.empty() ? "" : ",speedup") << '\n';
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        const auto& p = report.points[i];
        out << p.value << ',' << p.wall_seconds << ',' << p.lookups;
        if (!report.speedup.empty()) {
            out << ',' << report.speedup[i];
        }
        out << '\n';
    }
    if (!out) {
        throw IoError(IoErrorCode::WriteFailed, "write to " + path.string() + " failed");
    }
}

std::string format_summary(const BenchReport& report) {
    std::ostringstream os;
    os << "sweep " << to_string(report.sweep) << " (" << report.environment << ")\n";
    os << "  value          seconds        lookups/s";
    if (!report.speedup.empty()) {
        os << "     speedup";
    }
    os << '\n';
    char line[160];
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        const auto& p = report.points[i];
        std::snprintf(line, sizeof line, "  %-14g %-14.4f %-14.3e", p.value, p.wall_seconds,
                      static_cast<double>(p.lookups) / p.wall_seconds);
        os << line;
        if (!report.speedup.empty()) {
            std::snprintf(line, sizeof line, " %.2fx", report.speedup[i]);
            os << line;
        }
        os << '\n';
    }
    if (report.fit) {
        std::snprintf(line, sizeof line, "  linear fit: seconds = %.6g * x + %.6g, R^2 = %.4f\n",
                      report.fit->slope, report.fit->intercept, report.fit->r_squared);
        os << line;
    }
    os << "  reference: " << report.reference << '\n';
    return os.str();
}

}  // namespace are
