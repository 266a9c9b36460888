// are: generate portfolios, run aggregate analyses, compute tail metrics,
// benchmark the engine and serve interactive re-pricing.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "are/bench.hpp"
#include "are/engine.hpp"
#include "are/generator.hpp"
#include "are/http_api.hpp"
#include "are/io.hpp"
#include "are/metrics.hpp"
#include "are/pricing_service.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
    kOk = 0,
    kRuntimeError = 1,
    kArgumentError = 2,
    kValidationError = 3,
    kIoError = 4,
};

double parse_limit(const std::string& s) {
    if (s == "unlimited" || s == "inf") {
        return are::kUnlimited;
    }
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
        throw std::invalid_argument("bad limit '" + s + "'");
    }
    return v;
}

std::optional<std::size_t> parse_chunk(const std::string& s) {
    if (s == "none" || s == "unchunked" || s == "0") {
        return std::nullopt;
    }
    const auto v = std::stoul(s);
    return v;
}

are::SizeRange to_range(const std::vector<std::uint32_t>& v) {
    if (v.size() == 1) {
        return {v[0], v[0]};
    }
    return {v[0], v[1]};
}

struct GenOptions {
    std::string out;
    are::GeneratorSpec spec;
    std::vector<std::uint32_t> events{800, 1500};
    std::vector<std::uint32_t> elt_size{10'000, 30'000};
    std::uint32_t layers = 1;
    std::uint32_t elts_per_layer = 0;
    double occ_retention = 0.0;
    std::string occ_limit = "unlimited";
    double agg_retention = 0.0;
    std::string agg_limit = "unlimited";
    std::string format = "binary";
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
};

int cmd_gen(GenOptions& o) {
    o.spec.events_per_trial = to_range(o.events);
    o.spec.elt_size = to_range(o.elt_size);
    are::check_spec(o.spec);
    const auto format = are::parse_format(o.format);
    are::LayerTerms terms{o.occ_retention, parse_limit(o.occ_limit), o.agg_retention, parse_limit(o.agg_limit)};
    if (!are::valid(terms)) {
        throw std::invalid_argument("layer terms must be non-negative");
    }

    are::Dataset data;
    data.elts = are::generate_elts(o.spec);
    {
        are::WorkerPool pool(o.workers);
        data.yet = are::generate_yet(o.spec, &pool);
    }
    const auto per_layer = o.elts_per_layer ? o.elts_per_layer : o.spec.elt_count;
    data.layers = are::generate_layers(data.elts, o.layers, per_layer, terms);
    are::save_dataset(data, o.out, format);

    std::cout << "wrote " << data.yet.trial_count() << " trials (" << data.yet.occurrence_count()
              << " occurrences), " << data.elts.size() << " ELTs, " << data.layers.size()
              << " layer(s) to " << o.out << " [" << are::to_string(format) << "]\n";
    return kOk;
}

struct RunOptions {
    std::string input;
    std::string out;
    std::size_t workers = 1;
    std::string chunk = "4";
    std::string format = "binary";
};

int cmd_run(const RunOptions& o) {
    const auto data = are::load_dataset(o.input);
    are::EngineConfig cfg;
    cfg.worker_count = o.workers;
    cfg.chunk_size = parse_chunk(o.chunk);
    const auto format = are::parse_format(o.format);

    const auto result = are::analyse_portfolio(data.layers, data.yet, cfg);

    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) {
        throw are::IoError(are::IoErrorCode::OpenFailed, "cannot create " + o.out + ": " + ec.message());
    }
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& ylt : result.ylts) {
        const auto path = fs::path(o.out) / ("ylt_" + ylt.layer_id + are::extension(format));
        are::save_ylt(ylt, path, format);
        layers.push_back({{"layer_id", ylt.layer_id}, {"path", path.string()}});
    }

    const auto& st = result.stats;
    const double trials_per_sec = st.analysis_seconds > 0 ? st.trials / st.analysis_seconds : 0.0;
    nlohmann::json summary{
        {"trials", data.yet.trial_count()},
        {"layers", result.ylts.size()},
        {"workers", cfg.worker_count},
        {"chunk_size", cfg.chunk_size ? nlohmann::json(*cfg.chunk_size) : nlohmann::json("unchunked")},
        {"analysis_seconds", st.analysis_seconds},
        {"trials_per_second", trials_per_sec},
        {"lookups", st.lookups},
        {"peak_table_slots", st.peak_tables.loss_slots},
        {"peak_table_bytes", st.peak_tables.loss_bytes},
        {"ylts", layers},
    };
    std::ofstream(fs::path(o.out) / "run_summary.json") << summary.dump(2) << '\n';

    std::printf("trials            %zu\n", data.yet.trial_count());
    std::printf("layers            %zu\n", result.ylts.size());
    std::printf("analysis seconds  %.4f\n", st.analysis_seconds);
    std::printf("trials/sec        %.1f\n", trials_per_sec);
    std::printf("lookups           %llu\n", static_cast<unsigned long long>(st.lookups));
    std::printf("peak table bytes  %llu (%llu slots)\n",
                static_cast<unsigned long long>(st.peak_tables.loss_bytes),
                static_cast<unsigned long long>(st.peak_tables.loss_slots));
    return kOk;
}

struct MetricsOptions {
    std::vector<std::string> ylts;
    std::vector<double> rps{10, 50, 100, 250};
    std::string ep_out;
};

int cmd_metrics(const MetricsOptions& o) {
    std::vector<are::YearLossTable> ylts;
    for (const auto& p : o.ylts) {
        ylts.push_back(are::load_ylt(p));
    }
    const auto ylt = are::portfolio_rollup(ylts);
    const auto rows = are::tail_metrics(ylt.losses, o.rps);

    std::printf("%-16s %-24s %-24s\n", "return_period", "pml", "tvar");
    for (const auto& r : rows) {
        std::printf("%-16g %-24.17g %-24.17g\n", r.return_period, r.pml, r.tvar);
    }
    if (!o.ep_out.empty()) {
        const auto curve = are::ep_curve(ylt, o.rps);
        std::ofstream out(o.ep_out);
        if (!out) {
            throw are::IoError(are::IoErrorCode::OpenFailed, "cannot open " + o.ep_out);
        }
        out.precision(17);
        out << "exceedance_probability,loss\n";
        for (const auto& p : curve.points) {
            out << p.exceedance_probability << ',' << p.loss << '\n';
        }
    }
    return kOk;
}

struct BenchOptions {
    std::string sweep;
    std::vector<double> points;
    std::string out = "bench_report.csv";
    are::BenchShape shape;
    std::string chunk = "4";
    std::vector<std::uint32_t> elt_size{10'000, 30'000};
};

int cmd_bench(BenchOptions& o) {
    const auto sweep = are::parse_sweep(o.sweep);
    const auto sizes = to_range(o.elt_size);
    o.shape.elt_size_min = sizes.min;
    o.shape.elt_size_max = sizes.max;
    o.shape.chunk_size = parse_chunk(o.chunk);
    const auto points = o.points.empty() ? are::default_points(sweep) : o.points;
    const auto report = are::run_sweep(sweep, points, o.shape);
    are::write_report(report, o.out);
    std::cout << are::format_summary(report) << "report written to " << o.out << '\n';
    return kOk;
}

struct ServeOptions {
    std::string bind = "127.0.0.1";
    int port = 8080;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::size_t session_cap = 4;
    std::string data_root = ".";
    std::string chunk = "4";
};

std::atomic<are::PricingServer*> g_server{nullptr};

void on_signal(int) {
    if (auto* s = g_server.load()) {
        s->stop();
    }
}

int cmd_serve(const ServeOptions& o) {
    are::ServiceConfig cfg;
    cfg.workers = o.workers;
    cfg.session_cap = o.session_cap;
    cfg.data_root = o.data_root;
    cfg.chunk_size = parse_chunk(o.chunk);
    are::PricingService service(cfg);
    are::PricingServer server(service);
    const int port = server.bind(o.bind, o.port);
    if (port < 0) {
        std::cerr << "error: cannot bind " << o.bind << ':' << o.port << '\n';
        return kIoError;
    }
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << o.bind << ':' << port << " (workers=" << cfg.workers
              << ", session_cap=" << cfg.session_cap << ", data_root=" << cfg.data_root.string()
              << ")" << std::endl;
    server.listen_after_bind();
    g_server = nullptr;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Aggregate risk analysis engine"};
    app.require_subcommand(1);

    GenOptions gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic YET, ELTs and layers");
    g->add_option("-o,--out", gen.out, "Output directory")->required();
    g->add_option("--seed", gen.spec.seed, "PRNG seed");
    g->add_option("--catalog", gen.spec.catalog_size, "Event catalog size");
    g->add_option("--trials", gen.spec.trial_count, "Number of trials");
    g->add_option("--events", gen.events, "Occurrences per trial: N or MIN MAX")->expected(1, 2);
    g->add_option("--elts", gen.spec.elt_count, "Number of ELTs");
    g->add_option("--elt-size", gen.elt_size, "Records per ELT: N or MIN MAX")->expected(1, 2);
    g->add_option("--loss-scale", gen.spec.loss_scale, "Log-normal loss scale");
    g->add_option("--layers", gen.layers, "Number of layers");
    g->add_option("--elts-per-layer", gen.elts_per_layer, "ELTs per layer (default: all)");
    g->add_option("--occ-retention", gen.occ_retention);
    g->add_option("--occ-limit", gen.occ_limit, "Number or 'unlimited'");
    g->add_option("--agg-retention", gen.agg_retention);
    g->add_option("--agg-limit", gen.agg_limit, "Number or 'unlimited'");
    g->add_option("--format", gen.format, "tabular or binary")->check(CLI::IsMember({"tabular", "binary"}));
    g->add_option("--workers", gen.workers, "Generator threads")->check(CLI::PositiveNumber);

    RunOptions run;
    auto* r = app.add_subcommand("run", "Run aggregate analysis over a dataset");
    r->add_option("-i,--input", run.input, "Dataset directory")->required();
    r->add_option("-o,--out", run.out, "Output directory for YLTs and run summary")->required();
    r->add_option("--workers", run.workers, "Worker threads")->check(CLI::PositiveNumber);
    r->add_option("--chunk", run.chunk, "Chunk size, or 'none' for the unchunked path");
    r->add_option("--format", run.format, "YLT format")->check(CLI::IsMember({"tabular", "binary"}));

    MetricsOptions met;
    auto* m = app.add_subcommand("metrics", "PML and TVAR from one or more YLTs (rolled up)");
    m->add_option("--ylt", met.ylts, "YLT file(s)")->required();
    m->add_option("--rp", met.rps, "Return periods")->delimiter(',');
    m->add_option("--ep-out", met.ep_out, "Write the EP curve to this file");

    BenchOptions bench;
    auto* b = app.add_subcommand("bench", "Timing sweeps over problem size, workers or chunk size");
    b->add_option("--sweep", bench.sweep, "trials | events | elts | layers | workers | chunk")->required();
    b->add_option("--points", bench.points, "Sweep values")->delimiter(',');
    b->add_option("-o,--out", bench.out, "Report file");
    b->add_option("--seed", bench.shape.seed);
    b->add_option("--catalog", bench.shape.catalog_size);
    b->add_option("--trials", bench.shape.trials);
    b->add_option("--events", bench.shape.events_per_trial);
    b->add_option("--elts", bench.shape.elts_per_layer);
    b->add_option("--layers", bench.shape.layers);
    b->add_option("--workers", bench.shape.workers)->check(CLI::PositiveNumber);
    b->add_option("--chunk", bench.chunk);
    b->add_option("--elt-size", bench.elt_size, "Records per ELT: N or MIN MAX")->expected(1, 2);
    b->add_option("--repeats", bench.shape.repeats);

    ServeOptions serve;
    auto* s = app.add_subcommand("serve", "Run the re-pricing service");
    s->add_option("--bind", serve.bind)->envname("ARE_BIND");
    s->add_option("--port", serve.port)->envname("ARE_PORT");
    s->add_option("--workers", serve.workers)->envname("ARE_WORKERS")->check(CLI::PositiveNumber);
    s->add_option("--session-cap", serve.session_cap)->envname("ARE_SESSION_CAP")->check(CLI::PositiveNumber);
    s->add_option("--data-root", serve.data_root)->envname("ARE_DATA_ROOT");
    s->add_option("--chunk", serve.chunk)->envname("ARE_CHUNK");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kArgumentError;
    }

    try {
        if (*g) return cmd_gen(gen);
        if (*r) return cmd_run(run);
        if (*m) return cmd_metrics(met);
        if (*b) return cmd_bench(bench);
        if (*s) return cmd_serve(serve);
    } catch (const are::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        for (const auto& v : e.violations()) {
            std::cerr << "  - " << v.message << '\n';
        }
        return kValidationError;
    } catch (const are::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        // Includes GeneratorError and MetricsError.
        std::cerr << "error: " << e.what() << '\n';
        return kArgumentError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
