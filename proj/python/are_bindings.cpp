#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "are/engine.hpp"
#include "are/generator.hpp"
#include "are/io.hpp"
#include "are/metrics.hpp"

namespace py = pybind11;
using namespace are;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> from_array(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Aggregate risk analysis engine";
    m.attr("UNLIMITED") = kUnlimited;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<FinancialTerms>(m, "FinancialTerms")
        .def(py::init([](double rate, double retention, double limit, double share) {
                 return FinancialTerms{rate, retention, limit, share};
             }),
             py::arg("exchange_rate") = 1.0, py::arg("event_retention") = 0.0, py::arg("event_limit") = kUnlimited,
             py::arg("share") = 1.0)
        .def_readwrite("exchange_rate", &FinancialTerms::exchange_rate)
        .def_readwrite("event_retention", &FinancialTerms::event_retention)
        .def_readwrite("event_limit", &FinancialTerms::event_limit)
        .def_readwrite("share", &FinancialTerms::share)
        .def(py::self == py::self);

    py::class_<LayerTerms>(m, "LayerTerms")
        .def(py::init([](double occ_r, double occ_l, double agg_r, double agg_l) {
                 return LayerTerms{occ_r, occ_l, agg_r, agg_l};
             }),
             py::arg("occ_retention") = 0.0, py::arg("occ_limit") = kUnlimited, py::arg("agg_retention") = 0.0,
             py::arg("agg_limit") = kUnlimited)
        .def_readwrite("occ_retention", &LayerTerms::occ_retention)
        .def_readwrite("occ_limit", &LayerTerms::occ_limit)
        .def_readwrite("agg_retention", &LayerTerms::agg_retention)
        .def_readwrite("agg_limit", &LayerTerms::agg_limit)
        .def(py::self == py::self);

    py::class_<YearEventTable>(m, "YearEventTable")
        .def(py::init<std::uint32_t>(), py::arg("catalog_size"))
        .def("add_trial",
             [](YearEventTable& yet, const std::vector<std::pair<std::uint32_t, double>>& occ) {
                 std::vector<EventOccurrence> v;
                 for (const auto& [e, t] : occ) v.push_back({EventId(e), t});
                 yet.add_trial(std::move(v));
             },
             py::arg("occurrences"), "Append a trial given (event_id, timestamp) pairs.")
        .def_property_readonly("catalog_size", &YearEventTable::catalog_size)
        .def_property_readonly("trial_count", &YearEventTable::trial_count)
        .def_property_readonly("occurrence_count", &YearEventTable::occurrence_count)
        .def("__len__", &YearEventTable::trial_count)
        .def("trial",
             [](const YearEventTable& yet, std::size_t i) {
                 if (i >= yet.trial_count()) throw py::index_error("trial index out of range");
                 const auto t = yet.trial(i);
                 std::vector<std::uint32_t> events;
                 for (const auto e : t.events) events.push_back(e.value);
                 return py::make_tuple(events, std::vector<double>(t.timestamps.begin(), t.timestamps.end()));
             })
        .def(py::self == py::self);

    py::class_<EventLossTable, std::shared_ptr<EventLossTable>>(m, "EventLossTable")
        .def(py::init([](std::uint32_t catalog, const std::map<std::uint32_t, double>& losses, FinancialTerms t) {
                 auto elt = std::make_shared<EventLossTable>();
                 elt->catalog_size = catalog;
                 elt->terms = t;
                 for (const auto& [e, l] : losses) elt->records.push_back({EventId(e), l});
                 return elt;
             }),
             py::arg("catalog_size"), py::arg("losses"), py::arg("terms") = FinancialTerms{})
        .def_readonly("catalog_size", &EventLossTable::catalog_size)
        .def_readwrite("terms", &EventLossTable::terms)
        .def_property_readonly("losses",
                               [](const EventLossTable& elt) {
                                   std::map<std::uint32_t, double> out;
                                   for (const auto& r : elt.records) out[r.event.value] = r.loss;
                                   return out;
                               })
        .def("__len__", [](const EventLossTable& elt) { return elt.records.size(); });

    py::class_<Layer>(m, "Layer")
        .def(py::init([](std::string id, const std::vector<std::shared_ptr<EventLossTable>>& elts, LayerTerms t) {
                 Layer layer{std::move(id), {}, t};
                 for (const auto& e : elts) layer.elts.push_back(e);
                 return layer;
             }),
             py::arg("id"), py::arg("elts"), py::arg("terms") = LayerTerms{})
        .def_readwrite("id", &Layer::id)
        .def_readwrite("terms", &Layer::terms)
        .def_property_readonly("elt_count", [](const Layer& l) { return l.elts.size(); });

    m.def("apply_financial_terms", &apply_financial_terms, py::arg("loss"), py::arg("terms"));
    m.def("apply_occurrence_terms", &apply_occurrence_terms, py::arg("loss"), py::arg("terms"));
    m.def("apply_aggregate_terms",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> losses, const LayerTerms& t) {
              return apply_aggregate_terms(std::span<const double>(losses.data(), losses.size()), t);
          },
          py::arg("occurrence_losses"), py::arg("terms"));

    m.def("generate",
          [](std::uint64_t seed, std::uint32_t catalog, std::uint32_t trials, std::pair<std::uint32_t, std::uint32_t> events,
             std::uint32_t elt_count, std::pair<std::uint32_t, std::uint32_t> elt_size, double loss_scale) {
              GeneratorSpec spec{seed, catalog, trials, {events.first, events.second}, elt_count,
                                 {elt_size.first, elt_size.second}, loss_scale};
              auto yet = generate_yet(spec);
              std::vector<std::shared_ptr<EventLossTable>> elts;
              for (std::uint32_t i = 0; i < elt_count; ++i) {
                  elts.push_back(std::make_shared<EventLossTable>(generate_elt(spec, i)));
              }
              return py::make_tuple(std::move(yet), elts);
          },
          py::arg("seed") = 1, py::arg("catalog_size") = 200'000, py::arg("trials") = 10'000,
          py::arg("events_per_trial") = std::make_pair(800u, 1500u), py::arg("elt_count") = 15,
          py::arg("elt_size") = std::make_pair(10'000u, 30'000u), py::arg("loss_scale") = 1e5,
          "Synthetic (YearEventTable, [EventLossTable]) from a seed.");

    m.def("analyse",
          [](const std::vector<Layer>& layers, const YearEventTable& yet, std::size_t workers,
             std::optional<std::size_t> chunk) {
              EngineConfig cfg;
              cfg.worker_count = workers;
              cfg.chunk_size = chunk;
              std::vector<YearLossTable> ylts;
              {
                  py::gil_scoped_release release;
                  ylts = run_aggregate_analysis(layers, yet, cfg);
              }
              py::dict out;
              for (const auto& y : ylts) out[py::str(y.layer_id)] = to_array(y.losses);
              return out;
          },
          py::arg("layers"), py::arg("yet"), py::arg("workers") = 1,
          py::arg("chunk_size") = std::optional<std::size_t>(EngineConfig::kDefaultChunkSize),
          "Year loss table per layer id, as numpy arrays.");

    m.def("pml", [](py::array_t<double> l, double rp) { return pml(from_array(l), rp); }, py::arg("losses"),
          py::arg("return_period"));
    m.def("tvar", [](py::array_t<double> l, double rp) { return tvar(from_array(l), rp); }, py::arg("losses"),
          py::arg("return_period"));
    m.def("ep_curve",
          [](py::array_t<double> l, const std::vector<double>& rps) {
              std::vector<std::pair<double, double>> out;
              for (const auto& p : ep_curve(from_array(l), rps).points) {
                  out.emplace_back(p.exceedance_probability, p.loss);
              }
              return out;
          },
          py::arg("losses"), py::arg("return_periods"), "[(exceedance probability, loss)] by return period.");

    py::register_exception<MetricsError>(m, "MetricsError", PyExc_ValueError);

    m.def("save_ylt",
          [](const std::string& id, py::array_t<double> losses, const std::filesystem::path& path,
             const std::string& format) { save_ylt({id, from_array(losses)}, path, parse_format(format)); },
          py::arg("layer_id"), py::arg("losses"), py::arg("path"), py::arg("format") = "binary");
    m.def("load_ylt",
          [](const std::filesystem::path& path) {
              const auto y = load_ylt(path);
              return py::make_tuple(y.layer_id, to_array(y.losses));
          },
          py::arg("path"));
    m.def("save_yet",
          [](const YearEventTable& yet, const std::filesystem::path& path, const std::string& format) {
              save_yet(yet, path, parse_format(format));
          },
          py::arg("yet"), py::arg("path"), py::arg("format") = "binary");
    m.def("load_yet", &load_yet, py::arg("path"));
}
