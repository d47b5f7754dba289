#include "threatgeo/analytics.hpp"
#include "threatgeo/cli.hpp"
#include "threatgeo/cluster.hpp"
#include "threatgeo/correlate.hpp"
#include "threatgeo/error.hpp"
#include "threatgeo/forecast.hpp"
#include "threatgeo/model.hpp"
#include "threatgeo/normalize.hpp"
#include "threatgeo/spread.hpp"
#include "threatgeo/synth.hpp"
#include "threatgeo/version.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace threatgeo;

namespace {

py::dict event_dict(const ThreatEvent &ev) {
	py::dict d;
	d["id"] = ev.id;
	d["created_at"] = format_date(ev.created_at);
	d["title"] = ev.title;
	d["description"] = ev.description;
	d["countries"] = ev.countries;
	d["raw_country_strings"] = ev.raw_country_strings;
	d["adversary"] = ev.adversary ? py::object(py::str(*ev.adversary)) : py::object(py::none());
	d["malware_families"] = ev.malware_families;
	d["industries"] = ev.industries;
	d["technique_ids"] = ev.technique_ids;
	d["tags"] = ev.tags;
	return d;
}

py::dict model_dict(const forecast::ForecastModel &m) {
	py::dict d;
	d["kind"] = forecast::to_string(m.kind);
	d["p"] = m.p;
	d["d"] = m.d;
	d["q"] = m.q;
	d["phi"] = m.phi;
	d["theta"] = m.theta;
	d["intercept"] = m.intercept;
	d["window"] = m.window;
	return d;
}

Corpus parse_checked(const std::string &text, CorpusFormat format) {
	auto load = parse_corpus(text, format, "python");
	return load.corpus;
}

} // namespace

PYBIND11_MODULE(_core, m) {
	m.doc() = "Spatio-temporal analytics for threat-intelligence feeds";
	m.attr("__version__") = std::string(kVersion);

	static py::exception<Error> error(m, "ThreatgeoError", PyExc_RuntimeError);
	py::register_exception_translator([](std::exception_ptr p) {
		try {
			if (p) {
				std::rethrow_exception(p);
			}
		} catch (const Error &e) {
			py::set_error(error, e.what());
		}
	});

	py::class_<Corpus>(m, "Corpus")
	    .def_static("from_ndjson", [](const std::string &text) { return parse_checked(text, CorpusFormat::ndjson); })
	    .def_static("from_csv", [](const std::string &text) { return parse_checked(text, CorpusFormat::csv); })
	    .def_static(
	        "load",
	        [](const std::string &path) { return load_corpus(path, corpus_format_for_path(path)).corpus; },
	        py::arg("path"))
	    .def("to_ndjson", [](const Corpus &c) { return corpus_to_string(c, CorpusFormat::ndjson); })
	    .def("to_csv", [](const Corpus &c) { return corpus_to_string(c, CorpusFormat::csv); })
	    .def("events",
	         [](const Corpus &c) {
		         py::list out;
		         for (const auto &ev : c) {
			         out.append(event_dict(ev));
		         }
		         return out;
	         })
	    .def_property_readonly("duplicates_dropped", &Corpus::duplicates_dropped)
	    .def("__len__", &Corpus::size)
	    .def("__eq__", [](const Corpus &a, const Corpus &b) { return a == b; });

	m.def("levenshtein", py::overload_cast<std::string_view, std::string_view>(&normalize::levenshtein),
	      py::arg("a"), py::arg("b"));

	py::class_<normalize::Gazetteer>(m, "Gazetteer")
	    .def_static("load", [](const std::string &path) { return normalize::Gazetteer::load(path); })
	    .def_static("from_csv", &normalize::Gazetteer::from_csv)
	    .def_static("default", []() { return normalize::Gazetteer::load(std::string(THREATGEO_DATA_DIR) + "/gazetteer.csv"); })
	    .def("canonicalize",
	         [](const normalize::Gazetteer &g, const std::string &raw, int threshold) {
		         auto c = normalize::canonicalize(raw, g, threshold);
		         return c.canonical ? py::object(py::str(*c.canonical)) : py::object(py::none());
	         },
	         py::arg("raw"), py::arg("threshold") = normalize::kDefaultThreshold)
	    .def("normalize",
	         [](const normalize::Gazetteer &g, const Corpus &c, int threshold) {
		         return normalize::normalize_corpus(c, g, threshold).first;
	         },
	         py::arg("corpus"), py::arg("threshold") = normalize::kDefaultThreshold);

	m.def("count_by_country", [](const Corpus &c) { return analytics::count_by_country(c).counts; });
	m.def("cumulative_share",
	      [](const Corpus &c) { return analytics::cumulative_share(analytics::count_by_country(c)); });

	m.def(
	    "estimate_transitions",
	    [](const Corpus &c, const std::string &group_by) {
		    py::dict out;
		    for (const auto &[key, tm] : spread::estimate_transitions(c, spread::group_by_from_string(group_by))) {
			    py::dict d;
			    d["countries"] = tm.countries;
			    d["counts"] = tm.counts;
			    d["probs"] = tm.probs;
			    out[py::str(key)] = d;
		    }
		    return out;
	    },
	    py::arg("corpus"), py::arg("group_by") = "all");

	m.def(
	    "spectral_cluster",
	    [](std::vector<std::string> countries, const std::vector<std::vector<double>> &weights, std::optional<int> k,
	       int max_k, std::uint64_t seed) {
		    cluster::AffinityMatrix a{std::move(countries), linalg::Matrix::from_rows(weights)};
		    cluster::SpectralOptions opt;
		    opt.k = k;
		    opt.max_k = max_k;
		    opt.seed = seed;
		    auto res = cluster::spectral_cluster(a, opt);
		    py::dict d;
		    d["k"] = res.k;
		    d["labels"] = res.labels;
		    d["eigenvalues"] = res.eigenvalues;
		    return d;
	    },
	    py::arg("countries"), py::arg("weights"), py::arg("k") = py::none(), py::arg("max_k") = 12,
	    py::arg("seed") = 42);

	m.def("pearson", [](const std::vector<double> &x, const std::vector<double> &y) { return correlate::pearson(x, y); });
	m.def(
	    "lagged_correlation",
	    [](const std::vector<double> &x, const std::vector<double> &y, int max_lag) {
		    auto r = correlate::lagged_correlation(x, y, max_lag);
		    return py::make_tuple(r.r ? py::object(py::float_(*r.r)) : py::object(py::none()), r.lag);
	    },
	    py::arg("x"), py::arg("y"), py::arg("max_lag") = 7);

	m.def(
	    "fit_arima",
	    [](const std::vector<double> &x, int p, int d, int q) { return model_dict(forecast::fit_arima(x, p, d, q)); },
	    py::arg("series"), py::arg("p"), py::arg("d") = 0, py::arg("q") = 0);
	m.def(
	    "forecast_next",
	    [](const std::vector<double> &x, int p, int d, int q) {
		    return forecast::forecast_next(forecast::fit_arima(x, p, d, q), x);
	    },
	    py::arg("series"), py::arg("p"), py::arg("d") = 0, py::arg("q") = 0);
	m.def(
	    "grid_search",
	    [](const std::vector<double> &x, int p_max) {
		    forecast::GridOptions opt;
		    opt.p_max = p_max;
		    auto rep = forecast::grid_search(x, opt);
		    py::dict d = model_dict(rep.model);
		    d["rmse"] = rep.rmse;
		    d["r2"] = rep.r2;
		    d["validation_start"] = rep.validation_start;
		    d["predictions"] = rep.predictions;
		    return d;
	    },
	    py::arg("series"), py::arg("p_max") = 10);

	m.def("synth_generate", [](const std::string &spec_json) { return synth::generate(synth::spec_from_json(spec_json)); },
	      py::arg("spec_json"));
	m.def(
	    "arma_series",
	    [](const std::vector<double> &phi, const std::vector<double> &theta, std::size_t n, std::uint64_t seed) {
		    return synth::arma_series(phi, theta, 0.0, 1.0, n, seed);
	    },
	    py::arg("phi"), py::arg("theta"), py::arg("n"), py::arg("seed"));

	m.def(
	    "run_cli",
	    [](const std::vector<std::string> &args) {
		    std::ostringstream out;
		    std::ostringstream err;
		    const int code = cli::run(args, out, err);
		    return py::make_tuple(code, out.str(), err.str());
	    },
	    py::arg("args"));
}
