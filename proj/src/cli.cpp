#include "threatgeo/cli.hpp"

#include "threatgeo/analytics.hpp"
#include "threatgeo/cluster.hpp"
#include "threatgeo/correlate.hpp"
#include "threatgeo/error.hpp"
#include "threatgeo/forecast.hpp"
#include "threatgeo/ingest.hpp"
#include "threatgeo/lens.hpp"
#include "threatgeo/normalize.hpp"
#include "threatgeo/report.hpp"
#include "threatgeo/spread.hpp"
#include "threatgeo/synth.hpp"
#include "threatgeo/version.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <sstream>
#include <thread>

namespace threatgeo::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Globals {
	std::string input;
	std::string output_dir = ".";
	std::uint64_t seed = 42;
	std::string format = "json";
	bool verbose = false;
	unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

struct Run {
	Globals g;
	std::vector<std::string> inputs;
	std::vector<std::pair<std::string, std::string>> outputs; // file name -> contents
	std::ostream *log = nullptr;

	void write(const std::string &name, std::string contents) {
		outputs.emplace_back(name, std::move(contents));
	}
	void info(const std::string &msg) const {
		if (g.verbose && log) {
			*log << msg << '\n';
		}
	}
	bool csv() const {
		return g.format == "csv";
	}
};

std::string slug(std::string_view s) {
	std::string out;
	for (unsigned char c : s) {
		out.push_back(std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_');
	}
	return out.empty() ? "_" : out;
}

std::vector<std::string> split_commas(const std::string &s) {
	std::vector<std::string> out;
	std::stringstream ss(s);
	std::string item;
	while (std::getline(ss, item, ',')) {
		const auto b = item.find_first_not_of(' ');
		const auto e = item.find_last_not_of(' ');
		if (b != std::string::npos) {
			out.push_back(item.substr(b, e - b + 1));
		}
	}
	return out;
}

Corpus load_input(Run &run) {
	if (run.g.input.empty()) {
		throw CLI::RequiredError("--input");
	}
	run.inputs.push_back(run.g.input);
	auto res = load_corpus(run.g.input, corpus_format_for_path(run.g.input));
	run.info("loaded " + std::to_string(res.corpus.size()) + " events (" + std::to_string(res.rejected) +
	         " rejected)");
	return std::move(res.corpus);
}

CorpusFormat corpus_format(const Run &run) {
	return run.csv() ? CorpusFormat::csv : CorpusFormat::ndjson;
}

std::string corpus_name(const Run &run, const std::string &stem) {
	return stem + (run.csv() ? ".csv" : ".ndjson");
}

std::string default_gazetteer() {
	return std::string(THREATGEO_DATA_DIR) + "/gazetteer.csv";
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
	CLI::App app{"Spatio-temporal analytics for crowd-sourced threat-intelligence feeds", "threatgeo"};
	app.set_version_flag("--version", std::string(kVersion));
	app.require_subcommand(1);
	app.fallthrough();
	app.set_config("--config", "", "Key-value config file; explicit flags take precedence");

	Run run;
	run.log = &err;
	auto &g = run.g;
	app.add_option("-i,--input", g.input, "Input corpus (.ndjson or .csv)");
	app.add_option("-o,--output-dir", g.output_dir, "Directory for reports and the run manifest");
	app.add_option("--seed", g.seed, "Random seed");
	app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
	app.add_flag("-v,--verbose", g.verbose, "Progress messages on stderr");
	app.add_option("--threads", g.threads, "Worker threads (never changes results)")->check(CLI::PositiveNumber);

	// ingest
	auto *ingest_cmd = app.add_subcommand("ingest", "Fetch a pulse feed or parse fixture pages into a corpus");
	std::string fixtures, url, api_key, since;
	int page_size = 50, max_pages = 10, max_concurrent = 4, retries = 3, timeout_ms = 10000, backoff_ms = 1000;
	ingest_cmd->add_option("--fixtures", fixtures, "Directory of pulse .json/.html pages")->check(CLI::ExistingDirectory);
	ingest_cmd->add_option("--url", url, "Pulse feed URL");
	ingest_cmd->add_option("--api-key", api_key, "Feed API key (X-API-KEY)");
	ingest_cmd->add_option("--since", since, "Only pulses created on or after YYYY-MM-DD");
	ingest_cmd->add_option("--page-size", page_size)->check(CLI::PositiveNumber);
	ingest_cmd->add_option("--max-pages", max_pages)->check(CLI::PositiveNumber);
	ingest_cmd->add_option("--max-concurrent", max_concurrent)->check(CLI::PositiveNumber);
	ingest_cmd->add_option("--retries", retries)->check(CLI::NonNegativeNumber);
	ingest_cmd->add_option("--timeout-ms", timeout_ms)->check(CLI::PositiveNumber);
	ingest_cmd->add_option("--backoff-ms", backoff_ms)->check(CLI::NonNegativeNumber);

	// normalize
	auto *normalize_cmd = app.add_subcommand("normalize", "Canonicalize country strings against a gazetteer");
	std::string gazetteer_path = default_gazetteer();
	int threshold = normalize::kDefaultThreshold;
	normalize_cmd->add_option("--gazetteer", gazetteer_path, "Gazetteer CSV")->check(CLI::ExistingFile);
	normalize_cmd->add_option("--threshold", threshold, "Maximum edit distance")->check(CLI::NonNegativeNumber);

	// stats
	auto *stats_cmd = app.add_subcommand("stats", "Country rankings, cumulative share, pairs and time series");
	std::size_t top = 10, min_pair = 1;
	std::string bin_name = "month";
	std::optional<int> year;
	stats_cmd->add_option("--top", top, "Number of countries in the ranking")->check(CLI::PositiveNumber);
	stats_cmd->add_option("--bin", bin_name)->check(CLI::IsMember({"day", "week", "month"}));
	stats_cmd->add_option("--min-pair", min_pair, "Minimum co-targeting count for a pair")->check(CLI::PositiveNumber);
	stats_cmd->add_option("--year", year, "Also rank malware families for this year");

	// spread
	auto *spread_cmd = app.add_subcommand("spread", "Transition matrices and spread graphs");
	std::string group_by = "all";
	double min_prob = 0.0;
	bool dot = false;
	spread_cmd->add_option("--group-by", group_by)->check(CLI::IsMember({"all", "malware_family", "adversary", "tag"}));
	spread_cmd->add_option("--min-prob", min_prob, "Display threshold for edges")->check(CLI::Range(0.0, 0.999999));
	spread_cmd->add_flag("--dot", dot, "Write one DOT file per group");

	// cluster
	auto *cluster_cmd = app.add_subcommand("cluster", "Spectral clustering of countries");
	std::optional<int> k;
	int max_k = 12;
	std::size_t min_events = 1;
	cluster_cmd->add_option("--k", k, "Fixed cluster count (default: eigengap)")->check(CLI::PositiveNumber);
	cluster_cmd->add_option("--max-k", max_k)->check(CLI::Range(2, 1000));
	cluster_cmd->add_option("--min-events", min_events)->check(CLI::PositiveNumber);

	// correlate
	auto *correlate_cmd = app.add_subcommand("correlate", "Pointwise and lagged correlation heatmaps");
	int max_lag = 7;
	std::string mode_name = "lagged", corr_bin = "day";
	std::size_t corr_top = 20;
	correlate_cmd->add_option("--max-lag", max_lag, "Lag window (or the fixed lag)")->check(CLI::NonNegativeNumber);
	correlate_cmd->add_option("--mode", mode_name)->check(CLI::IsMember({"pointwise", "lagged", "fixed-lag"}));
	correlate_cmd->add_option("--bin", corr_bin)->check(CLI::IsMember({"day", "week", "month"}));
	correlate_cmd->add_option("--top", corr_top, "Use the N most targeted countries")->check(CLI::Range(2, 100000));

	// forecast
	auto *forecast_cmd = app.add_subcommand("forecast", "Grid-searched AR/ARMA/ARIMA incident-rate forecasts");
	std::string country, kinds = "AR,ARMA,ARIMA", fc_bin = "week";
	int p_max = 10;
	bool log1p = false;
	forecast_cmd->add_option("--country", country, "Country to forecast")->required();
	forecast_cmd->add_option("--kinds", kinds, "Comma-separated model kinds");
	forecast_cmd->add_option("--p-max", p_max)->check(CLI::Range(1, 50));
	forecast_cmd->add_option("--bin", fc_bin)->check(CLI::IsMember({"day", "week", "month"}));
	forecast_cmd->add_flag("--log1p", log1p, "Model log1p(count)");

	// lens
	auto *lens_cmd = app.add_subcommand("lens", "Filtered case study: overlay, top-k tables, spread graph");
	std::string from, to, techniques, landmarks_path;
	std::size_t top_k = 5;
	double lens_min_prob = 0.0;
	lens_cmd->add_option("--from", from, "Window start YYYY-MM-DD")->required();
	lens_cmd->add_option("--to", to, "Window end YYYY-MM-DD")->required();
	lens_cmd->add_option("--techniques", techniques, "Comma-separated technique ids");
	lens_cmd->add_option("--landmarks", landmarks_path, "CSV date,label")->check(CLI::ExistingFile);
	lens_cmd->add_option("--top-k", top_k)->check(CLI::PositiveNumber);
	lens_cmd->add_option("--min-prob", lens_min_prob)->check(CLI::Range(0.0, 0.999999));

	// synth
	auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus from a JSON spec");
	std::string spec_path;
	synth_cmd->add_option("--spec", spec_path, "SynthSpec JSON")->required()->check(CLI::ExistingFile);

	std::vector<std::string> reversed(args.rbegin(), args.rend());
	try {
		app.parse(reversed);
	} catch (const CLI::CallForHelp &e) {
		out << app.help();
		return kExitOk;
	} catch (const CLI::CallForVersion &e) {
		out << kVersion << '\n';
		return kExitOk;
	} catch (const CLI::ParseError &e) {
		err << "error: " << e.what() << "\n\n" << app.help();
		return kExitUsage;
	}
	if (!g.input.empty() && !fs::exists(g.input)) {
		err << "error: --input: file does not exist: " << g.input << '\n';
		return kExitUsage;
	}

	CLI::App *sub = app.get_subcommands().front();
	const std::string name = sub->get_name();
	int exit_code = kExitOk;
	std::string failure;
	try {
		if (sub == ingest_cmd) {
			std::vector<ThreatEvent> events;
			std::vector<std::string> errors;
			std::size_t records = 0;
			if (!fixtures.empty()) {
				run.inputs.push_back(fixtures);
				events = ingest::parse_fixture_directory(fixtures, errors);
				records = events.size() + errors.size();
			} else if (!url.empty()) {
				ingest::FeedConfig cfg;
				cfg.base_url = url;
				if (!api_key.empty()) {
					cfg.api_key = api_key;
				}
				cfg.page_size = page_size;
				cfg.max_pages = max_pages;
				cfg.max_concurrent_requests = max_concurrent;
				cfg.retry_budget = retries;
				cfg.request_timeout = std::chrono::milliseconds(timeout_ms);
				cfg.backoff_base = std::chrono::milliseconds(backoff_ms);
				std::optional<Date> since_date;
				if (!since.empty()) {
					since_date = parse_date(since);
				}
				auto fetched = ingest::fetch_feed(cfg, since_date);
				errors = fetched.errors;
				records = fetched.records.size();
				for (const auto &rec : fetched.records) {
					try {
						events.push_back(ingest::parse_pulse_json(rec));
					} catch (const Error &e) {
						errors.push_back(rec.source_id + ": " + e.what());
					}
				}
			} else {
				throw CLI::RequiredError("ingest needs --fixtures or --url");
			}
			std::vector<ThreatEvent> valid;
			for (auto &ev : events) {
				if (auto problem = validate_event(ev)) {
					errors.push_back(ev.id + ": " + *problem);
				} else {
					valid.push_back(std::move(ev));
				}
			}
			Corpus corpus(std::move(valid), fixtures.empty() ? url : fixtures);
			run.write(corpus_name(run, "corpus"), corpus_to_string(corpus, corpus_format(run)));
			ordered_json rep;
			rep["records"] = records;
			rep["events"] = corpus.size();
			rep["duplicates_dropped"] = corpus.duplicates_dropped();
			rep["errors"] = errors;
			run.write("ingest_report.json", rep.dump(2) + "\n");
			if (!errors.empty()) {
				err << errors.size() << " record(s) rejected; see ingest_report.json\n";
			}
			if (corpus.empty() && !errors.empty()) {
				exit_code = kExitData;
			}
		} else if (sub == normalize_cmd) {
			Corpus corpus = load_input(run);
			run.inputs.push_back(gazetteer_path);
			auto gaz = normalize::Gazetteer::load(gazetteer_path);
			auto [normalized, rep] = normalize::normalize_corpus(corpus, gaz, threshold);
			run.write(corpus_name(run, "corpus.normalized"), corpus_to_string(normalized, corpus_format(run)));
			ordered_json j;
			j["resolved"] = rep.resolved;
			j["threshold_used"] = rep.threshold_used;
			auto arr = ordered_json::array();
			for (const auto &u : rep.unresolved) {
				arr.push_back({{"raw", u.raw},
				               {"best", u.best},
				               {"distance", u.distance == normalize::kInfiniteDistance
				                                ? ordered_json(nullptr)
				                                : ordered_json(u.distance)}});
			}
			j["unresolved"] = arr;
			run.write("normalization_report.json", j.dump(2) + "\n");
		} else if (sub == stats_cmd) {
			Corpus corpus = load_input(run);
			auto counts = analytics::count_by_country(corpus);
			const std::string top_stem = "top" + std::to_string(top);
			if (run.csv()) {
				run.write(top_stem + ".csv", report::counts_csv(counts, top));
				run.write("pair_counts.csv", report::pairs_csv(analytics::pair_counts(corpus, min_pair)));
			} else {
				run.write(top_stem + ".json", report::counts_json(counts, top));
				run.write("pair_counts.json", report::pairs_json(analytics::pair_counts(corpus, min_pair)));
			}
			if (counts.total > 0) {
				auto share = analytics::cumulative_share(counts);
				run.write(run.csv() ? "cumulative_share.csv" : "cumulative_share.json",
				          run.csv() ? report::cumulative_csv(share) : report::cumulative_json(share));
			}
			if (!corpus.empty()) {
				run.write("panel_" + bin_name + ".csv",
				          analytics::panel_to_csv(analytics::build_panel(corpus, analytics::bin_from_string(bin_name))));
			}
			if (year) {
				run.write("top_malware_" + std::to_string(*year) + ".json",
				          report::ranking_json(analytics::top_malware(corpus, *year, top), "family"));
			}
		} else if (sub == spread_cmd) {
			Corpus corpus = load_input(run);
			auto groups = spread::estimate_transitions(corpus, spread::group_by_from_string(group_by));
			auto weights = analytics::count_by_country(corpus);
			run.write("transitions.json", report::transitions_json(groups));
			auto graphs = ordered_json::array();
			for (const auto &[key, tm] : groups) {
				auto graph = spread::build_spread_graph(tm, weights, min_prob, key);
				graphs.push_back(ordered_json::parse(spread::graph_to_json(graph)));
				if (dot) {
					run.write("spread_" + slug(key) + ".dot", spread::export_dot(graph));
				}
			}
			run.write("graphs.json", graphs.dump(2) + "\n");
		} else if (sub == cluster_cmd) {
			Corpus corpus = load_input(run);
			auto aff = cluster::affinity_from_corpus(corpus, min_events);
			cluster::SpectralOptions opts;
			opts.k = k;
			opts.max_k = max_k;
			opts.seed = g.seed;
			opts.threads = g.threads;
			auto assignment = cluster::spectral_cluster(aff, opts);
			if (run.csv()) {
				run.write("cluster_labels.csv", cluster::labels_csv(assignment));
			} else {
				run.write("clusters.json", cluster::report_json(assignment));
			}
			run.write("clusters.txt", cluster::report_text(assignment));
		} else if (sub == correlate_cmd) {
			Corpus corpus = load_input(run);
			auto counts = analytics::count_by_country(corpus);
			std::vector<std::string> chosen;
			for (const auto &[c, n] : analytics::top_countries(counts, corr_top)) {
				chosen.push_back(c);
			}
			std::sort(chosen.begin(), chosen.end());
			auto panel = analytics::build_panel(corpus, analytics::bin_from_string(corr_bin), chosen);
			auto matrix = correlate::correlation_heatmap(panel, correlate::mode_from_string(mode_name), max_lag);
			if (run.csv()) {
				run.write("correlation.csv", correlate::matrix_to_csv(matrix));
			} else {
				run.write("correlation.json", correlate::matrix_to_json(matrix));
			}
			run.write("correlation.svg", report::svg_heatmap({matrix.countries, matrix.r}));
		} else if (sub == forecast_cmd) {
			Corpus corpus = load_input(run);
			forecast::GridOptions opts;
			opts.kinds.clear();
			for (const auto &kname : split_commas(kinds)) {
				opts.kinds.insert(forecast::kind_from_string(kname));
			}
			opts.p_max = p_max;
			opts.log1p = log1p;
			if (analytics::count_by_country(corpus).counts.count(country) == 0) {
				throw Error("country '" + country + "' does not occur in the input corpus");
			}
			auto panel = analytics::build_panel(corpus, analytics::bin_from_string(fc_bin),
			                                    std::vector<std::string>{country});
			auto rep = forecast::grid_search(panel.values.front(), opts);
			rep.country = country;
			const std::string stem = "forecast_" + slug(country);
			run.write(stem + ".json", forecast::report_to_json(rep));
			run.write(stem + ".csv", forecast::predictions_csv(rep));
		} else if (sub == lens_cmd) {
			Corpus corpus = load_input(run);
			lens::CaseStudyOptions opts;
			opts.window = {parse_date(from), parse_date(to)};
			for (const auto &t : split_commas(techniques)) {
				opts.technique_ids.insert(t);
			}
			opts.k = top_k;
			opts.min_prob = lens_min_prob;
			std::vector<std::string> landmark_errors;
			if (!landmarks_path.empty()) {
				run.inputs.push_back(landmarks_path);
				auto loaded = lens::load_landmarks(landmarks_path);
				opts.landmarks = std::move(loaded.landmarks);
				landmark_errors = std::move(loaded.errors);
				for (const auto &e : landmark_errors) {
					err << "landmarks: " << e << '\n';
				}
			}
			auto study = lens::case_study(corpus, opts);
			run.write("lens_top.json", lens::top_table_json(study.top));
			run.write("lens_overlay.json", lens::overlay_json(study.overlay));
			run.write("lens_panel.csv", analytics::panel_to_csv(study.overlay.panel));
			run.write("lens_transitions.json", report::transitions_json({{spread::kAllGroup, study.transitions}}));
			run.write("lens_graph.json", spread::graph_to_json(study.graph));
			run.write("lens_spread.dot", spread::export_dot(study.graph));
		} else if (sub == synth_cmd) {
			run.inputs.push_back(spec_path);
			auto spec = synth::spec_from_json(read_file(spec_path));
			if (app.get_option("--seed")->count() > 0) {
				spec.seed = g.seed;
			} else {
				g.seed = spec.seed;
			}
			run.write(corpus_name(run, "corpus"), corpus_to_string(synth::generate(spec), corpus_format(run)));
		}
	} catch (const CLI::RequiredError &e) {
		failure = e.what();
		exit_code = kExitUsage;
	} catch (const std::exception &e) {
		failure = e.what();
		exit_code = kExitData;
	}
	if (!failure.empty()) {
		err << "error: " << failure << '\n';
		run.outputs.clear();
	}

	// Outputs and manifest.
	try {
		fs::create_directories(g.output_dir);
		ordered_json manifest;
		manifest["tool"] = "threatgeo";
		manifest["version"] = kVersion;
		manifest["subcommand"] = name;
		ordered_json flags = ordered_json::object();
		std::map<std::string, std::string> sorted_flags;
		auto collect = [&](const CLI::App *scope) {
			for (const auto *opt : scope->get_options()) {
				if (opt->count() == 0) {
					continue;
				}
				const std::string flag = opt->get_name();
				if (flag == "--output-dir" || flag == "--help" || flag == "--version") {
					continue;
				}
				std::string joined;
				for (const auto &r : opt->results()) {
					joined += (joined.empty() ? "" : ",") + r;
				}
				sorted_flags[flag] = joined;
			}
		};
		collect(&app);
		collect(sub);
		for (const auto &[f, v] : sorted_flags) {
			flags[f] = v;
		}
		manifest["flags"] = flags;
		manifest["seed"] = g.seed;
		auto inputs = ordered_json::array();
		for (const auto &in : run.inputs) {
			ordered_json entry{{"path", in}};
			if (fs::is_regular_file(in)) {
				entry["fnv1a64"] = report::fnv1a64_hex(read_file(in));
			}
			inputs.push_back(entry);
		}
		manifest["inputs"] = inputs;
		auto outputs = ordered_json::array();
		std::sort(run.outputs.begin(), run.outputs.end());
		for (const auto &[file, contents] : run.outputs) {
			write_file(fs::path(g.output_dir) / file, contents);
			outputs.push_back({{"file", file}, {"bytes", contents.size()}, {"fnv1a64", report::fnv1a64_hex(contents)}});
		}
		manifest["outputs"] = outputs;
		manifest["exit_code"] = exit_code;
		if (!failure.empty()) {
			manifest["error"] = failure;
		}
		write_file(fs::path(g.output_dir) / "manifest.json", manifest.dump(2) + "\n");
		run.info("wrote " + std::to_string(run.outputs.size()) + " file(s) to " + g.output_dir);
	} catch (const std::exception &e) {
		err << "error: " << e.what() << '\n';
		return kExitData;
	}
	return exit_code;
}

} // namespace threatgeo::cli
