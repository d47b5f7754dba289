#include "threatgeo/lens.hpp"

#include "threatgeo/csv.hpp"
#include "threatgeo/error.hpp"

#include <algorithm>
#include <json.hpp>

namespace threatgeo::lens {

LandmarkLoad parse_landmarks(std::string_view text) {
	LandmarkLoad out;
	auto records = csv::parse(text);
	if (records.empty()) {
		throw ParseError("header", "landmarks CSV needs a 'date,label' header");
	}
	if (records.front().fields != std::vector<std::string>{"date", "label"}) {
		throw ParseError("header", "landmarks CSV header must be 'date,label'");
	}
	for (std::size_t i = 1; i < records.size(); ++i) {
		const auto &rec = records[i];
		if (rec.fields.size() != 2) {
			out.errors.push_back("line " + std::to_string(rec.line) + ": expected 2 columns");
			continue;
		}
		auto date = try_parse_date(rec.fields[0]);
		if (!date || rec.fields[0].size() != 10) {
			out.errors.push_back("line " + std::to_string(rec.line) + ": invalid date '" + rec.fields[0] + "'");
			continue;
		}
		out.landmarks.push_back({*date, rec.fields[1]});
	}
	std::stable_sort(out.landmarks.begin(), out.landmarks.end(),
	                 [](const Landmark &a, const Landmark &b) { return a.date < b.date; });
	return out;
}

LandmarkLoad load_landmarks(const std::filesystem::path &path) {
	return parse_landmarks(read_file(path));
}

CaseStudy case_study(const Corpus &corpus, const CaseStudyOptions &opt) {
	if (opt.window.from > opt.window.to) {
		throw std::invalid_argument("case-study window has from > to");
	}
	if (opt.k < 1) {
		throw std::invalid_argument("k must be >= 1");
	}
	EventFilter by_window;
	by_window.from = opt.window.from;
	by_window.to = opt.window.to;
	Corpus windowed = filter_events(corpus, by_window);
	if (windowed.empty()) {
		throw EmptyStudyError("window");
	}
	Corpus filtered = windowed;
	if (!opt.technique_ids.empty()) {
		EventFilter by_technique;
		by_technique.technique_ids = opt.technique_ids;
		filtered = filter_events(windowed, by_technique);
		if (filtered.empty()) {
			throw EmptyStudyError("technique_ids");
		}
	}

	CaseStudy study;
	study.overlay.panel = analytics::build_panel(filtered, analytics::Bin::week, std::nullopt, opt.window);
	const Date span_begin = study.overlay.panel.start;
	const Date span_end = analytics::bin_advance(span_begin, analytics::Bin::week,
	                                             static_cast<std::int64_t>(study.overlay.panel.width())) -
	                      std::chrono::days{1};
	for (const auto &lm : opt.landmarks) {
		if (lm.date >= span_begin && lm.date <= span_end) {
			study.overlay.landmarks.push_back(lm);
		}
	}

	study.top.categories["malware_family"] =
	    analytics::top_values(filtered, [](const ThreatEvent &e) { return e.malware_families; }, opt.k);
	study.top.categories["industry"] =
	    analytics::top_values(filtered, [](const ThreatEvent &e) { return e.industries; }, opt.k);
	study.top.categories["country"] =
	    analytics::top_values(filtered, [](const ThreatEvent &e) { return e.countries; }, opt.k);

	auto groups = spread::estimate_transitions(filtered, spread::GroupBy::all);
	if (auto it = groups.find(spread::kAllGroup); it != groups.end()) {
		study.transitions = it->second;
	}
	study.graph = spread::build_spread_graph(study.transitions, analytics::count_by_country(filtered), opt.min_prob,
	                                         spread::kAllGroup);
	study.filtered = std::move(filtered);
	return study;
}

std::string top_table_json(const TopKTable &table) {
	nlohmann::ordered_json j = nlohmann::ordered_json::object();
	for (const auto &[category, ranking] : table.categories) {
		auto arr = nlohmann::ordered_json::array();
		for (const auto &[value, count] : ranking) {
			arr.push_back({{"value", value}, {"count", count}});
		}
		j[category] = arr;
	}
	return j.dump(2) + "\n";
}

std::string overlay_json(const EventOverlay &overlay) {
	nlohmann::ordered_json j;
	auto lms = nlohmann::ordered_json::array();
	for (const auto &lm : overlay.landmarks) {
		lms.push_back({{"date", format_date(lm.date)}, {"label", lm.label}});
	}
	j["landmarks"] = lms;
	j["bin"] = analytics::to_string(overlay.panel.bin);
	j["start"] = format_date(overlay.panel.start);
	auto bins = nlohmann::ordered_json::array();
	std::vector<double> totals(overlay.panel.width(), 0.0);
	for (const auto &row : overlay.panel.values) {
		for (std::size_t c = 0; c < row.size(); ++c) {
			totals[c] += row[c];
		}
	}
	for (std::size_t c = 0; c < overlay.panel.width(); ++c) {
		bins.push_back({{"bin_start", format_date(overlay.panel.bin_start(c))}, {"count", totals[c]}});
	}
	j["totals"] = bins;
	return j.dump(2) + "\n";
}

} // namespace threatgeo::lens
