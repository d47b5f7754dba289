#pragma once

#include "threatgeo/analytics.hpp"
#include "threatgeo/date.hpp"
#include "threatgeo/model.hpp"
#include "threatgeo/spread.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace threatgeo::lens {

struct Landmark {
	Date date;
	std::string label;

	bool operator==(const Landmark &) const = default;
};

struct LandmarkLoad {
	std::vector<Landmark> landmarks; // sorted by date (stable for equal dates)
	std::vector<std::string> errors; // one per rejected row
};

/// CSV with header "date,label". Malformed rows are reported and skipped.
LandmarkLoad parse_landmarks(std::string_view text);
LandmarkLoad load_landmarks(const std::filesystem::path &path);

struct EventOverlay {
	std::vector<Landmark> landmarks; // only those inside the panel span
	analytics::TimeSeriesPanel panel;
};

struct TopKTable {
	/// "malware_family", "industry", "country" -> ranking of at most k entries.
	std::map<std::string, analytics::Ranking> categories;
};

struct CaseStudy {
	Corpus filtered;
	EventOverlay overlay;
	TopKTable top;
	spread::TransitionMatrix transitions;
	spread::SpreadGraph graph;
};

struct CaseStudyOptions {
	DateRange window;
	std::set<std::string> technique_ids; // empty = no technique clause
	std::size_t k = 5;
	std::vector<Landmark> landmarks;
	double min_prob = 0.0;
};

/// Window filter, then technique filter (each checked for emptiness, throwing
/// EmptyStudyError naming the clause); weekly panel over the window with the
/// landmarks that fall inside it; top-k tables; the filtered spread graph.
CaseStudy case_study(const Corpus &corpus, const CaseStudyOptions &options);

std::string top_table_json(const TopKTable &table);
std::string overlay_json(const EventOverlay &overlay);

} // namespace threatgeo::lens
