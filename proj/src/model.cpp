#include "threatgeo/model.hpp"

#include "threatgeo/csv.hpp"
#include "threatgeo/error.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_set>

namespace threatgeo {

using ordered_json = nlohmann::ordered_json;

Corpus::Corpus(std::vector<ThreatEvent> events, std::string provenance)
    : provenance_(std::move(provenance)), ingested_at_(std::chrono::system_clock::now()) {
	std::unordered_set<std::string> seen;
	events_.reserve(events.size());
	for (auto &ev : events) {
		if (ev.id.empty()) {
			throw std::invalid_argument("event id must be non-empty");
		}
		if (!seen.insert(ev.id).second) {
			++duplicates_dropped_;
			continue;
		}
		events_.push_back(std::move(ev));
	}
	std::sort(events_.begin(), events_.end(), [](const ThreatEvent &a, const ThreatEvent &b) {
		if (a.created_at != b.created_at) {
			return a.created_at < b.created_at;
		}
		return a.id < b.id;
	});
}

CorpusFormat corpus_format_from_string(std::string_view name) {
	if (name == "ndjson" || name == "json") {
		return CorpusFormat::ndjson;
	}
	if (name == "csv") {
		return CorpusFormat::csv;
	}
	throw std::invalid_argument("unknown corpus format: " + std::string(name));
}

CorpusFormat corpus_format_for_path(const std::filesystem::path &path) {
	return path.extension() == ".csv" ? CorpusFormat::csv : CorpusFormat::ndjson;
}

std::optional<std::string> validate_event(const ThreatEvent &event, Date today) {
	if (event.id.empty()) {
		return "empty id";
	}
	if (event.created_at < Date{kEarliestEventDate} || event.created_at > today + std::chrono::days{1}) {
		return "created_at " + format_date(event.created_at) + " outside accepted range";
	}
	return std::nullopt;
}

namespace {

ordered_json list_json(const std::vector<std::string> &items) {
	auto arr = ordered_json::array();
	for (const auto &s : items) {
		arr.push_back(s);
	}
	return arr;
}

std::vector<std::string> list_from_json(const ordered_json &obj, const char *key) {
	std::vector<std::string> out;
	auto it = obj.find(key);
	if (it == obj.end() || it->is_null()) {
		return out;
	}
	if (!it->is_array()) {
		throw ParseError(key, "expected array");
	}
	for (const auto &v : *it) {
		if (!v.is_string()) {
			throw ParseError(key, "expected array of strings");
		}
		out.push_back(v.get<std::string>());
	}
	return out;
}

std::string string_from_json(const ordered_json &obj, const char *key, bool required) {
	auto it = obj.find(key);
	if (it == obj.end() || it->is_null()) {
		if (required) {
			throw ParseError(key, "missing");
		}
		return {};
	}
	if (!it->is_string()) {
		throw ParseError(key, "expected string");
	}
	return it->get<std::string>();
}

void check_list_for_csv(const std::vector<std::string> &items, std::string_view field) {
	for (const auto &s : items) {
		if (s.empty() || s.find(';') != std::string::npos) {
			throw std::invalid_argument("list field '" + std::string(field) +
			                            "' holds an empty item or an item containing ';'");
		}
	}
}

} // namespace

std::string event_to_ndjson(const ThreatEvent &event) {
	ordered_json j;
	j["id"] = event.id;
	j["created_at"] = format_date(event.created_at);
	j["title"] = event.title;
	j["description"] = event.description;
	j["countries"] = list_json(event.countries);
	j["raw_country_strings"] = list_json(event.raw_country_strings);
	j["adversary"] = event.adversary ? ordered_json(*event.adversary) : ordered_json(nullptr);
	j["malware_families"] = list_json(event.malware_families);
	j["industries"] = list_json(event.industries);
	j["technique_ids"] = list_json(event.technique_ids);
	j["tags"] = list_json(event.tags);
	return j.dump();
}

ThreatEvent event_from_ndjson(std::string_view line) {
	ordered_json j;
	try {
		j = ordered_json::parse(line);
	} catch (const nlohmann::json::parse_error &e) {
		throw ParseError("json", e.what());
	}
	if (!j.is_object()) {
		throw ParseError("json", "record is not an object");
	}
	ThreatEvent ev;
	ev.id = string_from_json(j, "id", true);
	ev.created_at = parse_date(string_from_json(j, "created_at", true));
	ev.title = string_from_json(j, "title", false);
	ev.description = string_from_json(j, "description", false);
	ev.countries = list_from_json(j, "countries");
	ev.raw_country_strings = list_from_json(j, "raw_country_strings");
	if (auto it = j.find("adversary"); it != j.end() && !it->is_null()) {
		ev.adversary = string_from_json(j, "adversary", false);
	}
	ev.malware_families = list_from_json(j, "malware_families");
	ev.industries = list_from_json(j, "industries");
	ev.technique_ids = list_from_json(j, "technique_ids");
	ev.tags = list_from_json(j, "tags");
	return ev;
}

std::vector<std::string> event_to_csv_fields(const ThreatEvent &event) {
	check_list_for_csv(event.countries, "countries");
	check_list_for_csv(event.raw_country_strings, "raw_country_strings");
	check_list_for_csv(event.malware_families, "malware_families");
	check_list_for_csv(event.industries, "industries");
	check_list_for_csv(event.technique_ids, "technique_ids");
	check_list_for_csv(event.tags, "tags");
	if (event.adversary && event.adversary->empty()) {
		throw std::invalid_argument("adversary, when present, must be non-empty for CSV");
	}
	return {event.id,
	        format_date(event.created_at),
	        event.title,
	        event.description,
	        csv::join_list(event.countries),
	        csv::join_list(event.raw_country_strings),
	        event.adversary.value_or(""),
	        csv::join_list(event.malware_families),
	        csv::join_list(event.industries),
	        csv::join_list(event.technique_ids),
	        csv::join_list(event.tags)};
}

ThreatEvent event_from_csv_fields(const std::vector<std::string> &f) {
	if (f.size() != std::size(kEventFields)) {
		throw ParseError("csv", "expected " + std::to_string(std::size(kEventFields)) + " columns, got " +
		                            std::to_string(f.size()));
	}
	ThreatEvent ev;
	ev.id = f[0];
	if (ev.id.empty()) {
		throw ParseError("id", "missing");
	}
	if (f[1].empty()) {
		throw ParseError("created_at", "missing");
	}
	ev.created_at = parse_date(f[1]);
	ev.title = f[2];
	ev.description = f[3];
	ev.countries = csv::split_list(f[4]);
	ev.raw_country_strings = csv::split_list(f[5]);
	if (!f[6].empty()) {
		ev.adversary = f[6];
	}
	ev.malware_families = csv::split_list(f[7]);
	ev.industries = csv::split_list(f[8]);
	ev.technique_ids = csv::split_list(f[9]);
	ev.tags = csv::split_list(f[10]);
	return ev;
}

std::string corpus_to_string(const Corpus &corpus, CorpusFormat format) {
	std::string out;
	if (format == CorpusFormat::ndjson) {
		for (const auto &ev : corpus) {
			out += event_to_ndjson(ev);
			out.push_back('\n');
		}
		return out;
	}
	out = csv::format_row(std::vector<std::string>(std::begin(kEventFields), std::end(kEventFields)));
	for (const auto &ev : corpus) {
		out += csv::format_row(event_to_csv_fields(ev));
	}
	return out;
}

LoadResult parse_corpus(std::string_view text, CorpusFormat format, std::string provenance) {
	struct Item {
		std::size_t line;
		std::string body; // ndjson line
		std::vector<std::string> fields;
	};
	std::vector<Item> items;
	if (format == CorpusFormat::ndjson) {
		std::size_t line_no = 0;
		std::size_t start = 0;
		while (start <= text.size()) {
			auto nl = text.find('\n', start);
			std::string_view line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
			++line_no;
			if (!line.empty() && line.back() == '\r') {
				line.remove_suffix(1);
			}
			if (line.find_first_not_of(" \t") != std::string_view::npos) {
				items.push_back({line_no, std::string(line), {}});
			}
			if (nl == std::string_view::npos) {
				break;
			}
			start = nl + 1;
		}
	} else {
		auto records = csv::parse(text);
		bool first = true;
		for (auto &rec : records) {
			if (first) {
				first = false;
				std::vector<std::string> header(std::begin(kEventFields), std::end(kEventFields));
				if (rec.fields != header) {
					throw ParseError("header", "CSV header does not match the event schema");
				}
				continue;
			}
			items.push_back({rec.line, {}, std::move(rec.fields)});
		}
	}

	LoadResult result;
	std::vector<ThreatEvent> events;
	std::size_t malformed = 0;
	const Date today = today_utc();
	for (auto &item : items) {
		try {
			ThreatEvent ev =
			    format == CorpusFormat::ndjson ? event_from_ndjson(item.body) : event_from_csv_fields(item.fields);
			if (auto problem = validate_event(ev, today)) {
				throw ParseError("record", *problem);
			}
			events.push_back(std::move(ev));
		} catch (const ParseError &e) {
			++malformed;
			result.errors.push_back("line " + std::to_string(item.line) + ": " + e.what());
		}
	}
	if (!items.empty() && malformed * 2 > items.size()) {
		throw Error("aborting load: " + std::to_string(malformed) + " of " + std::to_string(items.size()) +
		            " records are malformed (first: " + result.errors.front() + ")");
	}
	result.corpus = Corpus(std::move(events), std::move(provenance));
	result.rejected = malformed + result.corpus.duplicates_dropped();
	if (result.corpus.duplicates_dropped() > 0) {
		result.errors.push_back(std::to_string(result.corpus.duplicates_dropped()) + " duplicate id(s) dropped");
	}
	return result;
}

std::string read_file(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw IoError("cannot read " + path.string());
	}
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

void write_file(const std::filesystem::path &path, std::string_view contents) {
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out) {
		throw IoError("cannot write " + path.string());
	}
	out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
	if (!out) {
		throw IoError("write failed for " + path.string());
	}
}

LoadResult load_corpus(const std::filesystem::path &path, CorpusFormat format) {
	return parse_corpus(read_file(path), format, path.string());
}

void save_corpus(const Corpus &corpus, const std::filesystem::path &path, CorpusFormat format) {
	write_file(path, corpus_to_string(corpus, format));
}

namespace {

bool intersects(const std::vector<std::string> &values, const std::set<std::string> &wanted) {
	return std::any_of(values.begin(), values.end(), [&](const std::string &v) { return wanted.contains(v); });
}

} // namespace

bool EventFilter::matches(const ThreatEvent &ev) const {
	if (from && ev.created_at < *from) {
		return false;
	}
	if (to && ev.created_at > *to) {
		return false;
	}
	if (technique_ids && !intersects(ev.technique_ids, *technique_ids)) {
		return false;
	}
	if (countries && !intersects(ev.countries, *countries)) {
		return false;
	}
	if (malware_families && !intersects(ev.malware_families, *malware_families)) {
		return false;
	}
	if (tag_substring) {
		const bool hit = std::any_of(ev.tags.begin(), ev.tags.end(), [&](const std::string &t) {
			return t.find(*tag_substring) != std::string::npos;
		});
		if (!hit) {
			return false;
		}
	}
	return true;
}

Corpus filter_events(const Corpus &corpus, const EventFilter &filter) {
	if (filter.from && filter.to && *filter.from > *filter.to) {
		throw std::invalid_argument("filter date range has from > to");
	}
	std::vector<ThreatEvent> kept;
	for (const auto &ev : corpus) {
		if (filter.matches(ev)) {
			kept.push_back(ev);
		}
	}
	return Corpus(std::move(kept), corpus.provenance());
}

} // namespace threatgeo
