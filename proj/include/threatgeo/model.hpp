#pragma once

#include "threatgeo/date.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace threatgeo {

/// One shared incident (a "pulse") as seen by the analytics pipeline.
struct ThreatEvent {
	std::string id;
	std::string title;
	std::string description;
	Date created_at{};
	/// Canonical gazetteer names; empty until the normalize stage runs.
	std::vector<std::string> countries;
	std::optional<std::string> adversary;
	std::vector<std::string> malware_families;
	std::vector<std::string> industries;
	std::vector<std::string> technique_ids;
	std::vector<std::string> tags;
	/// Country strings exactly as found in the source.
	std::vector<std::string> raw_country_strings;

	bool operator==(const ThreatEvent &) const = default;
};

/// Immutable, sorted, id-unique collection of events.
///
/// Construction sorts by (created_at, id) and drops later duplicates of an id
/// (first occurrence in input order wins). Equality compares events only;
/// provenance and ingestion time are metadata.
class Corpus {
public:
	Corpus() = default;
	explicit Corpus(std::vector<ThreatEvent> events, std::string provenance = {});

	const std::vector<ThreatEvent> &events() const noexcept {
		return events_;
	}
	const std::string &provenance() const noexcept {
		return provenance_;
	}
	std::chrono::system_clock::time_point ingested_at() const noexcept {
		return ingested_at_;
	}
	/// Number of records dropped as duplicate ids during construction.
	std::size_t duplicates_dropped() const noexcept {
		return duplicates_dropped_;
	}

	std::size_t size() const noexcept {
		return events_.size();
	}
	bool empty() const noexcept {
		return events_.empty();
	}
	auto begin() const noexcept {
		return events_.begin();
	}
	auto end() const noexcept {
		return events_.end();
	}

	bool operator==(const Corpus &other) const {
		return events_ == other.events_;
	}

private:
	std::vector<ThreatEvent> events_;
	std::string provenance_;
	std::chrono::system_clock::time_point ingested_at_{};
	std::size_t duplicates_dropped_ = 0;
};

enum class CorpusFormat { ndjson, csv };

CorpusFormat corpus_format_from_string(std::string_view name);
/// Guess from the file extension (".csv" -> csv, anything else -> ndjson).
CorpusFormat corpus_format_for_path(const std::filesystem::path &path);

/// Earliest accepted event date.
inline constexpr std::chrono::year_month_day kEarliestEventDate{std::chrono::year{1990}, std::chrono::January,
                                                                std::chrono::day{1}};

/// Returns a description of the first violated ingest invariant, if any:
/// non-empty id, date within [1990-01-01, today + 1 day].
std::optional<std::string> validate_event(const ThreatEvent &event, Date today = today_utc());

/// Column/key order shared by NDJSON and CSV.
inline constexpr std::string_view kEventFields[] = {
    "id",         "created_at",       "title",      "description",   "countries", "raw_country_strings",
    "adversary",  "malware_families", "industries", "technique_ids", "tags"};

std::string event_to_ndjson(const ThreatEvent &event);
ThreatEvent event_from_ndjson(std::string_view line);
std::vector<std::string> event_to_csv_fields(const ThreatEvent &event);
ThreatEvent event_from_csv_fields(const std::vector<std::string> &fields);

std::string corpus_to_string(const Corpus &corpus, CorpusFormat format);

struct LoadResult {
	Corpus corpus;
	/// Malformed or invalid records plus duplicate ids.
	std::size_t rejected = 0;
	std::vector<std::string> errors;
};

/// Parses corpus text. Per-record failures are collected; if more than half the
/// records are malformed the whole load fails with a summary DataError.
LoadResult parse_corpus(std::string_view text, CorpusFormat format, std::string provenance = {});
LoadResult load_corpus(const std::filesystem::path &path, CorpusFormat format);
void save_corpus(const Corpus &corpus, const std::filesystem::path &path, CorpusFormat format);

/// Conjunction of optional clauses. Set clauses match on non-empty intersection.
struct EventFilter {
	std::optional<Date> from;
	std::optional<Date> to;
	std::optional<std::set<std::string>> technique_ids;
	std::optional<std::set<std::string>> countries;
	std::optional<std::string> tag_substring;
	std::optional<std::set<std::string>> malware_families;

	bool matches(const ThreatEvent &event) const;
};

Corpus filter_events(const Corpus &corpus, const EventFilter &filter);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view contents);

} // namespace threatgeo
