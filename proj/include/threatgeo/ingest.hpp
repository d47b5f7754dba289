#pragma once

#include "threatgeo/date.hpp"
#include "threatgeo/model.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace threatgeo::ingest {

struct FeedConfig {
	/// Scheme, host, optional port and path of the pulse listing, e.g.
	/// "http://127.0.0.1:8080/api/v1/pulses".
	std::string base_url;
	std::optional<std::string> api_key; // sent as X-API-KEY
	int page_size = 50;
	int max_pages = 10;
	std::chrono::milliseconds request_timeout{10000};
	int max_concurrent_requests = 4;
	int retry_budget = 3;
	/// First retry delay; doubled per attempt with +/-20% jitter.
	std::chrono::milliseconds backoff_base{1000};
};

struct RawRecord {
	std::string source_id;
	std::string payload;
	std::chrono::system_clock::time_point fetched_at{};
};

struct FetchResult {
	std::vector<RawRecord> records;
	/// One entry per page that failed after exhausting its retries.
	std::vector<std::string> errors;

	bool complete() const noexcept {
		return errors.empty();
	}
};

/// Pages through `GET base_url?page=N&limit=page_size[&since=YYYY-MM-DD]` until
/// an empty page or `max_pages`. A page body is either a JSON array of pulses or
/// an object with a "results" array. Throws CredentialError on 401/403.
FetchResult fetch_feed(const FeedConfig &config, std::optional<Date> since = std::nullopt);

/// Maps the pulse JSON schema onto a ThreatEvent (countries left empty).
/// Mandatory keys: "id" and "created".
ThreatEvent parse_pulse_json(const RawRecord &record);

/// Parses a page following the documented fixture template (docs/fixture-html.md).
ThreatEvent parse_pulse_html(const RawRecord &record);

/// Serializes the raw fields of an event back into the pulse JSON schema.
std::string to_pulse_json(const ThreatEvent &event);

std::string decode_html_entities(std::string_view text);

/// Parses every *.json / *.html file under `dir` (sorted by name); failures are
/// collected in `errors` as "<file>: <message>".
std::vector<ThreatEvent> parse_fixture_directory(const std::string &dir, std::vector<std::string> &errors);

} // namespace threatgeo::ingest
