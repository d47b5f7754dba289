#include "threatgeo/ingest.hpp"

#include "threatgeo/error.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <future>
#include <httplib.h>
#include <json.hpp>
#include <random>
#include <thread>

namespace threatgeo::ingest {

using json = nlohmann::json;

namespace {

struct SplitUrl {
	std::string origin; // scheme://host[:port]
	std::string path;
};

SplitUrl split_url(const std::string &url) {
	auto scheme = url.find("://");
	if (scheme == std::string::npos) {
		throw std::invalid_argument("base_url must include a scheme: " + url);
	}
	auto slash = url.find('/', scheme + 3);
	if (slash == std::string::npos) {
		return {url, "/"};
	}
	return {url.substr(0, slash), url.substr(slash)};
}

struct PageOutcome {
	std::vector<RawRecord> records;
	std::optional<std::string> error;
	bool credential_failure = false;
	std::string credential_message;
};

std::chrono::milliseconds backoff_delay(const FeedConfig &cfg, int attempt, std::mt19937 &gen) {
	std::uniform_real_distribution<double> jitter(0.8, 1.2);
	const double base = static_cast<double>(cfg.backoff_base.count()) * static_cast<double>(1 << std::min(attempt, 20));
	return std::chrono::milliseconds(static_cast<long long>(base * jitter(gen)));
}

std::vector<RawRecord> records_from_body(const std::string &body) {
	json doc = json::parse(body);
	const json *items = &doc;
	if (doc.is_object()) {
		auto it = doc.find("results");
		if (it == doc.end() || !it->is_array()) {
			throw ParseError("results", "page object has no results array");
		}
		items = &*it;
	}
	if (!items->is_array()) {
		throw ParseError("results", "page is neither an array nor an object");
	}
	std::vector<RawRecord> out;
	const auto now = std::chrono::system_clock::now();
	for (const auto &item : *items) {
		std::string id;
		if (auto it = item.find("id"); it != item.end()) {
			id = it->is_string() ? it->get<std::string>() : it->dump();
		}
		out.push_back({id, item.dump(), now});
	}
	return out;
}

PageOutcome fetch_page(const FeedConfig &cfg, const SplitUrl &url, int page, const std::optional<Date> &since) {
	PageOutcome outcome;
	httplib::Client client(url.origin);
	const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.request_timeout);
	const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.request_timeout - secs);
	client.set_connection_timeout(secs.count(), usecs.count());
	client.set_read_timeout(secs.count(), usecs.count());
	httplib::Headers headers;
	if (cfg.api_key) {
		headers.emplace("X-API-KEY", *cfg.api_key);
	}
	httplib::Params params{{"page", std::to_string(page)}, {"limit", std::to_string(cfg.page_size)}};
	if (since) {
		params.emplace("since", format_date(*since));
	}
	const std::string target = httplib::append_query_params(url.path, params);

	std::mt19937 gen(std::random_device{}());
	std::string last_error;
	for (int attempt = 0; attempt <= cfg.retry_budget; ++attempt) {
		std::optional<std::chrono::milliseconds> wait;
		auto res = client.Get(target, headers);
		if (!res) {
			last_error = "page " + std::to_string(page) + ": " + httplib::to_string(res.error());
		} else if (res->status == 401 || res->status == 403) {
			outcome.credential_failure = true;
			outcome.credential_message = "HTTP " + std::to_string(res->status) + " from feed: check the API key";
			return outcome;
		} else if (res->status == 429) {
			last_error = "page " + std::to_string(page) + ": HTTP 429";
			if (res->has_header("Retry-After")) {
				try {
					wait = std::chrono::seconds(std::stoll(res->get_header_value("Retry-After")));
				} catch (const std::exception &) {
				}
			}
		} else if (res->status >= 200 && res->status < 300) {
			try {
				outcome.records = records_from_body(res->body);
				if (outcome.records.size() > static_cast<std::size_t>(cfg.page_size)) {
					outcome.records.resize(static_cast<std::size_t>(cfg.page_size));
				}
				return outcome;
			} catch (const std::exception &e) {
				// A malformed body is not transient.
				outcome.error = "page " + std::to_string(page) + ": " + e.what();
				return outcome;
			}
		} else {
			last_error = "page " + std::to_string(page) + ": HTTP " + std::to_string(res->status);
		}
		if (attempt < cfg.retry_budget) {
			std::this_thread::sleep_for(wait.value_or(backoff_delay(cfg, attempt, gen)));
		}
	}
	outcome.error = last_error + " (after " + std::to_string(cfg.retry_budget) + " retries)";
	return outcome;
}

} // namespace

FetchResult fetch_feed(const FeedConfig &config, std::optional<Date> since) {
	if (config.page_size < 1 || config.max_pages < 1 || config.max_concurrent_requests < 1 || config.retry_budget < 0) {
		throw std::invalid_argument("invalid FeedConfig");
	}
	FetchResult result;
	if (since && *since > today_utc()) {
		return result;
	}
	const SplitUrl url = split_url(config.base_url);
	int next_page = 1;
	bool done = false;
	while (!done && next_page <= config.max_pages) {
		const int wave = std::min(config.max_concurrent_requests, config.max_pages - next_page + 1);
		std::vector<std::future<PageOutcome>> inflight;
		inflight.reserve(static_cast<std::size_t>(wave));
		for (int i = 0; i < wave; ++i) {
			inflight.push_back(std::async(std::launch::async, fetch_page, std::cref(config), std::cref(url),
			                              next_page + i, std::cref(since)));
		}
		std::vector<PageOutcome> outcomes;
		for (auto &f : inflight) {
			outcomes.push_back(f.get());
		}
		for (auto &o : outcomes) {
			if (o.credential_failure) {
				throw CredentialError(o.credential_message);
			}
		}
		for (auto &o : outcomes) {
			if (o.error) {
				result.errors.push_back(*o.error);
				done = true;
				break;
			}
			if (o.records.empty()) {
				done = true;
				break;
			}
			for (auto &r : o.records) {
				result.records.push_back(std::move(r));
			}
		}
		next_page += wave;
	}
	return result;
}

namespace {

constexpr std::array<const char *, 3> kLabelKeys{"display_name", "name", "id"};
constexpr std::array<const char *, 3> kIdKeys{"id", "display_name", "name"};

std::string json_text(const json &v, const std::array<const char *, 3> &keys = kLabelKeys) {
	if (v.is_string()) {
		return v.get<std::string>();
	}
	if (v.is_object()) {
		for (const char *key : keys) {
			if (auto it = v.find(key); it != v.end() && it->is_string()) {
				return it->get<std::string>();
			}
		}
	}
	if (v.is_null()) {
		return {};
	}
	return v.dump();
}

std::vector<std::string> json_list(const json &obj, const char *key,
                                   const std::array<const char *, 3> &keys = kLabelKeys) {
	std::vector<std::string> out;
	auto it = obj.find(key);
	if (it == obj.end() || it->is_null()) {
		return out;
	}
	if (!it->is_array()) {
		auto s = json_text(*it, keys);
		if (!s.empty()) {
			out.push_back(std::move(s));
		}
		return out;
	}
	for (const auto &v : *it) {
		auto s = json_text(v, keys);
		if (!s.empty()) {
			out.push_back(std::move(s));
		}
	}
	return out;
}

} // namespace

ThreatEvent parse_pulse_json(const RawRecord &record) {
	json doc;
	try {
		doc = json::parse(record.payload);
	} catch (const json::parse_error &e) {
		throw ParseError("payload", e.what());
	}
	if (!doc.is_object()) {
		throw ParseError("payload", "pulse is not a JSON object");
	}
	ThreatEvent ev;
	auto id_it = doc.find("id");
	if (id_it == doc.end() || id_it->is_null() || json_text(*id_it).empty()) {
		throw ParseError("id");
	}
	ev.id = json_text(*id_it);
	auto created_it = doc.find("created");
	if (created_it == doc.end() || !created_it->is_string()) {
		throw ParseError("created");
	}
	ev.created_at = parse_date(created_it->get<std::string>());
	if (auto it = doc.find("name"); it != doc.end()) {
		ev.title = json_text(*it);
	}
	if (auto it = doc.find("description"); it != doc.end()) {
		ev.description = json_text(*it);
	}
	if (auto it = doc.find("adversary"); it != doc.end()) {
		auto adv = json_text(*it);
		if (!adv.empty()) {
			ev.adversary = std::move(adv);
		}
	}
	ev.raw_country_strings = json_list(doc, "targeted_countries");
	ev.malware_families = json_list(doc, "malware_families");
	ev.industries = json_list(doc, "industries");
	ev.technique_ids = json_list(doc, "attack_ids", kIdKeys);
	ev.tags = json_list(doc, "tags");
	return ev;
}

std::string to_pulse_json(const ThreatEvent &event) {
	json j;
	j["id"] = event.id;
	j["created"] = format_date(event.created_at);
	j["name"] = event.title;
	j["description"] = event.description;
	j["adversary"] = event.adversary.value_or("");
	j["targeted_countries"] = event.raw_country_strings;
	j["malware_families"] = event.malware_families;
	j["industries"] = event.industries;
	j["attack_ids"] = event.technique_ids;
	j["tags"] = event.tags;
	return j.dump();
}

namespace {

void append_utf8(std::string &out, std::uint32_t cp) {
	if (cp < 0x80) {
		out.push_back(static_cast<char>(cp));
	} else if (cp < 0x800) {
		out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
		out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
	} else if (cp < 0x10000) {
		out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
		out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
		out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
	} else {
		out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
		out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
		out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
		out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
	}
}

} // namespace

std::string decode_html_entities(std::string_view text) {
	static const std::pair<std::string_view, std::string_view> named[] = {
	    {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}};
	std::string out;
	out.reserve(text.size());
	for (std::size_t i = 0; i < text.size(); ++i) {
		if (text[i] != '&') {
			out.push_back(text[i]);
			continue;
		}
		const auto semi = text.find(';', i);
		if (semi == std::string_view::npos || semi - i > 10) {
			out.push_back('&');
			continue;
		}
		const std::string_view name = text.substr(i + 1, semi - i - 1);
		bool decoded = false;
		if (!name.empty() && name[0] == '#') {
			const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
			const std::string digits(name.substr(hex ? 2 : 1));
			if (!digits.empty()) {
				try {
					std::size_t used = 0;
					const auto cp = std::stoul(digits, &used, hex ? 16 : 10);
					if (used == digits.size() && cp <= 0x10FFFF) {
						append_utf8(out, static_cast<std::uint32_t>(cp));
						decoded = true;
					}
				} catch (const std::exception &) {
				}
			}
		} else {
			for (const auto &[key, value] : named) {
				if (name == key) {
					out += value;
					decoded = true;
					break;
				}
			}
		}
		if (decoded) {
			i = semi;
		} else {
			out.push_back('&');
		}
	}
	return out;
}

namespace {

bool has_class_token(std::string_view attrs, std::string_view cls) {
	auto pos = attrs.find("class=");
	while (pos != std::string_view::npos) {
		std::size_t v = pos + 6;
		if (v < attrs.size() && (attrs[v] == '"' || attrs[v] == '\'')) {
			const char q = attrs[v];
			const auto end = attrs.find(q, v + 1);
			std::string_view value = attrs.substr(v + 1, end == std::string_view::npos ? std::string_view::npos : end - v - 1);
			std::size_t s = 0;
			while (s < value.size()) {
				while (s < value.size() && std::isspace(static_cast<unsigned char>(value[s]))) {
					++s;
				}
				std::size_t e = s;
				while (e < value.size() && !std::isspace(static_cast<unsigned char>(value[e]))) {
					++e;
				}
				if (value.substr(s, e - s) == cls) {
					return true;
				}
				s = e;
			}
		}
		pos = attrs.find("class=", pos + 6);
	}
	return false;
}

/// Inner HTML of the first element carrying class `cls`, honoring nesting of
/// the same tag name.
std::optional<std::string_view> element_by_class(std::string_view html, std::string_view cls) {
	std::size_t pos = 0;
	while ((pos = html.find('<', pos)) != std::string_view::npos) {
		if (pos + 1 >= html.size() || html[pos + 1] == '/' || html[pos + 1] == '!') {
			++pos;
			continue;
		}
		const auto close = html.find('>', pos);
		if (close == std::string_view::npos) {
			return std::nullopt;
		}
		std::size_t name_end = pos + 1;
		while (name_end < close && !std::isspace(static_cast<unsigned char>(html[name_end])) && html[name_end] != '/') {
			++name_end;
		}
		std::string tag(html.substr(pos + 1, name_end - pos - 1));
		std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char c) { return std::tolower(c); });
		const std::string_view attrs = html.substr(name_end, close - name_end);
		if (!has_class_token(attrs, cls)) {
			pos = close + 1;
			continue;
		}
		if (!attrs.empty() && attrs.back() == '/') {
			return std::string_view{};
		}
		const std::size_t content_begin = close + 1;
		int depth = 1;
		std::size_t scan = content_begin;
		while (depth > 0) {
			const auto lt = html.find('<', scan);
			if (lt == std::string_view::npos) {
				return std::nullopt;
			}
			const bool closing = lt + 1 < html.size() && html[lt + 1] == '/';
			const std::size_t nb = lt + (closing ? 2 : 1);
			std::size_t ne = nb;
			while (ne < html.size() && std::isalnum(static_cast<unsigned char>(html[ne]))) {
				++ne;
			}
			std::string name(html.substr(nb, ne - nb));
			std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
			const auto gt = html.find('>', lt);
			if (gt == std::string_view::npos) {
				return std::nullopt;
			}
			if (name == tag) {
				if (closing) {
					if (--depth == 0) {
						return html.substr(content_begin, lt - content_begin);
					}
				} else if (html[gt - 1] != '/') {
					++depth;
				}
			}
			scan = gt + 1;
		}
	}
	return std::nullopt;
}

std::string strip_tags(std::string_view html) {
	std::string out;
	bool in_tag = false;
	for (char c : html) {
		if (c == '<') {
			in_tag = true;
		} else if (c == '>') {
			in_tag = false;
		} else if (!in_tag) {
			out.push_back(c);
		}
	}
	return out;
}

std::string collapse_whitespace(std::string_view s) {
	std::string out;
	bool pending_space = false;
	for (char c : s) {
		if (std::isspace(static_cast<unsigned char>(c))) {
			pending_space = !out.empty();
		} else {
			if (pending_space) {
				out.push_back(' ');
				pending_space = false;
			}
			out.push_back(c);
		}
	}
	return out;
}

std::string element_text(std::string_view inner) {
	return collapse_whitespace(decode_html_entities(strip_tags(inner)));
}

std::vector<std::string> list_items(std::string_view inner) {
	std::vector<std::string> out;
	std::size_t pos = 0;
	while ((pos = inner.find("<li", pos)) != std::string_view::npos) {
		const auto gt = inner.find('>', pos);
		if (gt == std::string_view::npos) {
			break;
		}
		auto end = inner.find("</li>", gt);
		if (end == std::string_view::npos) {
			end = inner.size();
		}
		auto text = element_text(inner.substr(gt + 1, end - gt - 1));
		if (!text.empty()) {
			out.push_back(std::move(text));
		}
		pos = end;
	}
	return out;
}

} // namespace

ThreatEvent parse_pulse_html(const RawRecord &record) {
	const std::string_view html = record.payload;
	auto required = [&](std::string_view cls, const char *field) {
		auto inner = element_by_class(html, cls);
		if (!inner) {
			throw ParseError(field);
		}
		auto text = element_text(*inner);
		if (text.empty()) {
			throw ParseError(field, "empty");
		}
		return text;
	};
	auto optional_text = [&](std::string_view cls) {
		auto inner = element_by_class(html, cls);
		return inner ? element_text(*inner) : std::string{};
	};
	auto optional_list = [&](std::string_view cls) {
		auto inner = element_by_class(html, cls);
		return inner ? list_items(*inner) : std::vector<std::string>{};
	};

	ThreatEvent ev;
	ev.id = required("pulse-id", "id");
	const auto created = required("pulse-created", "created");
	auto date = try_parse_date(created);
	if (!date) {
		throw ParseError("created", "not an ISO-8601 date: '" + created + "'");
	}
	ev.created_at = *date;
	ev.title = optional_text("pulse-title");
	ev.description = optional_text("pulse-description");
	if (auto adv = optional_text("pulse-adversary"); !adv.empty()) {
		ev.adversary = std::move(adv);
	}
	ev.raw_country_strings = optional_list("pulse-countries");
	ev.malware_families = optional_list("pulse-malware");
	ev.industries = optional_list("pulse-industries");
	ev.technique_ids = optional_list("pulse-attack-ids");
	ev.tags = optional_list("pulse-tags");
	return ev;
}

std::vector<ThreatEvent> parse_fixture_directory(const std::string &dir, std::vector<std::string> &errors) {
	namespace fs = std::filesystem;
	std::vector<fs::path> files;
	for (const auto &entry : fs::directory_iterator(dir)) {
		if (!entry.is_regular_file()) {
			continue;
		}
		const auto ext = entry.path().extension();
		if (ext == ".json" || ext == ".html" || ext == ".htm") {
			files.push_back(entry.path());
		}
	}
	std::sort(files.begin(), files.end());
	std::vector<ThreatEvent> events;
	for (const auto &file : files) {
		try {
			RawRecord rec{file.filename().string(), read_file(file), std::chrono::system_clock::now()};
			events.push_back(file.extension() == ".json" ? parse_pulse_json(rec) : parse_pulse_html(rec));
		} catch (const Error &e) {
			errors.push_back(file.filename().string() + ": " + e.what());
		}
	}
	return events;
}

} // namespace threatgeo::ingest
