#include "threatgeo/normalize.hpp"

#include "threatgeo/csv.hpp"
#include "threatgeo/error.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace threatgeo::normalize {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
	if (a.size() < b.size()) {
		std::swap(a, b);
	}
	// b is the shorter string; rows are indexed by its positions.
	std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
	std::iota(prev.begin(), prev.end(), std::size_t{0});
	for (std::size_t i = 1; i <= a.size(); ++i) {
		cur[0] = i;
		for (std::size_t j = 1; j <= b.size(); ++j) {
			const std::size_t substitution = prev[j - 1] + (a[i - 1] != b[j - 1] ? 1 : 0);
			cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitution});
		}
		std::swap(prev, cur);
	}
	return prev[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
	return levenshtein(decode_utf8(a), decode_utf8(b));
}

std::u32string decode_utf8(std::string_view text) {
	std::u32string out;
	out.reserve(text.size());
	std::size_t i = 0;
	while (i < text.size()) {
		const auto c = static_cast<unsigned char>(text[i]);
		std::size_t len = 0;
		char32_t cp = 0;
		if (c < 0x80) {
			len = 1;
			cp = c;
		} else if ((c & 0xE0) == 0xC0) {
			len = 2;
			cp = c & 0x1F;
		} else if ((c & 0xF0) == 0xE0) {
			len = 3;
			cp = c & 0x0F;
		} else if ((c & 0xF8) == 0xF0) {
			len = 4;
			cp = c & 0x07;
		}
		bool ok = len > 0 && i + len <= text.size();
		for (std::size_t k = 1; ok && k < len; ++k) {
			const auto cc = static_cast<unsigned char>(text[i + k]);
			if ((cc & 0xC0) != 0x80) {
				ok = false;
			} else {
				cp = (cp << 6) | (cc & 0x3F);
			}
		}
		if (!ok) {
			out.push_back(U'�');
			++i;
			continue;
		}
		out.push_back(cp);
		i += len;
	}
	return out;
}

std::string encode_utf8(std::u32string_view text) {
	std::string out;
	for (char32_t cp : text) {
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
	return out;
}

std::u32string fold(std::string_view text) {
	std::u32string s = decode_utf8(text);
	auto is_space = [](char32_t c) { return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U' '; };
	std::size_t b = 0, e = s.size();
	while (b < e && is_space(s[b])) {
		++b;
	}
	while (e > b && is_space(s[e - 1])) {
		--e;
	}
	s = s.substr(b, e - b);
	for (auto &c : s) {
		if ((c >= U'A' && c <= U'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7)) {
			c += 0x20;
		}
	}
	return s;
}

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
	std::set<std::string> names;
	std::set<std::string> codes;
	for (std::size_t i = 0; i < entries_.size(); ++i) {
		const auto &e = entries_[i];
		if (e.canonical_name.empty() || e.canonical_name.find(';') != std::string::npos) {
			throw std::invalid_argument("gazetteer: invalid canonical name '" + e.canonical_name + "'");
		}
		if (!names.insert(e.canonical_name).second) {
			throw std::invalid_argument("gazetteer: duplicate canonical name '" + e.canonical_name + "'");
		}
		if (e.iso2.size() != 2 || !codes.insert(e.iso2).second) {
			throw std::invalid_argument("gazetteer: invalid or duplicate iso2 '" + e.iso2 + "'");
		}
		std::vector<std::string> spellings{e.canonical_name};
		spellings.insert(spellings.end(), e.aliases.begin(), e.aliases.end());
		for (const auto &spelling : spellings) {
			auto folded = fold(spelling);
			if (folded.empty()) {
				throw std::invalid_argument("gazetteer: empty alias for '" + e.canonical_name + "'");
			}
			auto [it, inserted] = exact_.emplace(folded, i);
			if (!inserted) {
				if (it->second != i) {
					throw std::invalid_argument("gazetteer: '" + spelling + "' maps to both '" +
					                            entries_[it->second].canonical_name + "' and '" + e.canonical_name +
					                            "'");
				}
				continue;
			}
			candidates_.push_back({std::move(folded), i});
		}
	}
}

Gazetteer Gazetteer::from_csv(std::string_view text) {
	auto records = csv::parse(text);
	if (records.empty() || records.front().fields != std::vector<std::string>{"canonical_name", "iso2", "aliases"}) {
		throw ParseError("header", "gazetteer CSV must start with canonical_name,iso2,aliases");
	}
	std::vector<GazetteerEntry> entries;
	for (std::size_t r = 1; r < records.size(); ++r) {
		const auto &f = records[r].fields;
		if (f.size() != 3) {
			throw ParseError("gazetteer", "line " + std::to_string(records[r].line) + ": expected 3 columns");
		}
		entries.push_back({f[0], f[1], csv::split_list(f[2])});
	}
	return Gazetteer(std::move(entries));
}

Gazetteer Gazetteer::load(const std::filesystem::path &path) {
	return from_csv(read_file(path));
}

bool Gazetteer::contains(std::string_view canonical_name) const {
	return std::any_of(entries_.begin(), entries_.end(),
	                   [&](const GazetteerEntry &e) { return e.canonical_name == canonical_name; });
}

std::optional<std::size_t> Gazetteer::exact(const std::u32string &folded) const {
	auto it = exact_.find(folded);
	if (it == exact_.end()) {
		return std::nullopt;
	}
	return it->second;
}

Canonicalization canonicalize(std::string_view raw, const Gazetteer &gazetteer, int threshold) {
	if (threshold < 0) {
		throw std::invalid_argument("threshold must be >= 0");
	}
	const auto folded = fold(raw);
	if (folded.empty()) {
		return {std::nullopt, "", kInfiniteDistance};
	}
	if (auto hit = gazetteer.exact(folded)) {
		const auto &name = gazetteer.entries()[*hit].canonical_name;
		return {name, name, 0};
	}
	const Gazetteer::Candidate *best = nullptr;
	std::size_t best_distance = kInfiniteDistance;
	for (const auto &cand : gazetteer.candidates()) {
		const std::size_t d = levenshtein(folded, cand.folded);
		bool better = false;
		if (!best || d < best_distance) {
			better = true;
		} else if (d == best_distance) {
			if (cand.folded.size() != best->folded.size()) {
				better = cand.folded.size() < best->folded.size();
			} else {
				better = gazetteer.entries()[cand.entry].canonical_name <
				         gazetteer.entries()[best->entry].canonical_name;
			}
		}
		if (better) {
			best = &cand;
			best_distance = d;
		}
	}
	if (!best) {
		return {std::nullopt, "", kInfiniteDistance};
	}
	const auto &name = gazetteer.entries()[best->entry].canonical_name;
	if (best_distance <= static_cast<std::size_t>(threshold)) {
		return {name, name, best_distance};
	}
	return {std::nullopt, name, best_distance};
}

std::pair<Corpus, NormalizationReport> normalize_corpus(const Corpus &corpus, const Gazetteer &gazetteer,
                                                        int threshold) {
	NormalizationReport report;
	report.threshold_used = threshold;
	std::vector<ThreatEvent> events;
	events.reserve(corpus.size());
	for (const auto &ev : corpus) {
		ThreatEvent out = ev;
		out.countries.clear();
		// Names already present (e.g. from an earlier pass) are re-validated
		// against the gazetteer but not counted in the report.
		for (const auto &name : ev.countries) {
			auto result = canonicalize(name, gazetteer, threshold);
			if (result.resolved() &&
			    std::find(out.countries.begin(), out.countries.end(), *result.canonical) == out.countries.end()) {
				out.countries.push_back(*result.canonical);
			}
		}
		for (const auto &raw : ev.raw_country_strings) {
			auto result = canonicalize(raw, gazetteer, threshold);
			if (result.resolved()) {
				++report.resolved;
				if (std::find(out.countries.begin(), out.countries.end(), *result.canonical) == out.countries.end()) {
					out.countries.push_back(*result.canonical);
				}
			} else {
				report.unresolved.push_back({raw, result.best, result.distance});
			}
		}
		events.push_back(std::move(out));
	}
	return {Corpus(std::move(events), corpus.provenance()), std::move(report)};
}

} // namespace threatgeo::normalize
