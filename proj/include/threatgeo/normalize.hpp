#pragma once

#include "threatgeo/model.hpp"

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace threatgeo::normalize {

/// Edit distance (unit-cost insert/delete/substitute) over Unicode scalar values.
/// Two-row dynamic program: O(|a|·|b|) time, O(min(|a|,|b|)) space.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
/// UTF-8 convenience overload; invalid bytes decode as U+FFFD.
std::size_t levenshtein(std::string_view a, std::string_view b);

std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);
/// Trim + simple case fold (ASCII and Latin-1 letters).
std::u32string fold(std::string_view text);

struct GazetteerEntry {
	std::string canonical_name;
	std::string iso2;
	std::vector<std::string> aliases;
};

class Gazetteer {
public:
	Gazetteer() = default;
	/// Validates uniqueness of canonical names, iso2 codes and alias ownership.
	explicit Gazetteer(std::vector<GazetteerEntry> entries);

	/// CSV with header "canonical_name,iso2,aliases"; aliases are ';'-joined.
	static Gazetteer from_csv(std::string_view text);
	static Gazetteer load(const std::filesystem::path &path);

	const std::vector<GazetteerEntry> &entries() const noexcept {
		return entries_;
	}
	bool contains(std::string_view canonical_name) const;

	struct Candidate {
		std::u32string folded;
		std::size_t entry; // index into entries()
	};
	/// Every canonical name and alias, folded.
	const std::vector<Candidate> &candidates() const noexcept {
		return candidates_;
	}
	/// Exact (folded) lookup of a canonical name or alias.
	std::optional<std::size_t> exact(const std::u32string &folded) const;

private:
	std::vector<GazetteerEntry> entries_;
	std::vector<Candidate> candidates_;
	std::unordered_map<std::u32string, std::size_t> exact_;
};

inline constexpr std::size_t kInfiniteDistance = std::numeric_limits<std::size_t>::max();
inline constexpr int kDefaultThreshold = 2;

struct Canonicalization {
	/// Set when resolved; otherwise the string is Unresolved.
	std::optional<std::string> canonical;
	/// Canonical name of the closest candidate (empty for empty input).
	std::string best;
	std::size_t distance = kInfiniteDistance;

	bool resolved() const noexcept {
		return canonical.has_value();
	}
};

/// Exact canonical/alias match first; otherwise the global edit-distance minimum
/// over all candidates, ties broken by (distance, candidate length, canonical name).
Canonicalization canonicalize(std::string_view raw, const Gazetteer &gazetteer, int threshold = kDefaultThreshold);

struct UnresolvedString {
	std::string raw;
	std::string best;
	std::size_t distance;

	bool operator==(const UnresolvedString &) const = default;
};

struct NormalizationReport {
	std::size_t resolved = 0;
	std::vector<UnresolvedString> unresolved;
	int threshold_used = kDefaultThreshold;
};

std::pair<Corpus, NormalizationReport> normalize_corpus(const Corpus &corpus, const Gazetteer &gazetteer,
                                                        int threshold = kDefaultThreshold);

} // namespace threatgeo::normalize
