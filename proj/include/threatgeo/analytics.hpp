#pragma once

#include "threatgeo/date.hpp"
#include "threatgeo/model.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace threatgeo::analytics {

struct CountryCounts {
	std::map<std::string, std::size_t> counts; // zero counts omitted
	std::size_t total = 0;
};

/// Each event contributes 1 to every country it targets.
CountryCounts count_by_country(const Corpus &corpus);

/// Countries by count descending (ties lexicographic) with running share; the
/// last entry is exactly 1.0. Throws EmptyInputError when total == 0.
std::vector<std::pair<std::string, double>> cumulative_share(const CountryCounts &counts);

/// Countries sorted by count descending, ties lexicographic, at most k.
std::vector<std::pair<std::string, std::size_t>> top_countries(const CountryCounts &counts, std::size_t k);

enum class Bin { day, week, month };

Bin bin_from_string(std::string_view name);
std::string to_string(Bin bin);
/// Calendar-aligned start of the bin holding `d` (weeks start Monday).
Date bin_floor(Date d, Bin bin);
Date bin_advance(Date start, Bin bin, std::int64_t steps);

struct TimeSeriesPanel {
	Date start{};
	Bin bin = Bin::day;
	std::vector<std::string> countries;
	/// values[row][column], one row per entry of `countries`.
	std::vector<std::vector<double>> values;

	std::size_t width() const noexcept {
		return values.empty() ? 0 : values.front().size();
	}
	Date bin_start(std::size_t column) const {
		return bin_advance(start, bin, static_cast<std::int64_t>(column));
	}
	const std::vector<double> &row(const std::string &country) const;
};

/// Per-(country, bin) counts on a calendar grid with explicit zeros. Without
/// `countries`, every country with at least one event is used (sorted). The
/// grid spans the corpus date range unless `span` overrides it.
TimeSeriesPanel build_panel(const Corpus &corpus, Bin bin,
                            const std::optional<std::vector<std::string>> &countries = std::nullopt,
                            const std::optional<DateRange> &span = std::nullopt);

/// "country,bin_start,count" rows in panel order.
std::string panel_to_csv(const TimeSeriesPanel &panel);

using Ranking = std::vector<std::pair<std::string, std::size_t>>;

/// Frequency of the values produced by `field` over `corpus`, descending with
/// lexicographic ties, truncated to k. Each event counts a value at most once.
Ranking top_values(const Corpus &corpus, const std::function<std::vector<std::string>(const ThreatEvent &)> &field,
                   std::size_t k);

Ranking top_malware(const Corpus &corpus, int year, std::size_t k);

struct PairCounts {
	/// Keys are (a, b) with a < b.
	std::map<std::pair<std::string, std::string>, std::size_t> pairs;
};

PairCounts pair_counts(const Corpus &corpus, std::size_t min_count = 1);

} // namespace threatgeo::analytics
