#include "threatgeo/analytics.hpp"

#include "threatgeo/csv.hpp"
#include "threatgeo/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace threatgeo::analytics {

namespace chr = std::chrono;

CountryCounts count_by_country(const Corpus &corpus) {
	CountryCounts out;
	for (const auto &ev : corpus) {
		for (const auto &c : ev.countries) {
			++out.counts[c];
			++out.total;
		}
	}
	return out;
}

namespace {

Ranking ranked(const std::map<std::string, std::size_t> &counts, std::size_t k) {
	Ranking out(counts.begin(), counts.end());
	std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.second > b.second; });
	if (out.size() > k) {
		out.resize(k);
	}
	return out;
}

} // namespace

std::vector<std::pair<std::string, double>> cumulative_share(const CountryCounts &counts) {
	if (counts.total == 0 || counts.counts.empty()) {
		throw EmptyInputError("cumulative share of empty counts");
	}
	std::vector<std::pair<std::string, double>> out;
	std::size_t running = 0;
	for (const auto &[country, n] : ranked(counts.counts, counts.counts.size())) {
		running += n;
		out.emplace_back(country, static_cast<double>(running) / static_cast<double>(counts.total));
	}
	return out;
}

std::vector<std::pair<std::string, std::size_t>> top_countries(const CountryCounts &counts, std::size_t k) {
	return ranked(counts.counts, k);
}

Bin bin_from_string(std::string_view name) {
	if (name == "day") {
		return Bin::day;
	}
	if (name == "week") {
		return Bin::week;
	}
	if (name == "month") {
		return Bin::month;
	}
	throw std::invalid_argument("unknown bin: " + std::string(name));
}

std::string to_string(Bin bin) {
	switch (bin) {
	case Bin::day:
		return "day";
	case Bin::week:
		return "week";
	case Bin::month:
		return "month";
	}
	return "day";
}

Date bin_floor(Date d, Bin bin) {
	switch (bin) {
	case Bin::day:
		return d;
	case Bin::week:
		return week_start(d);
	case Bin::month:
		return month_start(d);
	}
	return d;
}

Date bin_advance(Date start, Bin bin, std::int64_t steps) {
	switch (bin) {
	case Bin::day:
		return start + chr::days{steps};
	case Bin::week:
		return start + chr::days{7 * steps};
	case Bin::month: {
		chr::year_month_day ymd{start};
		auto ym = chr::year_month{ymd.year(), ymd.month()} + chr::months{steps};
		return Date{ym / chr::day{1}};
	}
	}
	return start;
}

namespace {

std::int64_t bin_index(Date start, Date d, Bin bin) {
	switch (bin) {
	case Bin::day:
		return (d - start).count();
	case Bin::week:
		return (week_start(d) - start).count() / 7;
	case Bin::month: {
		chr::year_month_day a{start}, b{d};
		return (static_cast<int>(b.year()) - static_cast<int>(a.year())) * 12 +
		       (static_cast<int>(static_cast<unsigned>(b.month())) - static_cast<int>(static_cast<unsigned>(a.month())));
	}
	}
	return 0;
}

} // namespace

const std::vector<double> &TimeSeriesPanel::row(const std::string &country) const {
	auto it = std::find(countries.begin(), countries.end(), country);
	if (it == countries.end()) {
		throw std::out_of_range("country not in panel: " + country);
	}
	return values[static_cast<std::size_t>(it - countries.begin())];
}

TimeSeriesPanel build_panel(const Corpus &corpus, Bin bin, const std::optional<std::vector<std::string>> &countries,
                            const std::optional<DateRange> &span) {
	if (corpus.empty() && !span) {
		throw EmptyInputError("cannot build a panel from an empty corpus");
	}
	if (span && span->from > span->to) {
		throw std::invalid_argument("panel span has from > to");
	}
	TimeSeriesPanel panel;
	panel.bin = bin;
	const Date first = span ? span->from : corpus.events().front().created_at;
	const Date last = span ? span->to : corpus.events().back().created_at;
	panel.start = bin_floor(first, bin);
	const auto width = static_cast<std::size_t>(bin_index(panel.start, last, bin) + 1);

	if (countries) {
		panel.countries = *countries;
	} else {
		std::set<std::string> seen;
		for (const auto &ev : corpus) {
			seen.insert(ev.countries.begin(), ev.countries.end());
		}
		panel.countries.assign(seen.begin(), seen.end());
	}
	std::map<std::string, std::size_t> row_of;
	for (std::size_t i = 0; i < panel.countries.size(); ++i) {
		row_of.emplace(panel.countries[i], i);
	}
	panel.values.assign(panel.countries.size(), std::vector<double>(width, 0.0));
	for (const auto &ev : corpus) {
		if (ev.created_at < first || ev.created_at > last) {
			continue;
		}
		const auto col = static_cast<std::size_t>(bin_index(panel.start, ev.created_at, bin));
		for (const auto &c : ev.countries) {
			if (auto it = row_of.find(c); it != row_of.end()) {
				panel.values[it->second][col] += 1.0;
			}
		}
	}
	return panel;
}

std::string panel_to_csv(const TimeSeriesPanel &panel) {
	std::ostringstream out;
	out << "country,bin_start,count\n";
	for (std::size_t r = 0; r < panel.countries.size(); ++r) {
		for (std::size_t c = 0; c < panel.width(); ++c) {
			out << csv::escape(panel.countries[r]) << ',' << format_date(panel.bin_start(c)) << ','
			    << static_cast<long long>(panel.values[r][c]) << '\n';
		}
	}
	return out.str();
}

Ranking top_values(const Corpus &corpus, const std::function<std::vector<std::string>(const ThreatEvent &)> &field,
                   std::size_t k) {
	std::map<std::string, std::size_t> counts;
	for (const auto &ev : corpus) {
		std::set<std::string> distinct;
		for (auto &v : field(ev)) {
			distinct.insert(std::move(v));
		}
		for (const auto &v : distinct) {
			++counts[v];
		}
	}
	return ranked(counts, k);
}

Ranking top_malware(const Corpus &corpus, int year, std::size_t k) {
	if (k < 1) {
		throw std::invalid_argument("k must be >= 1");
	}
	return top_values(
	    corpus,
	    [year](const ThreatEvent &ev) {
		    return year_of(ev.created_at) == year ? ev.malware_families : std::vector<std::string>{};
	    },
	    k);
}

PairCounts pair_counts(const Corpus &corpus, std::size_t min_count) {
	if (min_count < 1) {
		throw std::invalid_argument("min_count must be >= 1");
	}
	PairCounts out;
	for (const auto &ev : corpus) {
		std::set<std::string> targets(ev.countries.begin(), ev.countries.end());
		for (auto a = targets.begin(); a != targets.end(); ++a) {
			for (auto b = std::next(a); b != targets.end(); ++b) {
				++out.pairs[{*a, *b}];
			}
		}
	}
	std::erase_if(out.pairs, [&](const auto &kv) { return kv.second < min_count; });
	return out;
}

} // namespace threatgeo::analytics
