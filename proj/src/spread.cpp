#include "threatgeo/spread.hpp"

#include "threatgeo/error.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>
#include <set>

namespace threatgeo::spread {

std::optional<std::size_t> TransitionMatrix::index_of(const std::string &country) const {
	auto it = std::lower_bound(countries.begin(), countries.end(), country);
	if (it == countries.end() || *it != country) {
		return std::nullopt;
	}
	return static_cast<std::size_t>(it - countries.begin());
}

double TransitionMatrix::prob(const std::string &from, const std::string &to) const {
	auto i = index_of(from);
	auto j = index_of(to);
	return (i && j) ? probs[*i][*j] : 0.0;
}

GroupBy group_by_from_string(std::string_view name) {
	if (name == "all") {
		return GroupBy::all;
	}
	if (name == "malware_family" || name == "malware") {
		return GroupBy::malware_family;
	}
	if (name == "adversary") {
		return GroupBy::adversary;
	}
	if (name == "tag") {
		return GroupBy::tag;
	}
	throw std::invalid_argument("unknown group-by: " + std::string(name));
}

std::string to_string(GroupBy g) {
	switch (g) {
	case GroupBy::all:
		return "all";
	case GroupBy::malware_family:
		return "malware_family";
	case GroupBy::adversary:
		return "adversary";
	case GroupBy::tag:
		return "tag";
	}
	return "all";
}

TransitionMatrix transitions_from_sets(const std::vector<std::vector<std::string>> &target_sets) {
	std::set<std::string> names;
	for (const auto &s : target_sets) {
		names.insert(s.begin(), s.end());
	}
	std::vector<std::string> index(names.begin(), names.end());
	const std::size_t n = index.size();
	auto pos = [&](const std::string &c) {
		return static_cast<std::size_t>(std::lower_bound(index.begin(), index.end(), c) - index.begin());
	};
	std::vector<std::vector<std::size_t>> counts(n, std::vector<std::size_t>(n, 0));
	for (const auto &raw : target_sets) {
		std::set<std::string> s(raw.begin(), raw.end());
		if (s.size() == 1) {
			const auto i = pos(*s.begin());
			++counts[i][i];
			continue;
		}
		for (const auto &a : s) {
			for (const auto &b : s) {
				if (a != b) {
					++counts[pos(a)][pos(b)];
				}
			}
		}
	}

	std::vector<std::size_t> keep;
	for (std::size_t i = 0; i < n; ++i) {
		std::size_t row = 0;
		for (std::size_t j = 0; j < n; ++j) {
			row += counts[i][j];
		}
		if (row > 0) {
			keep.push_back(i);
		}
	}
	TransitionMatrix tm;
	for (auto i : keep) {
		tm.countries.push_back(index[i]);
	}
	const std::size_t m = keep.size();
	tm.counts.assign(m, std::vector<std::size_t>(m, 0));
	tm.probs.assign(m, std::vector<double>(m, 0.0));
	for (std::size_t a = 0; a < m; ++a) {
		std::size_t row = 0;
		for (std::size_t b = 0; b < m; ++b) {
			tm.counts[a][b] = counts[keep[a]][keep[b]];
			row += tm.counts[a][b];
		}
		for (std::size_t b = 0; b < m; ++b) {
			tm.probs[a][b] = static_cast<double>(tm.counts[a][b]) / static_cast<double>(row);
		}
	}
	return tm;
}

std::map<std::string, TransitionMatrix> estimate_transitions(const Corpus &corpus, GroupBy group_by) {
	if (corpus.empty()) {
		throw EmptyInputError("cannot estimate transitions from an empty corpus");
	}
	std::map<std::string, std::vector<std::vector<std::string>>> groups;
	for (const auto &ev : corpus) {
		if (ev.countries.empty()) {
			continue;
		}
		std::set<std::string> keys;
		switch (group_by) {
		case GroupBy::all:
			keys.insert(kAllGroup);
			break;
		case GroupBy::malware_family:
			keys.insert(ev.malware_families.begin(), ev.malware_families.end());
			break;
		case GroupBy::adversary:
			if (ev.adversary) {
				keys.insert(*ev.adversary);
			}
			break;
		case GroupBy::tag:
			keys.insert(ev.tags.begin(), ev.tags.end());
			break;
		}
		for (const auto &k : keys) {
			groups[k].push_back(ev.countries);
		}
	}
	std::map<std::string, TransitionMatrix> out;
	for (const auto &[key, sets] : groups) {
		auto tm = transitions_from_sets(sets);
		if (tm.size() > 0) {
			out.emplace(key, std::move(tm));
		}
	}
	return out;
}

SpreadGraph build_spread_graph(const TransitionMatrix &tm, const analytics::CountryCounts &node_weights,
                               double min_prob, std::string group_key) {
	if (!(min_prob >= 0.0 && min_prob < 1.0)) {
		throw std::invalid_argument("min_prob must lie in [0, 1)");
	}
	SpreadGraph g;
	g.group_key = std::move(group_key);
	for (const auto &c : tm.countries) {
		auto it = node_weights.counts.find(c);
		if (it == node_weights.counts.end() || it->second == 0) {
			throw std::invalid_argument("no node weight for country '" + c + "'");
		}
		g.nodes.push_back({c, it->second});
	}
	for (std::size_t i = 0; i < tm.size(); ++i) {
		for (std::size_t j = 0; j < tm.size(); ++j) {
			const double p = tm.probs[i][j];
			if (i != j && p > 0.0 && p >= min_prob) {
				g.edges.push_back({tm.countries[i], tm.countries[j], p});
			}
		}
	}
	return g;
}

namespace {

std::string dot_quote(const std::string &s) {
	std::string out = "\"";
	for (char c : s) {
		if (c == '"' || c == '\\') {
			out.push_back('\\');
		}
		out.push_back(c);
	}
	out.push_back('"');
	return out;
}

std::string fixed(double v, int decimals) {
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
	return buf;
}

} // namespace

std::string export_dot(const SpreadGraph &graph) {
	std::string out = "digraph spread {\n";
	std::size_t max_weight = 0;
	for (const auto &n : graph.nodes) {
		max_weight = std::max(max_weight, n.weight);
	}
	auto nodes = graph.nodes;
	std::sort(nodes.begin(), nodes.end(), [](const auto &a, const auto &b) { return a.name < b.name; });
	for (const auto &n : nodes) {
		const double width = 2.0 * static_cast<double>(n.weight) / static_cast<double>(max_weight);
		out += "  " + dot_quote(n.name) + " [weight=" + std::to_string(n.weight) + ", width=" + fixed(width, 3) +
		       "];\n";
	}
	auto edges = graph.edges;
	std::sort(edges.begin(), edges.end(),
	          [](const auto &a, const auto &b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
	for (const auto &e : edges) {
		out += "  " + dot_quote(e.src) + " -> " + dot_quote(e.dst) + " [label=\"" + fixed(e.p, 2) + "\"];\n";
	}
	out += "}\n";
	return out;
}

std::string graph_to_json(const SpreadGraph &graph) {
	nlohmann::ordered_json j;
	j["group"] = graph.group_key;
	j["nodes"] = nlohmann::ordered_json::array();
	for (const auto &n : graph.nodes) {
		j["nodes"].push_back({{"name", n.name}, {"weight", n.weight}});
	}
	j["edges"] = nlohmann::ordered_json::array();
	for (const auto &e : graph.edges) {
		j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"p", e.p}});
	}
	return j.dump(2) + "\n";
}

} // namespace threatgeo::spread
