#pragma once

#include "threatgeo/analytics.hpp"
#include "threatgeo/model.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace threatgeo::spread {

/// Row-stochastic country-to-country spread probabilities plus the raw
/// co-targeting counts they were normalized from.
struct TransitionMatrix {
	std::vector<std::string> countries;
	std::vector<std::vector<std::size_t>> counts;
	std::vector<std::vector<double>> probs;

	std::size_t size() const noexcept {
		return countries.size();
	}
	std::optional<std::size_t> index_of(const std::string &country) const;
	/// Probability of spreading from `from` to `to`; 0 when either is absent.
	double prob(const std::string &from, const std::string &to) const;
};

enum class GroupBy { all, malware_family, adversary, tag };

GroupBy group_by_from_string(std::string_view name);
std::string to_string(GroupBy g);

/// Group key used for GroupBy::all.
inline const std::string kAllGroup = "all";

/// Within each group, an event targeting set S with |S| >= 2 adds one count to
/// every ordered pair (i, j), i != j, of S; a single-target event adds one to
/// the diagonal. Rows are then normalized; zero rows are dropped from the
/// group's index set. Events may belong to several groups (one per label).
std::map<std::string, TransitionMatrix> estimate_transitions(const Corpus &corpus, GroupBy group_by = GroupBy::all);

/// Builds the matrix for one group from explicit target sets.
TransitionMatrix transitions_from_sets(const std::vector<std::vector<std::string>> &target_sets);

struct SpreadNode {
	std::string name;
	std::size_t weight;
};

struct SpreadEdge {
	std::string src;
	std::string dst;
	double p;
};

struct SpreadGraph {
	std::string group_key;
	std::vector<SpreadNode> nodes; // sorted by name
	std::vector<SpreadEdge> edges; // sorted by (src, dst)
};

/// Off-diagonal entries with p >= min_prob (and p > 0) become edges carrying
/// their unmodified probability. Node weights come from `node_weights`.
SpreadGraph build_spread_graph(const TransitionMatrix &tm, const analytics::CountryCounts &node_weights,
                               double min_prob, std::string group_key = kAllGroup);

/// Deterministic DOT digraph; all identifiers quoted, edge labels rounded to 2 decimals.
std::string export_dot(const SpreadGraph &graph);
/// {"group": ..., "nodes":[{name,weight}], "edges":[{src,dst,p}]}
std::string graph_to_json(const SpreadGraph &graph);

} // namespace threatgeo::spread
