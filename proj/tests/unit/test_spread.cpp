#include "support.hpp"
#include "threatgeo/error.hpp"
#include "threatgeo/spread.hpp"
#include "threatgeo/synth.hpp"

#include <doctest.h>

using namespace threatgeo;
using namespace threatgeo::spread;
using testing::corpus_of_sets;

namespace {

void check_stochastic(const TransitionMatrix &tm) {
	for (std::size_t i = 0; i < tm.size(); ++i) {
		double sum = 0.0;
		std::size_t row = 0;
		for (std::size_t j = 0; j < tm.size(); ++j) {
			CHECK(tm.probs[i][j] >= 0.0);
			CHECK(tm.probs[i][j] <= 1.0);
			sum += tm.probs[i][j];
			row += tm.counts[i][j];
		}
		REQUIRE(row > 0);
		CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
		for (std::size_t j = 0; j < tm.size(); ++j) {
			CHECK(tm.probs[i][j] == static_cast<double>(tm.counts[i][j]) / static_cast<double>(row));
		}
	}
}

} // namespace

TEST_CASE("hand-enumerated ordered pairs") {
	auto groups = estimate_transitions(corpus_of_sets({{"A", "B"}, {"A", "B"}, {"A", "C"}}));
	REQUIRE(groups.size() == 1);
	const auto &tm = groups.at(kAllGroup);
	CHECK(tm.countries == std::vector<std::string>{"A", "B", "C"});
	CHECK(tm.prob("A", "B") == doctest::Approx(2.0 / 3.0));
	CHECK(tm.prob("A", "C") == doctest::Approx(1.0 / 3.0));
	CHECK(tm.prob("B", "A") == 1.0);
	CHECK(tm.prob("C", "A") == 1.0);
	CHECK(tm.prob("A", "Z") == 0.0);
	check_stochastic(tm);

	SUBCASE("graph at min_prob 0.5") {
		analytics::CountryCounts w{{{"A", 3}, {"B", 2}, {"C", 1}}, 6};
		auto g = build_spread_graph(tm, w, 0.5);
		REQUIRE(g.edges.size() == 3);
		CHECK(g.edges[0].src == "A");
		CHECK(g.edges[0].dst == "B");
		CHECK(g.edges[0].p == doctest::Approx(2.0 / 3.0));
		CHECK((g.edges[1].src == "B" && g.edges[1].dst == "A" && g.edges[1].p == 1.0));
		CHECK((g.edges[2].src == "C" && g.edges[2].dst == "A" && g.edges[2].p == 1.0));
		CHECK(build_spread_graph(tm, w, 0.0).edges.size() == 4);
		CHECK_THROWS(build_spread_graph(tm, w, 1.0));
		CHECK_THROWS(build_spread_graph(tm, w, -0.1));
	}
}

TEST_CASE("single-target events sit on the diagonal") {
	auto tm = estimate_transitions(corpus_of_sets({{"A"}, {"A"}})).at(kAllGroup);
	CHECK(tm.probs == std::vector<std::vector<double>>{{1.0}});
	analytics::CountryCounts w{{{"A", 2}}, 2};
	auto g = build_spread_graph(tm, w, 0.0);
	CHECK(g.nodes.size() == 1);
	CHECK(g.edges.empty());
	CHECK_THROWS_AS(estimate_transitions(Corpus{}), EmptyInputError);
}

TEST_CASE("grouping drops countries with empty rows") {
	std::vector<ThreatEvent> events;
	auto add = [&](std::vector<std::string> countries, std::vector<std::string> malware) {
		auto ev = testing::event("e" + std::to_string(events.size()), "2020-01-01", std::move(countries));
		ev.malware_families = std::move(malware);
		events.push_back(ev);
	};
	add({"A", "B"}, {"Emotet"});
	add({"C", "A"}, {"Ryuk", "Emotet"});
	add({"D"}, {});
	auto groups = estimate_transitions(Corpus(events), GroupBy::malware_family);
	REQUIRE(groups.size() == 2);
	CHECK(groups.at("Emotet").countries == std::vector<std::string>{"A", "B", "C"});
	CHECK(groups.at("Emotet").prob("A", "B") == 0.5);
	CHECK(groups.at("Ryuk").countries == std::vector<std::string>{"A", "C"});
	CHECK(estimate_transitions(Corpus(events), GroupBy::all).at(kAllGroup).size() == 4);
}

TEST_CASE("multi-target counts are symmetric and rows stochastic on random corpora") {
	for (std::uint64_t seed = 0; seed < 40; ++seed) {
		synth::SynthSpec spec;
		spec.countries = {"A", "B", "C", "D", "E"};
		spec.p_star = synth::random_stochastic_matrix(5, seed);
		spec.incidents = 200;
		spec.seed = seed;
		auto tm = estimate_transitions(synth::generate(spec)).at(kAllGroup);
		check_stochastic(tm);
		for (std::size_t i = 0; i < tm.size(); ++i) {
			for (std::size_t j = 0; j < tm.size(); ++j) {
				if (i != j) {
					CHECK(tm.counts[i][j] == tm.counts[j][i]);
				}
			}
		}
	}
}

TEST_CASE("export_dot") {
	CHECK(export_dot(SpreadGraph{}) == "digraph spread {\n}\n");
	SpreadGraph g{"all", {{"New Zealand", 4}, {"Côte d\"Ivoire", 2}}, {{"Côte d\"Ivoire", "New Zealand", 0.6}}};
	const auto dot = export_dot(g);
	CHECK(dot == read_file(testing::fixture("golden/two_nodes.dot")));
	CHECK(export_dot(g) == dot);
}

TEST_CASE("graph JSON") {
	SpreadGraph g{"Emotet", {{"A", 2}, {"B", 1}}, {{"A", "B", 0.5}}};
	CHECK(graph_to_json(g).find(R"("src": "A")") != std::string::npos);
	CHECK(graph_to_json(g).find(R"("group": "Emotet")") != std::string::npos);
}
