#include "support.hpp"
#include "threatgeo/analytics.hpp"
#include "threatgeo/correlate.hpp"
#include "threatgeo/spread.hpp"
#include "threatgeo/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace threatgeo;
using namespace threatgeo::synth;

namespace {

SynthSpec small_spec() {
	SynthSpec s;
	s.countries = {"A", "B", "C"};
	s.p_star = {{0.5, 0.3, 0.2}, {0.1, 0.8, 0.1}, {0.3, 0.3, 0.4}};
	s.incidents = 500;
	s.labels = {"x", "y"};
	return s;
}

double max_abs_error(const spread::TransitionMatrix &tm, const SynthSpec &s) {
	double worst = 0.0;
	for (std::size_t i = 0; i < s.countries.size(); ++i) {
		for (std::size_t j = 0; j < s.countries.size(); ++j) {
			worst = std::max(worst, std::abs(tm.prob(s.countries[i], s.countries[j]) - s.p_star[i][j]));
		}
	}
	return worst;
}

} // namespace

TEST_CASE("validate") {
	auto s = small_spec();
	CHECK_NOTHROW(validate(s));
	s.p_star[0][0] = 0.6;
	CHECK_THROWS_AS(validate(s), std::invalid_argument);
	s = small_spec();
	s.p_star[1] = {1.2, -0.1, -0.1};
	CHECK_THROWS_AS(validate(s), std::invalid_argument);
	s = small_spec();
	s.incidents = 0;
	CHECK_THROWS_AS(validate(s), std::invalid_argument);
	s = small_spec();
	s.p_star.pop_back();
	CHECK_THROWS_AS(validate(s), std::invalid_argument);
}

TEST_CASE("generation is deterministic") {
	auto s = small_spec();
	s.ar_phi = 0.5;
	auto a = corpus_to_string(generate(s), CorpusFormat::ndjson);
	auto b = corpus_to_string(generate(s), CorpusFormat::ndjson);
	CHECK(a == b);
	s.seed = 43;
	CHECK(corpus_to_string(generate(s), CorpusFormat::ndjson) != a);
}

TEST_CASE("dates, labels and set sizes") {
	auto s = small_spec();
	s.dates = {make_date(2021, 3, 10), make_date(2021, 4, 2)};
	auto corpus = generate(s);
	REQUIRE(corpus.size() == s.incidents);
	std::map<std::string, std::size_t> labels;
	for (const auto &ev : corpus) {
		CHECK(ev.created_at >= s.dates.from);
		CHECK(ev.created_at <= s.dates.to);
		CHECK(ev.countries.size() >= 1);
		CHECK(ev.countries.size() <= 3);
		REQUIRE(ev.malware_families.size() == 1);
		++labels[ev.malware_families[0]];
	}
	CHECK(labels["x"] == 250);
	CHECK(labels["y"] == 250);
}

TEST_CASE("identity chain gives single-country incidents") {
	auto s = small_spec();
	s.p_star = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
	for (auto mode : {TargetMode::walk, TargetMode::pairwise}) {
		s.mode = mode;
		for (const auto &ev : generate(s)) {
			CHECK(ev.countries.size() == 1);
		}
	}
}

TEST_CASE("forced alternation targets both countries") {
	SynthSpec s;
	s.countries = {"A", "B"};
	s.p_star = {{0, 1}, {1, 0}};
	s.incidents = 400;
	std::size_t multi = 0;
	for (const auto &ev : generate(s)) {
		if (ev.countries.size() >= 2) {
			++multi;
			std::set<std::string> got(ev.countries.begin(), ev.countries.end());
			CHECK(got == std::set<std::string>{"A", "B"});
		}
	}
	CHECK(multi > 150);
}

TEST_CASE("stationary distribution") {
	std::vector<std::vector<double>> p{{0.9, 0.1}, {0.5, 0.5}};
	auto pi = stationary_distribution(p);
	CHECK(pi[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-10));
	CHECK(pi[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-10));

	auto periodic = stationary_distribution({{0, 1}, {1, 0}});
	CHECK(periodic[0] == doctest::Approx(0.5).epsilon(1e-10));

	auto q = random_stochastic_matrix(6, 5);
	auto pq = stationary_distribution(q);
	double total = 0.0;
	for (std::size_t j = 0; j < 6; ++j) {
		double next = 0.0;
		for (std::size_t i = 0; i < 6; ++i) {
			next += pq[i] * q[i][j];
		}
		CHECK(next == doctest::Approx(pq[j]).epsilon(1e-9));
		total += pq[j];
	}
	CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random chains") {
	auto p = random_reversible_chain(6, 42);
	auto pi = stationary_distribution(p);
	for (std::size_t i = 0; i < 6; ++i) {
		double sum = 0.0;
		for (std::size_t j = 0; j < 6; ++j) {
			sum += p[i][j];
			CHECK(pi[i] * p[i][j] == doctest::Approx(pi[j] * p[j][i]).epsilon(1e-9));
		}
		CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
	}
	auto q = random_stochastic_matrix(4, 1);
	for (const auto &row : q) {
		double sum = 0.0;
		for (double v : row) {
			CHECK(v > 0.0);
			sum += v;
		}
		CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
	}
}

TEST_CASE("estimator recovers a reversible chain") {
	SynthSpec s;
	s.countries = {"C0", "C1", "C2", "C3", "C4", "C5"};
	s.p_star = random_reversible_chain(6, 42);
	s.incidents = 10000;
	s.seed = 42;
	s.mode = TargetMode::pairwise;
	auto groups = spread::estimate_transitions(generate(s), spread::GroupBy::all);
	const auto &tm = groups.at(spread::kAllGroup);
	REQUIRE(tm.size() == 6);
	CHECK(max_abs_error(tm, s) < 0.05);
}

TEST_CASE("monthly volume follows the seasonal profile") {
	SynthSpec s = small_spec();
	s.incidents = 10000;
	s.seed = 42;
	s.seasonal_profile = std::array<double, 12>{1, 1, 2, 2, 1, 1, 3, 3, 1, 1, 2, 1};
	auto corpus = generate(s);
	std::vector<double> months(12, 0.0);
	for (const auto &ev : corpus) {
		months[static_cast<unsigned>(std::chrono::year_month_day{ev.created_at}.month()) - 1] += 1.0;
	}
	std::vector<double> expected;
	for (std::size_t m = 0; m < 12; ++m) {
		const auto first = make_date(2020, static_cast<unsigned>(m + 1), 1);
		const auto last = m == 11 ? make_date(2021, 1, 1) : make_date(2020, static_cast<unsigned>(m + 2), 1);
		expected.push_back((*s.seasonal_profile)[m] * static_cast<double>((last - first).count()));
	}
	auto r = correlate::pearson(months, expected);
	REQUIRE(r);
	CHECK(*r > 0.8);

	s.ar_phi = 0.6;
	auto noisy = generate(s);
	std::vector<double> noisy_months(12, 0.0);
	for (const auto &ev : noisy) {
		noisy_months[static_cast<unsigned>(std::chrono::year_month_day{ev.created_at}.month()) - 1] += 1.0;
	}
	auto rn = correlate::pearson(noisy_months, expected);
	REQUIRE(rn);
	CHECK(*rn > 0.8);
}

TEST_CASE("spec JSON round trip") {
	auto s = small_spec();
	s.seasonal_profile = std::array<double, 12>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
	s.ar_phi = 0.25;
	s.mode = TargetMode::pairwise;
	auto back = spec_from_json(spec_to_json(s));
	CHECK(back.countries == s.countries);
	CHECK(back.p_star == s.p_star);
	CHECK(back.incidents == s.incidents);
	CHECK(back.dates.from == s.dates.from);
	CHECK(back.dates.to == s.dates.to);
	CHECK(back.seasonal_profile == s.seasonal_profile);
	CHECK(back.ar_phi == s.ar_phi);
	CHECK(back.seed == s.seed);
	CHECK(back.labels == s.labels);
	CHECK(back.mode == s.mode);
	CHECK(spec_to_json(back) == spec_to_json(s));

	auto example = spec_from_json(read_file(std::string(THREATGEO_DATA_DIR) + "/synth_spec_example.json"));
	CHECK(example.countries.size() == 6);
	CHECK(example.mode == TargetMode::walk);
	CHECK_THROWS(spec_from_json(R"({"countries":["A"],"p_star":[[0.5]]})"));
}

TEST_CASE("noise generators") {
	auto w = white_noise(5000, 2.0, 3);
	double mean = 0.0;
	for (double v : w) {
		mean += v;
	}
	mean /= static_cast<double>(w.size());
	double var = 0.0;
	for (double v : w) {
		var += (v - mean) * (v - mean);
	}
	var /= static_cast<double>(w.size() - 1);
	CHECK(std::abs(mean) < 0.1);
	CHECK(var == doctest::Approx(4.0).epsilon(0.1));
	CHECK(arma_series({0.5}, {}, 1.0, 1.0, 100, 9) == arma_series({0.5}, {}, 1.0, 1.0, 100, 9));
}
