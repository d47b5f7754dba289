#include "support.hpp"
#include "threatgeo/analytics.hpp"
#include "threatgeo/correlate.hpp"

#include <cmath>
#include <doctest.h>
#include <random>

using namespace threatgeo;
using namespace threatgeo::correlate;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
	std::mt19937_64 rng(seed);
	std::normal_distribution<double> z;
	std::vector<double> out(n);
	for (auto &v : out) {
		v = z(rng);
	}
	return out;
}

/// Textbook two-pass formula, used as an oracle.
double pearson_oracle(const std::vector<double> &x, const std::vector<double> &y) {
	const double n = static_cast<double>(x.size());
	double mx = 0, my = 0;
	for (std::size_t i = 0; i < x.size(); ++i) {
		mx += x[i] / n;
		my += y[i] / n;
	}
	double sxy = 0, sxx = 0, syy = 0;
	for (std::size_t i = 0; i < x.size(); ++i) {
		sxy += (x[i] - mx) * (y[i] - my);
		sxx += (x[i] - mx) * (x[i] - mx);
		syy += (y[i] - my) * (y[i] - my);
	}
	return sxy / std::sqrt(sxx * syy);
}

analytics::TimeSeriesPanel shifted_panel() {
	auto a = noise(120, 9);
	for (auto &v : a) {
		v = std::round(5.0 + 2.0 * v);
	}
	std::vector<double> b(a.size(), 0.0);
	for (std::size_t t = 7; t < a.size(); ++t) {
		b[t] = a[t - 7];
	}
	analytics::TimeSeriesPanel p;
	p.start = make_date(2020, 1, 1);
	p.bin = analytics::Bin::day;
	p.countries = {"A", "B"};
	p.values = {a, b};
	return p;
}

} // namespace

TEST_CASE("pearson") {
	const std::vector<double> x{1, 2, 3, 4};
	CHECK(*pearson(x, std::vector<double>{2, 4, 6, 8}) == doctest::Approx(1.0));
	CHECK(*pearson(x, std::vector<double>{-1, -2, -3, -4}) == doctest::Approx(-1.0));
	CHECK_FALSE(pearson(std::vector<double>{1, 1, 1, 1}, x));
	CHECK_FALSE(pearson(x, std::vector<double>{3, 3, 3, 3}));
	CHECK_THROWS(pearson(x, std::vector<double>{1, 2, 3}));
	CHECK_THROWS(pearson(std::vector<double>{1}, std::vector<double>{1}));

	for (std::uint64_t seed = 0; seed < 50; ++seed) {
		auto a = noise(40, seed), b = noise(40, seed + 1000);
		for (std::size_t i = 0; i < b.size(); ++i) {
			b[i] += 0.3 * a[i];
		}
		const double r = *pearson(a, b);
		CHECK(r == doctest::Approx(pearson_oracle(a, b)).epsilon(1e-12));
		CHECK(std::abs(r) <= 1.0);
		std::vector<double> scaled(a.size());
		for (std::size_t i = 0; i < a.size(); ++i) {
			scaled[i] = 3.5 * a[i] - 11.0;
		}
		CHECK(std::abs(*pearson(scaled, b) - r) < 1e-9);
	}
}

TEST_CASE("lagged correlation") {
	auto x = noise(200, 1);
	std::vector<double> y(x.size());
	for (std::size_t t = 0; t < x.size(); ++t) {
		y[t] = t >= 7 ? x[t - 7] : 0.0;
	}
	auto best = lagged_correlation(x, y, 7);
	CHECK(best.lag == 7);
	CHECK(std::abs(*best.r - 1.0) < 1e-9);

	auto self = lagged_correlation(x, x, 7);
	CHECK(self.lag == 0);
	CHECK(*self.r == doctest::Approx(1.0));

	auto independent = lagged_correlation(noise(500, 7), noise(500, 8), 7);
	CHECK(std::abs(*independent.r) < 0.25);

	auto swapped = lagged_correlation(y, x, 7);
	CHECK(swapped.lag == -7);
	CHECK(std::abs(*swapped.r) == doctest::Approx(std::abs(*best.r)));

	CHECK_FALSE(lagged_correlation(std::vector<double>(20, 1.0), x.data() ? std::vector<double>(x.begin(), x.begin() + 20)
	                                                                       : std::vector<double>{},
	                               3)
	                .r);
	CHECK_THROWS(lagged_correlation(std::vector<double>(9, 0.0), std::vector<double>(9, 0.0), 7));
	CHECK_THROWS(lagged_correlation(x, y, -1));
}

TEST_CASE("lag ties prefer the smaller magnitude, then the negative lag") {
	// Period-4 pulses two steps apart match perfectly at lags -2 and +2.
	std::vector<double> x, y;
	for (int t = 0; t < 40; ++t) {
		x.push_back(t % 4 == 0);
		y.push_back(t % 4 == 2);
	}
	CHECK(*correlation_at_lag(x, y, 2) == doctest::Approx(1.0));
	CHECK(*correlation_at_lag(x, y, -2) == doctest::Approx(1.0));
	auto best = lagged_correlation(x, y, 3);
	CHECK(best.lag == -2);
	CHECK(std::abs(*best.r) == doctest::Approx(1.0));
	CHECK(lagged_correlation(x, x, 4).lag == 0);
}

TEST_CASE("lagged |r| dominates pointwise |r|") {
	for (std::uint64_t seed = 0; seed < 200; ++seed) {
		auto a = noise(60, seed), b = noise(60, seed + 5000);
		const double pointwise = std::abs(*pearson(a, b));
		CHECK(std::abs(*lagged_correlation(a, b, 7).r) >= pointwise);
	}
}

TEST_CASE("heatmaps") {
	SUBCASE("identical rows") {
		analytics::TimeSeriesPanel p;
		p.countries = {"A", "B", "C"};
		p.values = {{1, 3, 2, 5}, {1, 3, 2, 5}, {1, 3, 2, 5}};
		auto m = correlation_heatmap(p, Mode::pointwise);
		for (const auto &row : m.r) {
			for (const auto &v : row) {
				CHECK(*v == doctest::Approx(1.0));
			}
		}
		CHECK_FALSE(m.best_lag);
	}
	SUBCASE("shifted fixture") {
		auto p = shifted_panel();
		auto lagged = correlation_heatmap(p, Mode::lagged, 7);
		auto pointwise = correlation_heatmap(p, Mode::pointwise);
		CHECK(*lagged.r[0][1] == doctest::Approx(1.0));
		CHECK((*lagged.best_lag)[0][1] == 7);
		CHECK((*lagged.best_lag)[1][0] == -7);
		CHECK(std::abs(*pointwise.r[0][1]) < 0.5);
		CHECK(*pointwise.r[0][1] == *pointwise.r[1][0]);
		auto fixed = correlation_heatmap(p, Mode::fixed_lag, 7);
		CHECK(*fixed.r[0][1] == doctest::Approx(1.0));
	}
	SUBCASE("undefined entries stay undefined") {
		analytics::TimeSeriesPanel p;
		p.countries = {"A", "B"};
		p.values = {{0, 0, 0, 0, 0}, {1, 2, 3, 4, 0}};
		auto m = correlation_heatmap(p, Mode::pointwise);
		CHECK_FALSE(m.r[0][0]);
		CHECK_FALSE(m.r[0][1]);
		CHECK(*m.r[1][1] == 1.0);
		CHECK(matrix_to_json(m).find("null") != std::string::npos);
		CHECK(matrix_to_csv(m) == "country,A,B\nA,,\nB,,1\n");
	}
	SUBCASE("too few bins") {
		analytics::TimeSeriesPanel p;
		p.countries = {"A", "B"};
		p.values = {{1, 2, 3}, {3, 2, 1}};
		CHECK_THROWS(correlation_heatmap(p, Mode::lagged, 1));
		CHECK_NOTHROW(correlation_heatmap(p, Mode::lagged, 0));
	}
}
