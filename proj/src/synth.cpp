#include "threatgeo/synth.hpp"

#include "threatgeo/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <stdexcept>

namespace threatgeo::synth {

namespace chr = std::chrono;

void validate(const SynthSpec &spec) {
	const std::size_t n = spec.countries.size();
	if (n == 0) {
		throw std::invalid_argument("synth spec needs at least one country");
	}
	if (spec.p_star.size() != n) {
		throw std::invalid_argument("P* must be n x n for n countries");
	}
	for (const auto &row : spec.p_star) {
		if (row.size() != n) {
			throw std::invalid_argument("P* must be n x n for n countries");
		}
		double s = 0.0;
		for (double v : row) {
			if (!(v >= 0.0)) {
				throw std::invalid_argument("P* entries must be non-negative");
			}
			s += v;
		}
		if (std::abs(s - 1.0) > 1e-12) {
			throw std::invalid_argument("P* is not row-stochastic (a row sums to " + std::to_string(s) + ")");
		}
	}
	if (spec.incidents < 1) {
		throw std::invalid_argument("incidents must be >= 1");
	}
	if (spec.dates.from > spec.dates.to) {
		throw std::invalid_argument("synth date range has from > to");
	}
	if (spec.seasonal_profile) {
		for (double m : *spec.seasonal_profile) {
			if (!(m >= 0.0)) {
				throw std::invalid_argument("seasonal multipliers must be non-negative");
			}
		}
	}
}

std::vector<double> stationary_distribution(const std::vector<std::vector<double>> &p) {
	const std::size_t n = p.size();
	std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
	for (int iter = 0; iter < 1000000; ++iter) {
		for (std::size_t j = 0; j < n; ++j) {
			double s = 0.5 * pi[j];
			for (std::size_t i = 0; i < n; ++i) {
				s += 0.5 * pi[i] * p[i][j];
			}
			next[j] = s;
		}
		double delta = 0.0;
		for (std::size_t j = 0; j < n; ++j) {
			delta = std::max(delta, std::abs(next[j] - pi[j]));
		}
		pi.swap(next);
		if (delta < 1e-12) {
			break;
		}
	}
	double total = 0.0;
	for (double v : pi) {
		total += v;
	}
	for (auto &v : pi) {
		v /= total;
	}
	return pi;
}

namespace {

std::size_t draw_categorical(const std::vector<double> &weights, std::mt19937_64 &gen) {
	double total = 0.0;
	for (double w : weights) {
		total += w;
	}
	double u = rng::uniform01(gen) * total;
	for (std::size_t i = 0; i < weights.size(); ++i) {
		u -= weights[i];
		if (u < 0.0) {
			return i;
		}
	}
	// Rounding fell off the end: last positive weight.
	for (std::size_t i = weights.size(); i-- > 0;) {
		if (weights[i] > 0.0) {
			return i;
		}
	}
	return 0;
}

/// Cumulative daily weights over the date range.
std::vector<double> daily_intensity(const SynthSpec &spec) {
	const auto days = static_cast<std::size_t>((spec.dates.to - spec.dates.from).count() + 1);
	std::vector<double> w(days, 1.0);
	std::vector<double> z(days, 0.0);
	if (spec.ar_phi) {
		auto gen = rng::substream(spec.seed, (1ULL << 63));
		const double phi = *spec.ar_phi;
		const double sigma = 0.3;
		double prev = 0.0;
		for (std::size_t t = 0; t < days; ++t) {
			prev = phi * prev + sigma * rng::standard_normal(gen);
			z[t] = prev;
		}
	}
	for (std::size_t t = 0; t < days; ++t) {
		const Date d = spec.dates.from + chr::days{static_cast<long>(t)};
		double m = 1.0;
		if (spec.seasonal_profile) {
			const unsigned month = static_cast<unsigned>(chr::year_month_day{d}.month());
			m = (*spec.seasonal_profile)[month - 1];
		}
		w[t] = m * std::exp(z[t]);
	}
	return w;
}

std::size_t geometric_size(std::mt19937_64 &gen) {
	std::size_t size = 1;
	while (size < 5 && rng::uniform01(gen) < 0.5) {
		++size;
	}
	return size;
}

} // namespace

Corpus generate(const SynthSpec &spec) {
	validate(spec);
	const auto pi = stationary_distribution(spec.p_star);
	const auto intensity = daily_intensity(spec);
	double intensity_total = 0.0;
	for (double v : intensity) {
		intensity_total += v;
	}
	if (!(intensity_total > 0.0)) {
		throw std::invalid_argument("seasonal profile gives zero intensity over the whole date range");
	}

	std::vector<ThreatEvent> events;
	events.reserve(spec.incidents);
	char id_buf[32];
	for (std::size_t k = 0; k < spec.incidents; ++k) {
		auto gen = rng::substream(spec.seed, k);
		std::vector<std::size_t> members;
		if (spec.mode == TargetMode::walk) {
			std::size_t cur = draw_categorical(pi, gen);
			members.push_back(cur);
			const std::size_t size = geometric_size(gen);
			for (std::size_t s = 1; s < size; ++s) {
				cur = draw_categorical(spec.p_star[cur], gen);
				if (std::find(members.begin(), members.end(), cur) == members.end()) {
					members.push_back(cur);
				}
			}
		} else {
			while (true) {
				const std::size_t i = draw_categorical(pi, gen);
				const std::size_t j = draw_categorical(spec.p_star[i], gen);
				if (i == j) {
					members = {i};
					break;
				}
				if (rng::uniform01(gen) < 0.5) {
					members = {i, j};
					break;
				}
			}
		}
		const std::size_t day = draw_categorical(intensity, gen);

		ThreatEvent ev;
		std::snprintf(id_buf, sizeof id_buf, "synth-%08zu", k);
		ev.id = id_buf;
		ev.title = "synthetic incident " + std::to_string(k);
		ev.created_at = spec.dates.from + chr::days{static_cast<long>(day)};
		for (auto m : members) {
			ev.countries.push_back(spec.countries[m]);
			ev.raw_country_strings.push_back(spec.countries[m]);
		}
		if (!spec.labels.empty()) {
			ev.malware_families.push_back(spec.labels[k % spec.labels.size()]);
		}
		ev.tags.push_back("synthetic");
		events.push_back(std::move(ev));
	}
	return Corpus(std::move(events), "synth:seed=" + std::to_string(spec.seed));
}

SynthSpec spec_from_json(std::string_view text) {
	auto j = nlohmann::json::parse(text);
	SynthSpec s;
	s.countries = j.at("countries").get<std::vector<std::string>>();
	s.p_star = j.at("p_star").get<std::vector<std::vector<double>>>();
	s.incidents = j.value("incidents", s.incidents);
	if (j.contains("from")) {
		s.dates.from = parse_date(j.at("from").get<std::string>());
	}
	if (j.contains("to")) {
		s.dates.to = parse_date(j.at("to").get<std::string>());
	}
	if (j.contains("seasonal_profile") && !j.at("seasonal_profile").is_null()) {
		auto v = j.at("seasonal_profile").get<std::vector<double>>();
		if (v.size() != 12) {
			throw std::invalid_argument("seasonal_profile needs 12 monthly multipliers");
		}
		std::array<double, 12> a{};
		std::copy(v.begin(), v.end(), a.begin());
		s.seasonal_profile = a;
	}
	if (j.contains("ar_phi") && !j.at("ar_phi").is_null()) {
		s.ar_phi = j.at("ar_phi").get<double>();
	}
	s.seed = j.value("seed", s.seed);
	s.labels = j.value("labels", std::vector<std::string>{});
	const auto mode = j.value("mode", std::string("walk"));
	if (mode == "walk") {
		s.mode = TargetMode::walk;
	} else if (mode == "pairwise") {
		s.mode = TargetMode::pairwise;
	} else {
		throw std::invalid_argument("unknown synth mode: " + mode);
	}
	validate(s);
	return s;
}

std::string spec_to_json(const SynthSpec &s) {
	nlohmann::ordered_json j;
	j["countries"] = s.countries;
	j["p_star"] = s.p_star;
	j["incidents"] = s.incidents;
	j["from"] = format_date(s.dates.from);
	j["to"] = format_date(s.dates.to);
	j["seasonal_profile"] = s.seasonal_profile ? nlohmann::ordered_json(*s.seasonal_profile) : nullptr;
	j["ar_phi"] = s.ar_phi ? nlohmann::ordered_json(*s.ar_phi) : nullptr;
	j["seed"] = s.seed;
	j["labels"] = s.labels;
	j["mode"] = s.mode == TargetMode::walk ? "walk" : "pairwise";
	return j.dump(2) + "\n";
}

std::vector<std::vector<double>> random_reversible_chain(std::size_t n, std::uint64_t seed, double self_weight) {
	auto gen = rng::substream(seed, 0);
	std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t j = i; j < n; ++j) {
			const double v = 0.2 + rng::uniform01(gen);
			w[i][j] = w[j][i] = (i == j) ? v * self_weight : v;
		}
	}
	for (auto &row : w) {
		double s = 0.0;
		for (double v : row) {
			s += v;
		}
		for (auto &v : row) {
			v /= s;
		}
	}
	return w;
}

std::vector<std::vector<double>> random_stochastic_matrix(std::size_t n, std::uint64_t seed) {
	auto gen = rng::substream(seed, 0);
	std::vector<std::vector<double>> p(n, std::vector<double>(n));
	for (auto &row : p) {
		double s = 0.0;
		for (auto &v : row) {
			v = 1.0 - rng::uniform01(gen);
			s += v;
		}
		for (auto &v : row) {
			v /= s;
		}
	}
	return p;
}

std::vector<double> arma_series(const std::vector<double> &phi, const std::vector<double> &theta, double intercept,
                                double sigma, std::size_t n, std::uint64_t seed) {
	constexpr std::size_t burn_in = 500;
	auto gen = rng::substream(seed, 0);
	const std::size_t total = n + burn_in;
	std::vector<double> x(total, 0.0), e(total, 0.0);
	for (std::size_t t = 0; t < total; ++t) {
		e[t] = sigma * rng::standard_normal(gen);
		double v = intercept + e[t];
		for (std::size_t i = 0; i < phi.size(); ++i) {
			if (t >= i + 1) {
				v += phi[i] * x[t - 1 - i];
			}
		}
		for (std::size_t j = 0; j < theta.size(); ++j) {
			if (t >= j + 1) {
				v += theta[j] * e[t - 1 - j];
			}
		}
		x[t] = v;
	}
	return {x.begin() + static_cast<std::ptrdiff_t>(burn_in), x.end()};
}

std::vector<double> white_noise(std::size_t n, double sigma, std::uint64_t seed) {
	auto gen = rng::substream(seed, 0);
	std::vector<double> out(n);
	for (auto &v : out) {
		v = sigma * rng::standard_normal(gen);
	}
	return out;
}

} // namespace threatgeo::synth
