#include "threatgeo/correlate.hpp"

#include "threatgeo/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <stdexcept>

namespace threatgeo::correlate {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
	if (x.size() != y.size()) {
		throw std::invalid_argument("pearson: series lengths differ");
	}
	if (x.size() < 2) {
		throw std::invalid_argument("pearson: need at least 2 points");
	}
	const double n = static_cast<double>(x.size());
	double mx = 0.0, my = 0.0;
	for (std::size_t i = 0; i < x.size(); ++i) {
		mx += x[i];
		my += y[i];
	}
	mx /= n;
	my /= n;
	double sxy = 0.0, sxx = 0.0, syy = 0.0;
	for (std::size_t i = 0; i < x.size(); ++i) {
		const double dx = x[i] - mx;
		const double dy = y[i] - my;
		sxy += dx * dy;
		sxx += dx * dx;
		syy += dy * dy;
	}
	if (sxx == 0.0 || syy == 0.0) {
		return std::nullopt;
	}
	const double r = sxy / std::sqrt(sxx * syy);
	return std::clamp(r, -1.0, 1.0);
}

std::optional<double> correlation_at_lag(std::span<const double> x, std::span<const double> y, int lag) {
	if (x.size() != y.size()) {
		throw std::invalid_argument("correlation_at_lag: series lengths differ");
	}
	const std::size_t shift = static_cast<std::size_t>(std::abs(lag));
	if (shift + 2 > x.size()) {
		throw std::invalid_argument("correlation_at_lag: series too short for lag");
	}
	const std::size_t len = x.size() - shift;
	if (lag >= 0) {
		return pearson(x.subspan(0, len), y.subspan(shift, len));
	}
	return pearson(x.subspan(shift, len), y.subspan(0, len));
}

LagResult lagged_correlation(std::span<const double> x, std::span<const double> y, int max_lag) {
	if (max_lag < 0) {
		throw std::invalid_argument("max_lag must be >= 0");
	}
	if (x.size() != y.size()) {
		throw std::invalid_argument("lagged_correlation: series lengths differ");
	}
	if (x.size() <= static_cast<std::size_t>(max_lag) + 2) {
		throw std::invalid_argument("lagged_correlation: series length must exceed max_lag + 2");
	}
	LagResult best;
	// Visiting 0, -1, +1, -2, +2, ... and replacing only on strictly larger |r|
	// realizes the tie-break order.
	for (int mag = 0; mag <= max_lag; ++mag) {
		for (int sign : {-1, 1}) {
			if (mag == 0 && sign == 1) {
				continue;
			}
			const int lag = sign * mag;
			auto r = correlation_at_lag(x, y, lag);
			if (r && (!best.r || std::abs(*r) > std::abs(*best.r))) {
				best = {r, lag};
			}
		}
	}
	return best;
}

CorrelationMatrix correlation_heatmap(const analytics::TimeSeriesPanel &panel, Mode mode, int lag) {
	const std::size_t n = panel.countries.size();
	if (n < 2) {
		throw std::invalid_argument("correlation heatmap needs at least 2 countries");
	}
	const std::size_t needed = mode == Mode::pointwise ? 2 : static_cast<std::size_t>(std::abs(lag)) + 3;
	if (panel.width() < needed) {
		throw std::invalid_argument("panel has " + std::to_string(panel.width()) + " bins; need at least " +
		                            std::to_string(needed));
	}
	CorrelationMatrix m;
	m.countries = panel.countries;
	m.r.assign(n, std::vector<std::optional<double>>(n));
	if (mode != Mode::pointwise) {
		m.best_lag = std::vector<std::vector<int>>(n, std::vector<int>(n, 0));
	}
	for (std::size_t i = 0; i < n; ++i) {
		const auto &xi = panel.values[i];
		for (std::size_t j = 0; j < n; ++j) {
			const auto &yj = panel.values[j];
			if (i == j) {
				// Defined self-correlation is exactly 1.
				auto self = pearson(xi, xi);
				m.r[i][j] = self ? std::optional<double>(1.0) : std::nullopt;
				continue;
			}
			switch (mode) {
			case Mode::pointwise:
				m.r[i][j] = pearson(xi, yj);
				break;
			case Mode::lagged: {
				auto best = lagged_correlation(xi, yj, lag);
				m.r[i][j] = best.r ? std::optional<double>(std::abs(*best.r)) : std::nullopt;
				(*m.best_lag)[i][j] = best.lag;
				break;
			}
			case Mode::fixed_lag:
				m.r[i][j] = correlation_at_lag(xi, yj, lag);
				(*m.best_lag)[i][j] = lag;
				break;
			}
		}
	}
	return m;
}

Mode mode_from_string(std::string_view name) {
	if (name == "pointwise") {
		return Mode::pointwise;
	}
	if (name == "lagged") {
		return Mode::lagged;
	}
	if (name == "fixed-lag" || name == "fixed_lag") {
		return Mode::fixed_lag;
	}
	throw std::invalid_argument("unknown correlation mode: " + std::string(name));
}

std::string matrix_to_json(const CorrelationMatrix &m) {
	nlohmann::ordered_json j;
	j["countries"] = m.countries;
	auto rows = nlohmann::ordered_json::array();
	for (const auto &row : m.r) {
		auto jr = nlohmann::ordered_json::array();
		for (const auto &v : row) {
			jr.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
		}
		rows.push_back(jr);
	}
	j["r"] = rows;
	j["best_lag"] = m.best_lag ? nlohmann::ordered_json(*m.best_lag) : nlohmann::ordered_json(nullptr);
	return j.dump(2) + "\n";
}

std::string matrix_to_csv(const CorrelationMatrix &m) {
	std::vector<std::string> header{"country"};
	header.insert(header.end(), m.countries.begin(), m.countries.end());
	std::string out = csv::format_row(header);
	for (std::size_t i = 0; i < m.countries.size(); ++i) {
		std::vector<std::string> row{m.countries[i]};
		for (const auto &v : m.r[i]) {
			if (v) {
				row.push_back(csv::format_number(*v));
			} else {
				row.emplace_back();
			}
		}
		out += csv::format_row(row);
	}
	return out;
}

} // namespace threatgeo::correlate
