#include "threatgeo/forecast.hpp"

#include "threatgeo/csv.hpp"
#include "threatgeo/error.hpp"
#include "threatgeo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace threatgeo::forecast {

std::string to_string(Kind kind) {
	switch (kind) {
	case Kind::AR:
		return "AR";
	case Kind::ARMA:
		return "ARMA";
	case Kind::ARIMA:
		return "ARIMA";
	}
	return "AR";
}

Kind kind_from_string(std::string_view name) {
	std::string up(name);
	std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
	if (up == "AR") {
		return Kind::AR;
	}
	if (up == "ARMA") {
		return Kind::ARMA;
	}
	if (up == "ARIMA") {
		return Kind::ARIMA;
	}
	throw std::invalid_argument("unknown model kind: " + std::string(name));
}

namespace {

struct Regression {
	double intercept = 0.0;
	std::vector<double> coef;
};

/// OLS of y on the columns of x plus an intercept. Columns are centered so the
/// ridge term only touches the slope coefficients.
Regression ols(const std::vector<double> &y, const std::vector<std::vector<double>> &cols) {
	const std::size_t rows = y.size();
	const std::size_t k = cols.size();
	if (rows == 0) {
		throw Error("regression has no rows");
	}
	double ybar = 0.0;
	for (double v : y) {
		ybar += v;
	}
	ybar /= static_cast<double>(rows);
	std::vector<double> means(k, 0.0);
	for (std::size_t c = 0; c < k; ++c) {
		for (double v : cols[c]) {
			means[c] += v;
		}
		means[c] /= static_cast<double>(rows);
	}
	linalg::Matrix xtx(k, k);
	std::vector<double> xty(k, 0.0);
	for (std::size_t a = 0; a < k; ++a) {
		for (std::size_t r = 0; r < rows; ++r) {
			xty[a] += (cols[a][r] - means[a]) * (y[r] - ybar);
		}
		for (std::size_t b = a; b < k; ++b) {
			double s = 0.0;
			for (std::size_t r = 0; r < rows; ++r) {
				s += (cols[a][r] - means[a]) * (cols[b][r] - means[b]);
			}
			xtx(a, b) = s;
			xtx(b, a) = s;
		}
		xtx(a, a) += kRidge;
	}
	Regression out;
	try {
		out.coef = linalg::solve_spd(xtx, xty);
	} catch (const std::domain_error &) {
		throw Error("normal equations are singular even after ridge jitter");
	}
	for (double c : out.coef) {
		if (!std::isfinite(c)) {
			throw Error("regression produced non-finite coefficients");
		}
	}
	out.intercept = ybar;
	for (std::size_t c = 0; c < k; ++c) {
		out.intercept -= out.coef[c] * means[c];
	}
	return out;
}

} // namespace

ForecastModel fit_ar(std::span<const double> series, int p) {
	if (p < 1) {
		throw std::invalid_argument("AR order p must be >= 1");
	}
	const std::size_t n = series.size();
	if (n < 10 * static_cast<std::size_t>(p)) {
		throw std::invalid_argument("series of length " + std::to_string(n) + " is too short for AR(" +
		                            std::to_string(p) + "); need >= 10 p");
	}
	const auto pu = static_cast<std::size_t>(p);
	std::vector<double> y(series.begin() + static_cast<std::ptrdiff_t>(pu), series.end());
	std::vector<std::vector<double>> cols(pu);
	for (std::size_t lag = 1; lag <= pu; ++lag) {
		auto &col = cols[lag - 1];
		col.reserve(n - pu);
		for (std::size_t t = pu; t < n; ++t) {
			col.push_back(series[t - lag]);
		}
	}
	auto reg = ols(y, cols);
	ForecastModel m;
	m.kind = Kind::AR;
	m.p = p;
	m.phi = std::move(reg.coef);
	m.intercept = reg.intercept;
	m.window = n;
	return m;
}

ForecastModel fit_arma(std::span<const double> series, int p, int q) {
	if (q < 0) {
		throw std::invalid_argument("MA order q must be >= 0");
	}
	if (q == 0) {
		auto m = fit_ar(series, p);
		m.kind = Kind::ARMA;
		return m;
	}
	if (p < 1) {
		throw std::invalid_argument("AR order p must be >= 1");
	}
	const std::size_t n = series.size();
	if (n < 10 * static_cast<std::size_t>(p + q)) {
		throw std::invalid_argument("series of length " + std::to_string(n) + " is too short for ARMA(" +
		                            std::to_string(p) + "," + std::to_string(q) + "); need >= 10 (p + q)");
	}
	const auto pu = static_cast<std::size_t>(p);
	const auto qu = static_cast<std::size_t>(q);
	const std::size_t long_order = std::min<std::size_t>(20, n / 10);
	const auto long_ar = fit_ar(series, static_cast<int>(long_order));
	std::vector<double> resid(n, 0.0);
	for (std::size_t t = long_order; t < n; ++t) {
		double pred = long_ar.intercept;
		for (std::size_t i = 0; i < long_order; ++i) {
			pred += long_ar.phi[i] * series[t - 1 - i];
		}
		resid[t] = series[t] - pred;
	}
	const std::size_t start = std::max(pu, long_order + qu);
	if (start >= n) {
		throw std::invalid_argument("series too short for the Hannan-Rissanen second stage");
	}
	std::vector<double> y(series.begin() + static_cast<std::ptrdiff_t>(start), series.end());
	std::vector<std::vector<double>> cols(pu + qu);
	for (std::size_t t = start; t < n; ++t) {
		for (std::size_t i = 1; i <= pu; ++i) {
			cols[i - 1].push_back(series[t - i]);
		}
		for (std::size_t j = 1; j <= qu; ++j) {
			cols[pu + j - 1].push_back(resid[t - j]);
		}
	}
	auto reg = ols(y, cols);
	ForecastModel m;
	m.kind = Kind::ARMA;
	m.p = p;
	m.q = q;
	m.phi.assign(reg.coef.begin(), reg.coef.begin() + p);
	m.theta.assign(reg.coef.begin() + p, reg.coef.end());
	m.intercept = reg.intercept;
	m.window = n;
	return m;
}

std::vector<double> difference(std::span<const double> series, int d) {
	if (d < 0) {
		throw std::invalid_argument("differencing order must be >= 0");
	}
	std::vector<double> out(series.begin(), series.end());
	for (int k = 0; k < d; ++k) {
		if (out.empty()) {
			break;
		}
		for (std::size_t i = 0; i + 1 < out.size(); ++i) {
			out[i] = out[i + 1] - out[i];
		}
		out.pop_back();
	}
	return out;
}

ForecastModel fit_arima(std::span<const double> series, int p, int d, int q) {
	if (d < 0) {
		throw std::invalid_argument("differencing order d must be >= 0");
	}
	if (series.size() < 10 * static_cast<std::size_t>(std::max(p + q, 0)) + static_cast<std::size_t>(d)) {
		throw std::invalid_argument("series too short for ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," +
		                            std::to_string(q) + ")");
	}
	const auto diffed = difference(series, d);
	ForecastModel m = q == 0 ? fit_ar(diffed, p) : fit_arma(diffed, p, q);
	m.kind = Kind::ARIMA;
	m.d = d;
	m.window = series.size();
	return m;
}

namespace {

double binomial(int n, int k) {
	double r = 1.0;
	for (int i = 1; i <= k; ++i) {
		r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
	}
	return r;
}

} // namespace

OneStep predict_one_step(const ForecastModel &model, std::span<const double> series) {
	if (static_cast<int>(model.phi.size()) != model.p || static_cast<int>(model.theta.size()) != model.q) {
		throw std::invalid_argument("model coefficient counts do not match its orders");
	}
	const auto d = static_cast<std::size_t>(model.d);
	const auto p = static_cast<std::size_t>(model.p);
	const auto q = static_cast<std::size_t>(model.q);
	const auto w = difference(series, model.d);
	OneStep out;
	out.first = p + d;
	if (series.size() < d || w.size() < p) {
		return out;
	}
	// Integration weights: x_s = w_{s-d} + sum_k c_k x_{s-k}.
	std::vector<double> integ(d);
	for (std::size_t k = 1; k <= d; ++k) {
		integ[k - 1] = ((k % 2) ? 1.0 : -1.0) * binomial(model.d, static_cast<int>(k));
	}
	std::vector<double> resid(w.size(), 0.0);
	for (std::size_t t = p; t <= w.size(); ++t) {
		double pred = model.intercept;
		for (std::size_t i = 0; i < p; ++i) {
			pred += model.phi[i] * w[t - 1 - i];
		}
		for (std::size_t j = 0; j < q; ++j) {
			if (t >= j + 1) {
				pred += model.theta[j] * resid[t - 1 - j];
			}
		}
		if (t < w.size()) {
			resid[t] = w[t] - pred;
		}
		const std::size_t s = t + d;
		double x_hat = pred;
		for (std::size_t k = 1; k <= d; ++k) {
			x_hat += integ[k - 1] * series[s - k];
		}
		out.values.push_back(x_hat);
	}
	return out;
}

double forecast_next(const ForecastModel &model, std::span<const double> series) {
	auto os = predict_one_step(model, series);
	if (os.values.empty()) {
		throw std::invalid_argument("series too short to forecast");
	}
	return os.values.back();
}

Metrics evaluate(std::span<const double> predictions, std::span<const double> actuals) {
	if (predictions.size() != actuals.size()) {
		throw std::invalid_argument("evaluate: length mismatch");
	}
	if (actuals.empty()) {
		throw std::invalid_argument("evaluate: need at least one point");
	}
	const double n = static_cast<double>(actuals.size());
	double mean = 0.0;
	for (double a : actuals) {
		mean += a;
	}
	mean /= n;
	double sse = 0.0, sst = 0.0;
	for (std::size_t i = 0; i < actuals.size(); ++i) {
		const double e = predictions[i] - actuals[i];
		sse += e * e;
		sst += (actuals[i] - mean) * (actuals[i] - mean);
	}
	Metrics m;
	m.rmse = std::sqrt(sse / n);
	if (sst > 0.0) {
		m.r2 = 1.0 - sse / sst;
	}
	return m;
}

namespace {

struct Config {
	Kind kind;
	int p;
	int d;
	int q;
	std::size_t window;
};

std::vector<std::size_t> window_grid(std::size_t n_min, std::size_t train) {
	std::vector<std::size_t> out;
	if (n_min > train) {
		return out;
	}
	std::size_t n = n_min;
	while (n < train) {
		out.push_back(n);
		const auto next = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 1.5));
		n = std::max(next, n + 1);
	}
	out.push_back(train);
	return out;
}

} // namespace

ForecastReport grid_search(std::span<const double> raw, const GridOptions &opt) {
	if (raw.size() < 50) {
		throw std::invalid_argument("grid_search needs a series of length >= 50");
	}
	if (opt.p_min < 1 || opt.p_max < opt.p_min) {
		throw std::invalid_argument("invalid p range");
	}
	if (!(opt.holdout_fraction > 0.0 && opt.holdout_fraction < 1.0)) {
		throw std::invalid_argument("holdout_fraction must lie in (0, 1)");
	}
	std::vector<double> series(raw.begin(), raw.end());
	if (opt.log1p) {
		for (auto &v : series) {
			if (v <= -1.0) {
				throw std::invalid_argument("log1p transform needs values > -1");
			}
			v = std::log1p(v);
		}
	}
	const std::size_t n = series.size();
	const auto train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - opt.holdout_fraction)));
	std::vector<double> actuals(raw.begin() + static_cast<std::ptrdiff_t>(train), raw.end());

	std::vector<Config> configs;
	for (Kind kind : opt.kinds) {
		for (int p = opt.p_min; p <= opt.p_max; ++p) {
			const std::vector<int> qs = kind == Kind::AR ? std::vector<int>{0} : std::vector<int>{0, 1, 2};
			const std::vector<int> ds = kind == Kind::ARIMA ? std::vector<int>{0, 1} : std::vector<int>{0};
			for (int q : qs) {
				for (int d : ds) {
					const auto n_min = static_cast<std::size_t>(10 * (p + q) + d);
					for (auto w : window_grid(n_min, train)) {
						configs.push_back({kind, p, d, q, w});
					}
				}
			}
		}
	}

	std::vector<ForecastReport> scored;
	std::vector<std::string> failures;
	for (const auto &cfg : configs) {
		try {
			std::span<const double> fit_span(series.data() + (train - cfg.window), cfg.window);
			ForecastModel model;
			switch (cfg.kind) {
			case Kind::AR:
				model = fit_ar(fit_span, cfg.p);
				break;
			case Kind::ARMA:
				model = fit_arma(fit_span, cfg.p, cfg.q);
				break;
			case Kind::ARIMA:
				model = fit_arima(fit_span, cfg.p, cfg.d, cfg.q);
				break;
			}
			std::span<const double> roll(series.data() + (train - cfg.window), n - (train - cfg.window));
			auto os = predict_one_step(model, roll);
			// Predictions for absolute indices train .. n-1.
			std::vector<double> preds;
			preds.reserve(n - train);
			for (std::size_t abs = train; abs < n; ++abs) {
				const std::size_t rel = abs - (train - cfg.window);
				preds.push_back(os.values.at(rel - os.first));
			}
			if (opt.log1p) {
				for (auto &v : preds) {
					v = std::expm1(v);
				}
			}
			for (double v : preds) {
				if (!std::isfinite(v)) {
					throw Error("non-finite forecast");
				}
			}
			auto metrics = evaluate(preds, actuals);
			ForecastReport rep;
			rep.model = std::move(model);
			rep.rmse = metrics.rmse;
			rep.r2 = metrics.r2;
			rep.validation_start = train;
			rep.predictions = std::move(preds);
			scored.push_back(std::move(rep));
		} catch (const std::exception &e) {
			failures.push_back(to_string(cfg.kind) + "(p=" + std::to_string(cfg.p) + ",d=" + std::to_string(cfg.d) +
			                   ",q=" + std::to_string(cfg.q) + ",N=" + std::to_string(cfg.window) + "): " + e.what());
		}
	}
	if (scored.empty()) {
		std::string msg = "every grid configuration failed";
		if (failures.empty()) {
			msg += " (no configuration fits in a training prefix of " + std::to_string(train) + " points)";
		}
		for (std::size_t i = 0; i < failures.size() && i < 10; ++i) {
			msg += "\n  " + failures[i];
		}
		throw Error(msg);
	}

	// Scores are mean squared errors (lower is better). R² is an affine
	// function of MSE over a fixed validation suffix, so ranking by MSE among
	// defined-R² configurations is ranking by R².
	const bool any_defined = std::any_of(scored.begin(), scored.end(), [](const auto &r) { return r.r2.has_value(); });
	auto eligible = [&](const ForecastReport &r) { return !any_defined || r.r2.has_value(); };
	const ForecastReport *top = nullptr;
	for (const auto &r : scored) {
		if (eligible(r) && (!top || r.rmse < top->rmse)) {
			top = &r;
		}
	}
	double slack = 0.0;
	if (opt.selection == Selection::one_standard_error) {
		const double m = static_cast<double>(actuals.size());
		double mean_sq = 0.0;
		for (std::size_t i = 0; i < actuals.size(); ++i) {
			const double e = top->predictions[i] - actuals[i];
			mean_sq += e * e / m;
		}
		double var = 0.0;
		for (std::size_t i = 0; i < actuals.size(); ++i) {
			const double e = top->predictions[i] - actuals[i];
			var += (e * e - mean_sq) * (e * e - mean_sq);
		}
		slack = actuals.size() > 1 ? std::sqrt(var / (m - 1.0) / m) : 0.0;
	}
	const double threshold = top->rmse * top->rmse + slack;
	auto key = [](const ForecastReport &r) {
		return std::make_tuple(r.model.p + r.model.q, r.model.d, r.model.window, static_cast<int>(r.model.kind));
	};
	const ForecastReport *best = nullptr;
	for (const auto &r : scored) {
		const bool tied = opt.selection == Selection::exact ? r.rmse == top->rmse : r.rmse * r.rmse <= threshold;
		if (eligible(r) && tied && (!best || key(r) < key(*best))) {
			best = &r;
		}
	}
	ForecastReport result = *best;
	result.actuals = std::move(actuals);
	result.configurations_tried = configs.size();
	return result;
}

std::string report_to_json(const ForecastReport &r) {
	nlohmann::ordered_json j;
	j["country"] = r.country;
	j["kind"] = to_string(r.model.kind);
	j["p"] = r.model.p;
	j["d"] = r.model.d;
	j["q"] = r.model.q;
	j["window"] = r.model.window;
	j["phi"] = r.model.phi;
	j["theta"] = r.model.theta;
	j["intercept"] = r.model.intercept;
	j["rmse"] = r.rmse;
	j["r2"] = r.r2 ? nlohmann::ordered_json(*r.r2) : nlohmann::ordered_json(nullptr);
	j["predictions"] = r.predictions;
	j["actuals"] = r.actuals;
	j["validation_start"] = r.validation_start;
	j["configurations_tried"] = r.configurations_tried;
	return j.dump(2) + "\n";
}

std::string predictions_csv(const ForecastReport &r) {
	std::string out = "index,actual,predicted\n";
	for (std::size_t i = 0; i < r.predictions.size(); ++i) {
		out += std::to_string(r.validation_start + i) + ',' + csv::format_number(r.actuals[i]) + ',' +
		       csv::format_number(r.predictions[i]) + '\n';
	}
	return out;
}

} // namespace threatgeo::forecast
