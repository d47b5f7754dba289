#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace threatgeo::forecast {

enum class Kind { AR, ARMA, ARIMA };

std::string to_string(Kind kind);
Kind kind_from_string(std::string_view name);

/// x_t = intercept + sum_i phi[i] x_{t-1-i} + e_t + sum_j theta[j] e_{t-1-j},
/// applied to the d-times differenced series.
struct ForecastModel {
	Kind kind = Kind::AR;
	int p = 1;
	int q = 0;
	int d = 0;
	std::vector<double> phi;
	std::vector<double> theta;
	double intercept = 0.0;
	/// Number of observations the model was fitted on.
	std::size_t window = 0;

	bool operator==(const ForecastModel &) const = default;
};

/// Ridge jitter added to the normal-equation diagonal.
inline constexpr double kRidge = 1e-8;

/// OLS of x_t on its p lags with an intercept (columns centered, so the
/// intercept is unpenalized). Requires |series| >= 10 p.
ForecastModel fit_ar(std::span<const double> series, int p);

/// Hannan-Rissanen: residuals of a long AR(min(20, n/10)) stand in for the
/// innovations in a second OLS on lags of x and of those residuals. q == 0
/// delegates to fit_ar.
ForecastModel fit_arma(std::span<const double> series, int p, int q);

/// Differences d times, then fits ARMA(p, q) (AR when q == 0).
ForecastModel fit_arima(std::span<const double> series, int p, int d, int q);

std::vector<double> difference(std::span<const double> series, int d);

/// One-step-ahead forecasts with fixed coefficients rolled over `series`.
/// `values[i]` predicts series[first + i]; the final value (index
/// series.size()) is the out-of-sample next step.
struct OneStep {
	std::size_t first = 0;
	std::vector<double> values;
};

OneStep predict_one_step(const ForecastModel &model, std::span<const double> series);

/// Next value after the end of `series`.
double forecast_next(const ForecastModel &model, std::span<const double> series);

struct Metrics {
	double rmse = 0.0;
	std::optional<double> r2; // Undefined when the actuals have zero variance
};

Metrics evaluate(std::span<const double> predictions, std::span<const double> actuals);

struct ForecastReport {
	std::string country;
	ForecastModel model;
	double rmse = 0.0;
	std::optional<double> r2;
	std::size_t validation_start = 0;
	std::vector<double> predictions; // aligned to the held-out bins
	std::vector<double> actuals;
	std::size_t configurations_tried = 0;
};

enum class Selection {
	/// Only bit-identical scores tie.
	exact,
	/// Scores within one standard error of the best validation score tie.
	one_standard_error,
};

struct GridOptions {
	std::set<Kind> kinds{Kind::AR, Kind::ARMA, Kind::ARIMA};
	int p_min = 1;
	int p_max = 10;
	double holdout_fraction = 0.3;
	/// Fit on log1p(x) and map predictions back with expm1.
	bool log1p = false;
	/// How close a score must be to the best to count as a tie.
	Selection selection = Selection::one_standard_error;
};

/// Grid over kind, p, q in {0,1,2} (ARMA/ARIMA), d in {0,1} (ARIMA) and
/// training windows N = N_min, x1.5 (rounded) ... training length. Each
/// configuration is fitted on the trailing N points of the training prefix and
/// scored by one-step rolling forecasts over the held-out suffix. Highest R²
/// wins; ties go to fewer parameters (p+q), then smaller d, then smaller N.
/// Under Selection::one_standard_error a configuration ties with the best when
/// its R² is within the standard error of the best configuration's R²,
/// estimated from the spread of its squared validation errors.
ForecastReport grid_search(std::span<const double> series, const GridOptions &options = {});

std::string report_to_json(const ForecastReport &report);
/// "index,actual,predicted"
std::string predictions_csv(const ForecastReport &report);

} // namespace threatgeo::forecast
