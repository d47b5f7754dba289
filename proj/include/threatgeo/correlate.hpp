#pragma once

#include "threatgeo/analytics.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace threatgeo::correlate {

/// Sample Pearson coefficient; std::nullopt ("Undefined") when either series
/// has zero variance. Throws on length mismatch or fewer than 2 points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of the pairs (x[t], y[t + lag]) over the overlapping window.
std::optional<double> correlation_at_lag(std::span<const double> x, std::span<const double> y, int lag);

struct LagResult {
	std::optional<double> r;
	int lag = 0;
};

/// Searches lags in [-max_lag, max_lag] for the largest |r|; ties prefer the
/// smaller |lag|, then the negative lag. A positive lag means y follows x.
LagResult lagged_correlation(std::span<const double> x, std::span<const double> y, int max_lag);

enum class Mode { pointwise, lagged, fixed_lag };

struct CorrelationMatrix {
	std::vector<std::string> countries;
	std::vector<std::vector<std::optional<double>>> r;
	std::optional<std::vector<std::vector<int>>> best_lag;
};

/// All-pairs matrix over the panel rows. Pointwise stores signed r at lag 0;
/// lagged stores |best r| and the best lag; fixed_lag stores r at `lag`
/// (and records that lag). Undefined entries stay std::nullopt.
CorrelationMatrix correlation_heatmap(const analytics::TimeSeriesPanel &panel, Mode mode, int lag = 7);

Mode mode_from_string(std::string_view name);

/// {"countries": [...], "r": [[...]], "best_lag": [[...]] | null}; Undefined as null.
std::string matrix_to_json(const CorrelationMatrix &m);
/// Square CSV with a header row and a leading country column; Undefined cells empty.
std::string matrix_to_csv(const CorrelationMatrix &m);

} // namespace threatgeo::correlate
