#pragma once

#include "threatgeo/date.hpp"
#include "threatgeo/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace threatgeo::synth {

/// How an incident's target set is drawn once its seed country is chosen.
enum class TargetMode {
	/// Set size ~ Geometric(1/2) capped at 5; one Markov step from the most
	/// recently added country per extra member; duplicates collapse.
	walk,
	/// One Markov step i -> j. j == i yields a single-target incident; j != i
	/// yields {i, j}, accepted with probability 1/2 (otherwise the incident is
	/// redrawn). For reversible P* the co-targeting estimator is unbiased.
	pairwise,
};

struct SynthSpec {
	std::vector<std::string> countries;
	std::vector<std::vector<double>> p_star; // row-stochastic
	std::size_t incidents = 1000;
	DateRange dates{Date{std::chrono::year{2020} / 1 / 1}, Date{std::chrono::year{2020} / 12 / 31}};
	std::optional<std::array<double, 12>> seasonal_profile;
	/// AR(1) coefficient of the log daily intensity.
	std::optional<double> ar_phi;
	std::uint64_t seed = 42;
	/// Attached round-robin as the malware family of each incident.
	std::vector<std::string> labels;
	TargetMode mode = TargetMode::walk;
};

/// Validates the spec; throws std::invalid_argument on a non-stochastic P*.
void validate(const SynthSpec &spec);

/// Stationary distribution by power iteration on the lazy chain (P + I) / 2
/// until successive iterates differ by < 1e-12 in max norm.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>> &p);

/// Deterministic in the spec. Incident i draws from rng::substream(seed, i);
/// the intensity process draws from substream(seed, 2^63 + k).
Corpus generate(const SynthSpec &spec);

SynthSpec spec_from_json(std::string_view text);
std::string spec_to_json(const SynthSpec &spec);

/// Random reversible chain: symmetric weights W (uniform in [0.2, 1.2],
/// diagonal scaled by `self_weight`) normalized by row sums.
std::vector<std::vector<double>> random_reversible_chain(std::size_t n, std::uint64_t seed, double self_weight = 1.0);
/// Random row-stochastic matrix with uniform(0,1] entries normalized per row.
std::vector<std::vector<double>> random_stochastic_matrix(std::size_t n, std::uint64_t seed);

/// x_t = intercept + sum phi_i x_{t-i} + e_t + sum theta_j e_{t-j}, e ~ N(0, sigma^2),
/// after a burn-in of 500 discarded steps.
std::vector<double> arma_series(const std::vector<double> &phi, const std::vector<double> &theta, double intercept,
                                double sigma, std::size_t n, std::uint64_t seed);

std::vector<double> white_noise(std::size_t n, double sigma, std::uint64_t seed);

} // namespace threatgeo::synth
