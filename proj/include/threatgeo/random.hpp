#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace threatgeo::rng {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
	x += 0x9E3779B97F4A7C15ULL;
	x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
	x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
	return x ^ (x >> 31);
}

/// Substream `index` of master seed `seed`: a std::mt19937_64 seeded with
/// splitmix64(splitmix64(seed) ^ index). The engine is fully specified by the
/// standard, so outputs are portable across toolchains.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
	return std::mt19937_64{splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL))};
}

/// Uniform double in [0, 1) with 53 bits of precision.
inline double uniform01(std::mt19937_64 &gen) {
	return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (library distributions are implementation-defined).
inline double standard_normal(std::mt19937_64 &gen) {
	double u1 = uniform01(gen);
	while (u1 <= 0.0) {
		u1 = uniform01(gen);
	}
	const double u2 = uniform01(gen);
	return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(std::mt19937_64 &gen, std::uint64_t n) {
	return static_cast<std::uint64_t>(uniform01(gen) * static_cast<double>(n)) % n;
}

} // namespace threatgeo::rng
