#pragma once

#include "threatgeo/cluster.hpp"
#include "threatgeo/model.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

namespace testing {

inline threatgeo::ThreatEvent event(std::string id, std::string date, std::vector<std::string> countries = {}) {
	threatgeo::ThreatEvent ev;
	ev.id = std::move(id);
	ev.created_at = threatgeo::parse_date(date);
	ev.countries = std::move(countries);
	return ev;
}

inline threatgeo::Corpus corpus_of_sets(const std::vector<std::vector<std::string>> &sets,
                                        const std::string &date = "2020-01-01") {
	std::vector<threatgeo::ThreatEvent> events;
	for (std::size_t i = 0; i < sets.size(); ++i) {
		events.push_back(event("e" + std::to_string(i), date, sets[i]));
	}
	return threatgeo::Corpus(std::move(events));
}

inline std::string fixture(const std::string &name) {
	return std::string(THREATGEO_FIXTURES) + "/" + name;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
	TempDir() {
		static std::atomic<int> counter{0};
		path_ = std::filesystem::temp_directory_path() /
		        ("threatgeo-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
		std::filesystem::remove_all(path_);
		std::filesystem::create_directories(path_);
	}
	~TempDir() {
		std::error_code ec;
		std::filesystem::remove_all(path_, ec);
	}
	TempDir(const TempDir &) = delete;
	TempDir &operator=(const TempDir &) = delete;
	const std::filesystem::path &path() const {
		return path_;
	}
	std::string operator/(const std::string &name) const {
		return (path_ / name).string();
	}

private:
	std::filesystem::path path_;
};


inline std::string random_text(std::mt19937_64 &rng, std::size_t max_len, bool list_item) {
	static const std::vector<std::string> pieces = {"a", "b", "Z", "0", " ", ",", "\"", "'", "\n", "\r\n", "\t",
	                                                "é", "中", "🙂", "&amp;", "\\", "{", "}", ";", "|"};
	std::uniform_int_distribution<std::size_t> len(list_item ? 1 : 0, max_len);
	std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
	std::string out;
	const std::size_t n = len(rng);
	for (std::size_t i = 0; i < n; ++i) {
		out += pieces[pick(rng)];
	}
	if (list_item) {
		std::erase(out, ';');
	}
	if (list_item && out.empty()) {
		out = "x";
	}
	return out;
}

inline std::vector<std::string> random_list(std::mt19937_64 &rng, std::size_t max_items) {
	std::uniform_int_distribution<std::size_t> count(0, max_items);
	std::vector<std::string> out(count(rng));
	for (auto &s : out) {
		s = random_text(rng, 8, true);
	}
	return out;
}

inline threatgeo::Corpus random_corpus(std::uint64_t seed, std::size_t max_events = 12) {
	std::mt19937_64 rng(seed);
	std::uniform_int_distribution<std::size_t> count(0, max_events);
	std::uniform_int_distribution<int> day(0, 365 * 30);
	std::bernoulli_distribution coin(0.5);
	std::vector<threatgeo::ThreatEvent> events(count(rng));
	for (std::size_t i = 0; i < events.size(); ++i) {
		auto &ev = events[i];
		ev.id = "id" + std::to_string(i) + random_text(rng, 4, true);
		ev.created_at = threatgeo::make_date(1990, 1, 1) + std::chrono::days(day(rng));
		ev.title = random_text(rng, 12, false);
		ev.description = random_text(rng, 24, false);
		ev.countries = random_list(rng, 3);
		ev.raw_country_strings = random_list(rng, 3);
		if (coin(rng)) {
			ev.adversary = random_text(rng, 6, true);
		}
		ev.malware_families = random_list(rng, 3);
		ev.industries = random_list(rng, 2);
		ev.technique_ids = random_list(rng, 3);
		ev.tags = random_list(rng, 3);
	}
	return threatgeo::Corpus(std::move(events), "random");
}


/// `groups` blocks of `size` nodes: within-block weight `within`, across `cross`,
/// each jittered by U(0.9, 1.1); node order shuffled by `seed`.
struct Planted {
	threatgeo::cluster::AffinityMatrix affinity;
	std::map<std::string, int> truth;
};

inline Planted planted_partition(int groups, int size, double within, double cross, std::uint64_t seed) {
	const int n = groups * size;
	std::mt19937_64 rng(seed);
	std::vector<int> order(static_cast<std::size_t>(n));
	for (int i = 0; i < n; ++i) {
		order[static_cast<std::size_t>(i)] = i;
	}
	std::shuffle(order.begin(), order.end(), rng);
	std::uniform_real_distribution<double> jitter(0.9, 1.1);
	Planted out;
	out.affinity.weights = threatgeo::linalg::Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
	for (int i = 0; i < n; ++i) {
		const int node = order[static_cast<std::size_t>(i)];
		char name[16];
		std::snprintf(name, sizeof name, "n%02d", node);
		out.affinity.countries.push_back(name);
		out.truth[name] = node / size;
	}
	for (int i = 0; i < n; ++i) {
		for (int j = i + 1; j < n; ++j) {
			const bool same = order[static_cast<std::size_t>(i)] / size == order[static_cast<std::size_t>(j)] / size;
			const double w = (same ? within : cross) * jitter(rng);
			out.affinity.weights(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = w;
			out.affinity.weights(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = w;
		}
	}
	return out;
}

/// Disjoint cliques with unit weights, named c<clique>_<member>.
inline Planted cliques(const std::vector<int> &sizes) {
	Planted out;
	int n = 0;
	for (int s : sizes) {
		n += s;
	}
	out.affinity.weights = threatgeo::linalg::Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
	std::size_t base = 0;
	for (std::size_t c = 0; c < sizes.size(); ++c) {
		for (int m = 0; m < sizes[c]; ++m) {
			const std::string name = "c" + std::to_string(c) + "_" + std::to_string(m);
			out.affinity.countries.push_back(name);
			out.truth[name] = static_cast<int>(c);
			for (int o = 0; o < sizes[c]; ++o) {
				if (o != m) {
					out.affinity.weights(base + static_cast<std::size_t>(m), base + static_cast<std::size_t>(o)) = 1.0;
				}
			}
		}
		base += static_cast<std::size_t>(sizes[c]);
	}
	return out;
}

/// Symmetric non-negative matrix with zero diagonal and roughly `density` nonzeros.
inline threatgeo::linalg::Matrix random_affinity(std::size_t n, double density, std::uint64_t seed) {
	std::mt19937_64 rng(seed);
	std::bernoulli_distribution edge(density);
	std::uniform_real_distribution<double> weight(0.1, 20.0);
	threatgeo::linalg::Matrix a(n, n);
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t j = i + 1; j < n; ++j) {
			if (edge(rng)) {
				a(i, j) = a(j, i) = weight(rng);
			}
		}
	}
	return a;
}

} // namespace testing
