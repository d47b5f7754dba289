#include "threatgeo/cluster.hpp"

#include "threatgeo/error.hpp"
#include "threatgeo/random.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace threatgeo::cluster {

using linalg::Matrix;

AffinityMatrix affinity_from_corpus(const Corpus &corpus, std::size_t min_events) {
	if (min_events < 1) {
		throw std::invalid_argument("min_events must be >= 1");
	}
	std::map<std::string, std::size_t> events_per_country;
	for (const auto &ev : corpus) {
		for (const auto &c : std::set<std::string>(ev.countries.begin(), ev.countries.end())) {
			++events_per_country[c];
		}
	}
	AffinityMatrix aff;
	for (const auto &[c, n] : events_per_country) {
		if (n >= min_events) {
			aff.countries.push_back(c);
		}
	}
	if (aff.countries.size() < 2) {
		throw TooFewNodesError("affinity needs at least 2 countries with >= " + std::to_string(min_events) +
		                       " events, found " + std::to_string(aff.countries.size()));
	}
	const std::size_t n = aff.countries.size();
	aff.weights = Matrix(n, n);
	auto pos = [&](const std::string &c) -> std::optional<std::size_t> {
		auto it = std::lower_bound(aff.countries.begin(), aff.countries.end(), c);
		if (it == aff.countries.end() || *it != c) {
			return std::nullopt;
		}
		return static_cast<std::size_t>(it - aff.countries.begin());
	};
	for (const auto &ev : corpus) {
		std::vector<std::size_t> idx;
		for (const auto &c : std::set<std::string>(ev.countries.begin(), ev.countries.end())) {
			if (auto i = pos(c)) {
				idx.push_back(*i);
			}
		}
		for (std::size_t a = 0; a < idx.size(); ++a) {
			for (std::size_t b = a + 1; b < idx.size(); ++b) {
				aff.weights(idx[a], idx[b]) += 1.0;
				aff.weights(idx[b], idx[a]) += 1.0;
			}
		}
	}
	return aff;
}

namespace {

constexpr double kIsolatedDegree = 1e-12;

std::vector<double> degrees(const Matrix &a) {
	std::vector<double> d(a.rows(), 0.0);
	for (std::size_t i = 0; i < a.rows(); ++i) {
		for (std::size_t j = 0; j < a.cols(); ++j) {
			d[i] += a(i, j);
		}
	}
	return d;
}

} // namespace

Matrix normalized_laplacian(const Matrix &a) {
	const std::size_t n = a.rows();
	auto d = degrees(a);
	std::vector<double> inv_sqrt(n);
	for (std::size_t i = 0; i < n; ++i) {
		inv_sqrt[i] = 1.0 / std::sqrt(d[i] > 0.0 ? d[i] : kIsolatedDegree);
	}
	Matrix l(n, n);
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t j = 0; j < n; ++j) {
			l(i, j) = (i == j ? 1.0 : 0.0) - inv_sqrt[i] * a(i, j) * inv_sqrt[j];
		}
	}
	// Exact symmetry for the eigensolver.
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t j = i + 1; j < n; ++j) {
			const double m = 0.5 * (l(i, j) + l(j, i));
			l(i, j) = m;
			l(j, i) = m;
		}
	}
	return l;
}

int eigengap_k(const std::vector<double> &ev, int max_k) {
	const int n = static_cast<int>(ev.size());
	const int upper = std::min(max_k, n - 1);
	if (upper < 2) {
		return 1;
	}
	int best_k = 2;
	double best_gap = -std::numeric_limits<double>::infinity();
	for (int k = 2; k <= upper; ++k) {
		const double gap = ev[static_cast<std::size_t>(k)] - ev[static_cast<std::size_t>(k - 1)];
		if (gap > best_gap) {
			best_gap = gap;
			best_k = k;
		}
	}
	return best_k;
}

namespace {

double sq_dist(const std::vector<double> &a, const std::vector<double> &b) {
	double s = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		const double d = a[i] - b[i];
		s += d * d;
	}
	return s;
}

KMeansResult kmeans_once(const std::vector<std::vector<double>> &pts, int k, std::mt19937_64 &gen, int max_iter) {
	const std::size_t n = pts.size();
	const std::size_t dim = pts.front().size();
	std::vector<std::vector<double>> centers;
	centers.push_back(pts[rng::uniform_index(gen, n)]);
	std::vector<double> d2(n);
	while (static_cast<int>(centers.size()) < k) {
		double total = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			double best = std::numeric_limits<double>::infinity();
			for (const auto &c : centers) {
				best = std::min(best, sq_dist(pts[i], c));
			}
			d2[i] = best;
			total += best;
		}
		std::size_t pick = n - 1;
		if (total > 0.0) {
			double target = rng::uniform01(gen) * total;
			for (std::size_t i = 0; i < n; ++i) {
				target -= d2[i];
				if (target < 0.0) {
					pick = i;
					break;
				}
			}
		} else {
			pick = rng::uniform_index(gen, n);
		}
		centers.push_back(pts[pick]);
	}

	std::vector<int> labels(n, -1);
	for (int iter = 0; iter < max_iter; ++iter) {
		bool changed = false;
		for (std::size_t i = 0; i < n; ++i) {
			int best = 0;
			double best_d = std::numeric_limits<double>::infinity();
			for (int c = 0; c < k; ++c) {
				const double d = sq_dist(pts[i], centers[static_cast<std::size_t>(c)]);
				if (d < best_d) {
					best_d = d;
					best = c;
				}
			}
			if (labels[i] != best) {
				labels[i] = best;
				changed = true;
			}
		}
		if (!changed) {
			break;
		}
		std::vector<std::vector<double>> sums(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
		std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
		for (std::size_t i = 0; i < n; ++i) {
			auto &s = sums[static_cast<std::size_t>(labels[i])];
			for (std::size_t j = 0; j < dim; ++j) {
				s[j] += pts[i][j];
			}
			++sizes[static_cast<std::size_t>(labels[i])];
		}
		for (int c = 0; c < k; ++c) {
			const auto cu = static_cast<std::size_t>(c);
			if (sizes[cu] == 0) {
				// Re-seed an empty cluster at the point farthest from its center.
				std::size_t far = 0;
				double far_d = -1.0;
				for (std::size_t i = 0; i < n; ++i) {
					const double d = sq_dist(pts[i], centers[static_cast<std::size_t>(labels[i])]);
					if (d > far_d) {
						far_d = d;
						far = i;
					}
				}
				centers[cu] = pts[far];
				continue;
			}
			for (std::size_t j = 0; j < dim; ++j) {
				centers[cu][j] = sums[cu][j] / static_cast<double>(sizes[cu]);
			}
		}
	}
	KMeansResult out{labels, 0.0};
	for (std::size_t i = 0; i < n; ++i) {
		out.inertia += sq_dist(pts[i], centers[static_cast<std::size_t>(labels[i])]);
	}
	return out;
}

} // namespace

KMeansResult kmeans(const std::vector<std::vector<double>> &points, int k, std::uint64_t seed, int restarts,
                    int max_iterations, unsigned threads) {
	if (points.empty() || k < 1 || static_cast<std::size_t>(k) > points.size() || restarts < 1) {
		throw std::invalid_argument("kmeans: need 1 <= k <= n and restarts >= 1");
	}
	std::vector<KMeansResult> results(static_cast<std::size_t>(restarts));
	auto run = [&](std::size_t first, std::size_t step) {
		for (std::size_t r = first; r < results.size(); r += step) {
			auto gen = rng::substream(seed, r);
			results[r] = kmeans_once(points, k, gen, max_iterations);
		}
	};
	const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(restarts)));
	if (workers == 1) {
		run(0, 1);
	} else {
		std::vector<std::thread> pool;
		for (unsigned w = 0; w < workers; ++w) {
			pool.emplace_back(run, w, workers);
		}
		for (auto &t : pool) {
			t.join();
		}
	}
	std::size_t best = 0;
	for (std::size_t r = 1; r < results.size(); ++r) {
		if (results[r].inertia < results[best].inertia) {
			best = r;
		}
	}
	return results[best];
}

ClusterAssignment spectral_cluster(const AffinityMatrix &aff, const SpectralOptions &opt) {
	const std::size_t n = aff.countries.size();
	if (n < 2) {
		throw TooFewNodesError();
	}
	if (opt.max_k < 2) {
		throw std::invalid_argument("max_k must be >= 2");
	}
	if (aff.weights.rows() != n || !aff.weights.is_symmetric(0.0)) {
		throw std::invalid_argument("affinity matrix must be square, symmetric and match the country list");
	}
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t j = 0; j < n; ++j) {
			if (aff.weights(i, j) < 0.0) {
				throw std::invalid_argument("affinity entries must be non-negative");
			}
		}
	}

	ClusterAssignment out;
	const auto full = linalg::jacobi_eigen(normalized_laplacian(aff.weights), opt.eigen_tolerance);
	out.eigenvalues = full.values;

	const auto deg = degrees(aff.weights);
	std::vector<std::size_t> core;
	std::vector<std::size_t> isolated;
	for (std::size_t i = 0; i < n; ++i) {
		(deg[i] > 0.0 ? core : isolated).push_back(i);
	}

	std::vector<int> labels(n, -1);
	int core_k = 0;
	if (!core.empty()) {
		const std::size_t m = core.size();
		Matrix sub(m, m);
		for (std::size_t a = 0; a < m; ++a) {
			for (std::size_t b = 0; b < m; ++b) {
				sub(a, b) = aff.weights(core[a], core[b]);
			}
		}
		const auto eig = isolated.empty() ? full : linalg::jacobi_eigen(normalized_laplacian(sub), opt.eigen_tolerance);
		if (opt.k) {
			if (*opt.k < 1 || static_cast<std::size_t>(*opt.k) > n) {
				throw std::invalid_argument("k must lie in [1, n]");
			}
			core_k = std::clamp(*opt.k - static_cast<int>(isolated.size()), 1, static_cast<int>(m));
		} else {
			core_k = eigengap_k(eig.values, opt.max_k);
		}
		// Embedding: rows of the first core_k eigenvectors, normalized to unit length.
		std::vector<std::vector<double>> pts(m, std::vector<double>(static_cast<std::size_t>(core_k)));
		for (std::size_t r = 0; r < m; ++r) {
			double norm = 0.0;
			for (int c = 0; c < core_k; ++c) {
				const double v = eig.vectors(r, static_cast<std::size_t>(c));
				pts[r][static_cast<std::size_t>(c)] = v;
				norm += v * v;
			}
			norm = std::sqrt(norm);
			if (norm > 0.0) {
				for (auto &v : pts[r]) {
					v /= norm;
				}
			}
		}
		auto km = kmeans(pts, core_k, opt.seed, opt.restarts, opt.max_iterations, opt.threads);
		for (std::size_t r = 0; r < m; ++r) {
			labels[core[r]] = km.labels[r];
		}
	}
	int next = core_k;
	for (auto i : isolated) {
		labels[i] = next++;
	}

	// Canonical ids: order of first appearance along the country list.
	std::map<int, int> remap;
	for (std::size_t i = 0; i < n; ++i) {
		remap.emplace(labels[i], static_cast<int>(remap.size()));
	}
	out.k = static_cast<int>(remap.size());
	for (std::size_t i = 0; i < n; ++i) {
		out.labels[aff.countries[i]] = remap.at(labels[i]);
	}
	return out;
}

double rand_index(const std::map<std::string, int> &a, const std::map<std::string, int> &b) {
	if (a.size() != b.size()) {
		throw std::invalid_argument("rand_index: labelings differ in size");
	}
	std::vector<std::pair<int, int>> pairs;
	for (const auto &[key, la] : a) {
		auto it = b.find(key);
		if (it == b.end()) {
			throw std::invalid_argument("rand_index: key '" + key + "' missing from second labeling");
		}
		pairs.emplace_back(la, it->second);
	}
	if (pairs.size() < 2) {
		return 1.0;
	}
	std::size_t agree = 0, total = 0;
	for (std::size_t i = 0; i < pairs.size(); ++i) {
		for (std::size_t j = i + 1; j < pairs.size(); ++j) {
			const bool same_a = pairs[i].first == pairs[j].first;
			const bool same_b = pairs[i].second == pairs[j].second;
			agree += same_a == same_b ? 1 : 0;
			++total;
		}
	}
	return static_cast<double>(agree) / static_cast<double>(total);
}

namespace {

std::vector<std::vector<std::string>> members_by_cluster(const ClusterAssignment &a) {
	std::vector<std::vector<std::string>> members(static_cast<std::size_t>(a.k));
	for (const auto &[country, id] : a.labels) {
		members.at(static_cast<std::size_t>(id)).push_back(country);
	}
	return members;
}

} // namespace

std::string report_json(const ClusterAssignment &a) {
	nlohmann::ordered_json j;
	j["k"] = a.k;
	j["clusters"] = nlohmann::ordered_json::array();
	auto members = members_by_cluster(a);
	for (std::size_t id = 0; id < members.size(); ++id) {
		j["clusters"].push_back({{"id", id}, {"members", members[id]}});
	}
	j["eigenvalues"] = a.eigenvalues;
	return j.dump(2) + "\n";
}

ClusterAssignment assignment_from_json(std::string_view text) {
	auto j = nlohmann::json::parse(text);
	ClusterAssignment a;
	a.k = j.at("k").get<int>();
	for (const auto &c : j.at("clusters")) {
		const int id = c.at("id").get<int>();
		for (const auto &m : c.at("members")) {
			a.labels[m.get<std::string>()] = id;
		}
	}
	a.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
	return a;
}

std::string report_text(const ClusterAssignment &a) {
	std::ostringstream out;
	out << "k = " << a.k << '\n';
	auto members = members_by_cluster(a);
	for (std::size_t id = 0; id < members.size(); ++id) {
		out << "cluster " << id << ":";
		for (std::size_t m = 0; m < members[id].size(); ++m) {
			out << (m ? ", " : " ") << members[id][m];
		}
		out << '\n';
	}
	return out.str();
}

std::string labels_csv(const ClusterAssignment &a) {
	std::string out = "country,cluster\n";
	for (const auto &[country, id] : a.labels) {
		const bool quote = country.find_first_of(",\"") != std::string::npos;
		out += (quote ? "\"" + country + "\"" : country) + "," + std::to_string(id) + "\n";
	}
	return out;
}

} // namespace threatgeo::cluster
