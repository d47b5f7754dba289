#pragma once

#include "threatgeo/linalg.hpp"
#include "threatgeo/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace threatgeo::cluster {

/// Symmetric, zero-diagonal, non-negative co-targeting weights.
struct AffinityMatrix {
	std::vector<std::string> countries;
	linalg::Matrix weights;
};

/// weights[i][j] = number of incidents targeting both i and j. Countries with
/// fewer than `min_events` incidents are excluded. Throws TooFewNodesError when
/// fewer than two countries remain.
AffinityMatrix affinity_from_corpus(const Corpus &corpus, std::size_t min_events = 1);

struct ClusterAssignment {
	int k = 0;
	std::map<std::string, int> labels;
	/// All n normalized-Laplacian eigenvalues, ascending.
	std::vector<double> eigenvalues;

	bool operator==(const ClusterAssignment &) const = default;
};

struct SpectralOptions {
	std::optional<int> k;
	int max_k = 12;
	std::uint64_t seed = 42;
	int restarts = 100;
	int max_iterations = 300;
	double eigen_tolerance = 1e-10;
	/// k-means restarts run on this many threads; results do not depend on it.
	unsigned threads = 1;
};

/// Normalized Laplacian L = I - D^-1/2 A D^-1/2 (degree epsilon for isolated nodes).
linalg::Matrix normalized_laplacian(const linalg::Matrix &affinity);

/// Largest gap lambda[k] - lambda[k-1] (1-based: lambda_{k+1} - lambda_k) over
/// k in [2, max_k]; ties resolve to the smallest k.
int eigengap_k(const std::vector<double> &ascending_eigenvalues, int max_k);

/// Normalized spectral clustering. Isolated countries (zero degree) become
/// singleton clusters after the remaining countries are clustered. Cluster ids
/// are numbered in order of first appearance along the country list.
ClusterAssignment spectral_cluster(const AffinityMatrix &affinity, const SpectralOptions &options = {});

struct KMeansResult {
	std::vector<int> labels;
	double inertia = 0.0;
};

/// Lloyd iterations with k-means++ seeding; the best of `restarts` runs
/// (restart r seeded by substream(seed, r)).
KMeansResult kmeans(const std::vector<std::vector<double>> &points, int k, std::uint64_t seed, int restarts,
                    int max_iterations, unsigned threads = 1);

/// Rand index between two labelings of the same keys.
double rand_index(const std::map<std::string, int> &a, const std::map<std::string, int> &b);

/// {"k": .., "clusters":[{"id":..,"members":[..]}], "eigenvalues":[..]}
std::string report_json(const ClusterAssignment &assignment);
ClusterAssignment assignment_from_json(std::string_view text);
std::string report_text(const ClusterAssignment &assignment);
/// "country,cluster" rows sorted by country.
std::string labels_csv(const ClusterAssignment &assignment);

} // namespace threatgeo::cluster
