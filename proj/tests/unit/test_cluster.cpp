#include "support.hpp"
#include "threatgeo/cluster.hpp"
#include "threatgeo/error.hpp"
#include "threatgeo/linalg.hpp"

#include <cmath>
#include <doctest.h>
#include <numbers>

using namespace threatgeo;
using namespace threatgeo::cluster;
using linalg::Matrix;

namespace {

void check_eigenpairs(const Matrix &a, const linalg::SymmetricEigen &eig) {
	const std::size_t n = a.rows();
	for (std::size_t k = 0; k < n; ++k) {
		if (k > 0) {
			CHECK(eig.values[k] >= eig.values[k - 1]);
		}
		for (std::size_t i = 0; i < n; ++i) {
			double av = 0.0;
			for (std::size_t j = 0; j < n; ++j) {
				av += a(i, j) * eig.vectors(j, k);
			}
			CHECK(av == doctest::Approx(eig.values[k] * eig.vectors(i, k)).epsilon(1e-8).scale(1.0));
		}
		for (std::size_t l = 0; l < n; ++l) {
			double dot = 0.0;
			for (std::size_t i = 0; i < n; ++i) {
				dot += eig.vectors(i, k) * eig.vectors(i, l);
			}
			CHECK(dot == doctest::Approx(k == l ? 1.0 : 0.0).scale(1.0).epsilon(1e-9));
		}
	}
}

int zero_multiplicity(const std::vector<double> &values) {
	int m = 0;
	for (double v : values) {
		m += std::abs(v) < 1e-9 ? 1 : 0;
	}
	return m;
}

} // namespace

TEST_CASE("jacobi on small matrices") {
	auto a = Matrix::from_rows({{2, 1}, {1, 2}});
	auto eig = linalg::jacobi_eigen(a);
	CHECK(eig.values[0] == doctest::Approx(1.0));
	CHECK(eig.values[1] == doctest::Approx(3.0));
	check_eigenpairs(a, eig);

	auto diag = linalg::jacobi_eigen(Matrix::from_rows({{3, 0, 0}, {0, -1, 0}, {0, 0, 2}}));
	CHECK(diag.values == std::vector<double>{-1, 2, 3});
	CHECK(diag.sweeps == 0);

	auto random = testing::random_affinity(12, 0.6, 5);
	check_eigenpairs(random, linalg::jacobi_eigen(random));
	CHECK_THROWS(linalg::jacobi_eigen(Matrix::from_rows({{1, 2}, {0, 1}})));
}

TEST_CASE("jacobi reports non-convergence with the residual") {
	auto a = testing::random_affinity(10, 1.0, 3);
	try {
		linalg::jacobi_eigen(a, 1e-10, 1);
		FAIL("expected ConvergenceError");
	} catch (const ConvergenceError &e) {
		CHECK(e.residual() > 1e-10);
	}
}

TEST_CASE("cycle graph spectrum matches the closed form") {
	// The normalized Laplacian of the n-cycle has eigenvalues 1 - cos(2 pi k / n).
	const std::size_t n = 9;
	Matrix a(n, n);
	for (std::size_t i = 0; i < n; ++i) {
		a(i, (i + 1) % n) = a((i + 1) % n, i) = 1.0;
	}
	auto values = linalg::jacobi_eigen(normalized_laplacian(a)).values;
	std::vector<double> expected;
	for (std::size_t k = 0; k < n; ++k) {
		expected.push_back(1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)));
	}
	std::sort(expected.begin(), expected.end());
	for (std::size_t k = 0; k < n; ++k) {
		CHECK(values[k] == doctest::Approx(expected[k]).epsilon(1e-10).scale(1.0));
	}
}

TEST_CASE("spd solve") {
	auto x = linalg::solve_spd(Matrix::from_rows({{4, 2}, {2, 3}}), {2, 1});
	CHECK(x[0] == doctest::Approx(0.5));
	CHECK(x[1] == doctest::Approx(0.0).scale(1.0));
	CHECK_THROWS_AS(linalg::solve_spd(Matrix::from_rows({{1, 2}, {2, 1}}), {1, 1}), std::domain_error);
}

TEST_CASE("laplacian spectrum lies in [0, 2] with a zero eigenvalue") {
	for (std::uint64_t seed = 0; seed < 20; ++seed) {
		const std::size_t n = 2 + seed % 20;
		auto a = testing::random_affinity(n, 0.3 + 0.03 * static_cast<double>(seed % 10), seed);
		auto values = linalg::jacobi_eigen(normalized_laplacian(a)).values;
		CHECK(values.front() >= -1e-9);
		CHECK(values.front() <= 1e-9);
		CHECK(values.back() <= 2.0 + 1e-9);
	}
}

TEST_CASE("zero multiplicity counts connected components") {
	for (const auto &sizes : std::vector<std::vector<int>>{{5}, {3, 3}, {2, 4, 3}}) {
		auto p = testing::cliques(sizes);
		auto values = linalg::jacobi_eigen(normalized_laplacian(p.affinity.weights)).values;
		CHECK(zero_multiplicity(values) == static_cast<int>(sizes.size()));
	}
}

TEST_CASE("eigengap") {
	CHECK(eigengap_k({0, 0, 0.9, 1.0, 1.1}, 4) == 2);
	CHECK(eigengap_k({0, 0, 0, 1.0, 1.1}, 4) == 3);
	CHECK(eigengap_k({0, 0.5, 1.0, 1.5, 2.0}, 4) == 2);
	CHECK(eigengap_k({0, 0.1, 0.2, 0.9, 1.0}, 12) == 3);
}

TEST_CASE("affinity from a corpus") {
	auto aff = affinity_from_corpus(testing::corpus_of_sets({{"A", "B"}, {"A", "B"}, {"B", "C"}}));
	REQUIRE(aff.countries == std::vector<std::string>{"A", "B", "C"});
	CHECK(aff.weights(0, 1) == 2);
	CHECK(aff.weights(1, 2) == 1);
	CHECK(aff.weights(0, 2) == 0);
	CHECK(aff.weights.is_symmetric());
	for (std::size_t i = 0; i < 3; ++i) {
		CHECK(aff.weights(i, i) == 0);
	}
	auto singles = affinity_from_corpus(testing::corpus_of_sets({{"A"}, {"B"}}));
	CHECK(singles.countries.size() == 2);
	CHECK_THROWS_AS(affinity_from_corpus(testing::corpus_of_sets({{"A"}, {"A"}})), TooFewNodesError);
	CHECK_THROWS_AS(affinity_from_corpus(testing::corpus_of_sets({{"A", "B"}, {"A", "C"}}), 2), TooFewNodesError);
	CHECK(affinity_from_corpus(testing::corpus_of_sets({{"A", "B"}, {"A", "B"}, {"C", "A"}}), 2).countries.size() == 2);
}

TEST_CASE("disconnected components are recovered exactly") {
	for (const auto &sizes : std::vector<std::vector<int>>{{3, 3}, {2, 2, 2}}) {
		auto p = testing::cliques(sizes);
		auto result = spectral_cluster(p.affinity);
		CHECK(result.k == static_cast<int>(sizes.size()));
		CHECK(rand_index(result.labels, p.truth) == 1.0);
		CHECK(result.eigenvalues.size() == p.affinity.countries.size());
	}
}

TEST_CASE("planted partition") {
	auto p = testing::planted_partition(3, 5, 10.0, 1.0, 42);
	auto result = spectral_cluster(p.affinity);
	CHECK(result.k == 3);
	CHECK(rand_index(result.labels, p.truth) == 1.0);

	SUBCASE("invariant under node order") {
		auto q = p;
		std::vector<std::size_t> perm(q.affinity.countries.size());
		for (std::size_t i = 0; i < perm.size(); ++i) {
			perm[i] = perm.size() - 1 - i;
		}
		AffinityMatrix shuffled{{}, Matrix(perm.size(), perm.size())};
		for (std::size_t i = 0; i < perm.size(); ++i) {
			shuffled.countries.push_back(p.affinity.countries[perm[i]]);
			for (std::size_t j = 0; j < perm.size(); ++j) {
				shuffled.weights(i, j) = p.affinity.weights(perm[i], perm[j]);
			}
		}
		CHECK(rand_index(spectral_cluster(shuffled).labels, p.truth) == 1.0);
	}
	SUBCASE("deterministic for a seed and across thread counts") {
		SpectralOptions four;
		four.threads = 4;
		CHECK(spectral_cluster(p.affinity) == result);
		CHECK(spectral_cluster(p.affinity, four) == result);
	}
}

TEST_CASE("isolated nodes become singletons") {
	auto p = testing::cliques({3, 3, 1});
	auto result = spectral_cluster(p.affinity);
	CHECK(result.k == 3);
	CHECK(rand_index(result.labels, p.truth) == 1.0);
	for (double v : result.eigenvalues) {
		CHECK(v >= -1e-9);
		CHECK(v <= 2 + 1e-9);
	}
}

TEST_CASE("fixed k and validation") {
	auto p = testing::cliques({3, 3});
	SpectralOptions opts;
	opts.k = 6;
	auto singletons = spectral_cluster(p.affinity, opts);
	CHECK(singletons.k == 6);
	std::set<int> ids;
	for (const auto &[c, l] : singletons.labels) {
		ids.insert(l);
	}
	CHECK(ids.size() == 6);

	AffinityMatrix bad{{"a", "b"}, Matrix::from_rows({{0, 1}, {2, 0}})};
	CHECK_THROWS(spectral_cluster(bad));
	SpectralOptions small;
	small.max_k = 1;
	CHECK_THROWS(spectral_cluster(p.affinity, small));
}

TEST_CASE("reports") {
	auto p = testing::cliques({3, 3});
	auto result = spectral_cluster(p.affinity);
	CHECK(report_text(result) == "k = 2\ncluster 0: c0_0, c0_1, c0_2\ncluster 1: c1_0, c1_1, c1_2\n");
	CHECK(assignment_from_json(report_json(result)) == result);
	CHECK(labels_csv(result).rfind("country,cluster\nc0_0,0\n", 0) == 0);
	CHECK(rand_index({{"a", 0}, {"b", 0}, {"c", 1}}, {{"a", 5}, {"b", 5}, {"c", 2}}) == 1.0);
	CHECK(rand_index({{"a", 0}, {"b", 0}, {"c", 1}}, {{"a", 0}, {"b", 1}, {"c", 1}}) == doctest::Approx(1.0 / 3.0));
}
