#include "threatgeo/linalg.hpp"

#include "threatgeo/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace threatgeo::linalg {

Matrix Matrix::identity(std::size_t n) {
	Matrix m(n, n);
	for (std::size_t i = 0; i < n; ++i) {
		m(i, i) = 1.0;
	}
	return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>> &rows) {
	const std::size_t r = rows.size();
	const std::size_t c = r ? rows.front().size() : 0;
	Matrix m(r, c);
	for (std::size_t i = 0; i < r; ++i) {
		if (rows[i].size() != c) {
			throw std::invalid_argument("ragged matrix rows");
		}
		std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * c));
	}
	return m;
}

bool Matrix::is_symmetric(double tol) const {
	if (rows_ != cols_) {
		return false;
	}
	for (std::size_t i = 0; i < rows_; ++i) {
		for (std::size_t j = i + 1; j < cols_; ++j) {
			if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) {
				return false;
			}
		}
	}
	return true;
}

Matrix Matrix::transpose() const {
	Matrix t(cols_, rows_);
	for (std::size_t i = 0; i < rows_; ++i) {
		for (std::size_t j = 0; j < cols_; ++j) {
			t(j, i) = (*this)(i, j);
		}
	}
	return t;
}

Matrix operator*(const Matrix &a, const Matrix &b) {
	if (a.cols() != b.rows()) {
		throw std::invalid_argument("matrix dimension mismatch");
	}
	Matrix c(a.rows(), b.cols());
	for (std::size_t i = 0; i < a.rows(); ++i) {
		for (std::size_t k = 0; k < a.cols(); ++k) {
			const double aik = a(i, k);
			for (std::size_t j = 0; j < b.cols(); ++j) {
				c(i, j) += aik * b(k, j);
			}
		}
	}
	return c;
}

namespace {

double off_norm(const Matrix &a) {
	double s = 0.0;
	for (std::size_t i = 0; i < a.rows(); ++i) {
		for (std::size_t j = 0; j < a.cols(); ++j) {
			if (i != j) {
				s += a(i, j) * a(i, j);
			}
		}
	}
	return std::sqrt(s);
}

} // namespace

SymmetricEigen jacobi_eigen(const Matrix &input, double tolerance, int max_sweeps) {
	if (!input.is_symmetric(1e-12)) {
		throw std::invalid_argument("jacobi_eigen requires a symmetric matrix");
	}
	const std::size_t n = input.rows();
	Matrix a = input;
	Matrix v = Matrix::identity(n);
	SymmetricEigen out;
	double off = off_norm(a);
	int sweep = 0;
	while (off >= tolerance) {
		if (sweep == max_sweeps) {
			throw ConvergenceError("Jacobi eigensolver did not converge after " + std::to_string(max_sweeps) +
			                           " sweeps (off-diagonal norm " + std::to_string(off) + ")",
			                       off);
		}
		++sweep;
		for (std::size_t p = 0; p + 1 < n; ++p) {
			for (std::size_t q = p + 1; q < n; ++q) {
				const double apq = a(p, q);
				if (apq == 0.0) {
					continue;
				}
				// Rotation angle annihilating a(p, q); t = tan(theta), smaller root.
				const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
				const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
				const double c = 1.0 / std::sqrt(t * t + 1.0);
				const double s = t * c;
				for (std::size_t k = 0; k < n; ++k) {
					const double akp = a(k, p);
					const double akq = a(k, q);
					a(k, p) = c * akp - s * akq;
					a(k, q) = s * akp + c * akq;
				}
				for (std::size_t k = 0; k < n; ++k) {
					const double apk = a(p, k);
					const double aqk = a(q, k);
					a(p, k) = c * apk - s * aqk;
					a(q, k) = s * apk + c * aqk;
				}
				a(p, q) = 0.0;
				a(q, p) = 0.0;
				for (std::size_t k = 0; k < n; ++k) {
					const double vkp = v(k, p);
					const double vkq = v(k, q);
					v(k, p) = c * vkp - s * vkq;
					v(k, q) = s * vkp + c * vkq;
				}
			}
		}
		off = off_norm(a);
	}

	std::vector<std::size_t> order(n);
	std::iota(order.begin(), order.end(), std::size_t{0});
	std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
	out.values.resize(n);
	out.vectors = Matrix(n, n);
	for (std::size_t k = 0; k < n; ++k) {
		out.values[k] = a(order[k], order[k]);
		for (std::size_t r = 0; r < n; ++r) {
			out.vectors(r, k) = v(r, order[k]);
		}
	}
	out.sweeps = sweep;
	out.off_diagonal_norm = off;
	return out;
}

std::vector<double> solve_spd(Matrix a, std::vector<double> b) {
	const std::size_t n = a.rows();
	if (a.cols() != n || b.size() != n) {
		throw std::invalid_argument("solve_spd dimension mismatch");
	}
	// In-place lower Cholesky factor.
	for (std::size_t j = 0; j < n; ++j) {
		double d = a(j, j);
		for (std::size_t k = 0; k < j; ++k) {
			d -= a(j, k) * a(j, k);
		}
		if (!(d > 0.0) || !std::isfinite(d)) {
			throw std::domain_error("matrix is not positive definite");
		}
		const double ljj = std::sqrt(d);
		a(j, j) = ljj;
		for (std::size_t i = j + 1; i < n; ++i) {
			double s = a(i, j);
			for (std::size_t k = 0; k < j; ++k) {
				s -= a(i, k) * a(j, k);
			}
			a(i, j) = s / ljj;
		}
	}
	for (std::size_t i = 0; i < n; ++i) {
		double s = b[i];
		for (std::size_t k = 0; k < i; ++k) {
			s -= a(i, k) * b[k];
		}
		b[i] = s / a(i, i);
	}
	for (std::size_t i = n; i-- > 0;) {
		double s = b[i];
		for (std::size_t k = i + 1; k < n; ++k) {
			s -= a(k, i) * b[k];
		}
		b[i] = s / a(i, i);
	}
	return b;
}

} // namespace threatgeo::linalg
