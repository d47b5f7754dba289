#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace threatgeo::linalg {

/// Dense row-major matrix.
class Matrix {
public:
	Matrix() = default;
	Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

	static Matrix identity(std::size_t n);
	static Matrix from_rows(const std::vector<std::vector<double>> &rows);

	std::size_t rows() const noexcept {
		return rows_;
	}
	std::size_t cols() const noexcept {
		return cols_;
	}
	double &operator()(std::size_t r, std::size_t c) noexcept {
		return data_[r * cols_ + c];
	}
	double operator()(std::size_t r, std::size_t c) const noexcept {
		return data_[r * cols_ + c];
	}
	std::span<const double> row(std::size_t r) const noexcept {
		return {data_.data() + r * cols_, cols_};
	}

	bool is_symmetric(double tol = 0.0) const;
	Matrix transpose() const;

private:
	std::size_t rows_ = 0;
	std::size_t cols_ = 0;
	std::vector<double> data_;
};

Matrix operator*(const Matrix &a, const Matrix &b);

struct SymmetricEigen {
	std::vector<double> values; // ascending
	Matrix vectors;             // column k pairs with values[k]
	int sweeps = 0;
	double off_diagonal_norm = 0.0;
};

/// Cyclic Jacobi rotations for a real symmetric matrix. Iterates until the
/// Frobenius norm of the off-diagonal part drops below `tolerance`; throws
/// ConvergenceError (carrying that norm) after `max_sweeps` sweeps.
SymmetricEigen jacobi_eigen(const Matrix &a, double tolerance = 1e-10, int max_sweeps = 100);

/// Solves the symmetric positive-definite system A x = b by Cholesky
/// factorization. Throws std::domain_error if A is not positive definite.
std::vector<double> solve_spd(Matrix a, std::vector<double> b);

} // namespace threatgeo::linalg
