#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cw {

// Dense vector of finite doubles. Non-empty.
class Vector {
public:
    explicit Vector(std::vector<double> values);
    Vector(std::initializer_list<double> values);
    static Vector zeros(std::size_t n);
    static Vector filled(std::size_t n, double value);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<const double> span() const noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const Vector&, const Vector&) = default;

private:
    std::vector<double> values_;
};

// Row-major dense matrix of finite doubles.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix zeros(std::size_t rows, std::size_t cols);
    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    double& at(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values_).subspan(i * cols_, cols_);
    }
    const std::vector<double>& values() const noexcept { return values_; }

    Matrix transpose() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

Vector matvec(const Matrix& m, const Vector& x);
Matrix matmul(const Matrix& a, const Matrix& b);

// Gauss-Jordan elimination with partial pivoting. Throws
// SingularMatrixError when a pivot falls below kSingularPivot.
Matrix invert(const Matrix& m);

// (m^T m)^-1 m^T for matrices of full column rank.
Matrix pinv_full_rank(const Matrix& m);

inline constexpr double kSingularPivot = 1e-12;

double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(const Vector& a, const Vector& b);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace cw
