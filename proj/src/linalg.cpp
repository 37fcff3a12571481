#include "crosswise/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crosswise/errors.hpp"

namespace cw {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw NonFiniteError(std::string(what) + ": non-finite entry");
    }
}

[[noreturn]] void shape_error(const char* op, std::size_t lhs, std::size_t rhs) {
    std::ostringstream msg;
    msg << op << ": dimension mismatch (" << lhs << " vs " << rhs << ")";
    throw ShapeError(msg.str());
}

}  // namespace

Vector::Vector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ShapeError("Vector: length must be positive");
    require_finite(values_, "Vector");
}

Vector::Vector(std::initializer_list<double> values) : Vector(std::vector<double>(values)) {}

Vector Vector::zeros(std::size_t n) { return Vector(std::vector<double>(n, 0.0)); }

Vector Vector::filled(std::size_t n, double value) { return Vector(std::vector<double>(n, value)); }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ == 0 || cols_ == 0) throw ShapeError("Matrix: dimensions must be positive");
    if (values_.size() != rows_ * cols_) shape_error("Matrix", values_.size(), rows_ * cols_);
    require_finite(values_, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    if (rows_ == 0 || cols_ == 0) throw ShapeError("Matrix: dimensions must be positive");
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) shape_error("Matrix: ragged rows", r.size(), cols_);
        values_.insert(values_.end(), r.begin(), r.end());
    }
    require_finite(values_, "Matrix");
}

Matrix Matrix::zeros(std::size_t rows, std::size_t cols) {
    return Matrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t = zeros(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = (*this)(i, j);
    return t;
}

Vector matvec(const Matrix& m, const Vector& x) {
    if (m.cols() != x.size()) shape_error("matvec", m.cols(), x.size());
    std::vector<double> y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) y[i] = dot(m.row(i), x.span());
    return Vector(std::move(y));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) shape_error("matmul", a.cols(), b.rows());
    std::vector<double> out(a.rows() * b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out[i * b.cols() + j] += aik * b(k, j);
        }
    }
    return Matrix(a.rows(), b.cols(), std::move(out));
}

Matrix invert(const Matrix& m) {
    if (m.rows() != m.cols()) shape_error("invert: matrix not square", m.rows(), m.cols());
    const std::size_t n = m.rows();
    // Augmented [A | I], reduced in place.
    std::vector<double> a(m.values());
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        if (std::abs(a[pivot * n + col]) < kSingularPivot) {
            std::ostringstream msg;
            msg << "invert: singular matrix (pivot " << a[pivot * n + col] << " in column " << col
                << ")";
            throw SingularMatrixError(msg.str());
        }
        if (pivot != col) {
            std::swap_ranges(a.begin() + pivot * n, a.begin() + (pivot + 1) * n, a.begin() + col * n);
            std::swap_ranges(inv.begin() + pivot * n, inv.begin() + (pivot + 1) * n,
                             inv.begin() + col * n);
        }
        const double scale = 1.0 / a[col * n + col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col * n + j] *= scale;
            inv[col * n + j] *= scale;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a[r * n + j] -= f * a[col * n + j];
                inv[r * n + j] -= f * inv[col * n + j];
            }
        }
    }
    return Matrix(n, n, std::move(inv));
}

Matrix pinv_full_rank(const Matrix& m) {
    if (m.rows() < m.cols()) shape_error("pinv_full_rank: needs rows >= cols", m.rows(), m.cols());
    const Matrix mt = m.transpose();
    return matmul(invert(matmul(mt, m)), mt);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) shape_error("max_abs_diff: rows", a.rows(), b.rows());
    if (a.cols() != b.cols()) shape_error("max_abs_diff: cols", a.cols(), b.cols());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    return worst;
}

double max_abs_diff(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) shape_error("max_abs_diff", a.size(), b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) shape_error("dot", a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace cw
