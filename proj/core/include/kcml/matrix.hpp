#ifndef KCML_MATRIX_HPP
#define KCML_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace kcml {

using Vector = std::vector<double>;

/// Dense row-major matrix. Deliberately minimal; the library only needs
/// symmetric accumulation, products and quadratic forms at moderate sizes.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> v);
Vector subtract(std::span<const double> a, std::span<const double> b);

Matrix transpose(const Matrix& m);
Matrix multiply(const Matrix& a, const Matrix& b);
Vector multiply(const Matrix& m, std::span<const double> v);

/// m += weight * v * v^T for square m with m.rows() == v.size().
void add_scaled_outer(Matrix& m, double weight, std::span<const double> v);

/// v^T m v for square m.
double quadratic_form(const Matrix& m, std::span<const double> v);

double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);

} // namespace kcml

#endif
