#include "kcml/matrix.hpp"

#include <cassert>
#include <cmath>

namespace kcml {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double squared_norm(std::span<const double> v) { return dot(v, v); }

Vector subtract(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
    return out;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    assert(a.cols() == b.rows());
    Matrix out(a.rows(), b.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double ark = a(r, k);
            if (ark == 0.0) continue;
            for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += ark * b(k, c);
        }
    }
    return out;
}

Vector multiply(const Matrix& m, std::span<const double> v) {
    assert(m.cols() == v.size());
    Vector out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
    return out;
}

void add_scaled_outer(Matrix& m, double weight, std::span<const double> v) {
    assert(m.rows() == v.size() && m.cols() == v.size());
    if (weight == 0.0) return;
    for (std::size_t r = 0; r < v.size(); ++r) {
        const double wr = weight * v[r];
        if (wr == 0.0) continue;
        double* row = m.data() + r * m.cols();
        for (std::size_t c = 0; c < v.size(); ++c) row[c] += wr * v[c];
    }
}

double quadratic_form(const Matrix& m, std::span<const double> v) {
    assert(m.rows() == v.size() && m.cols() == v.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < v.size(); ++r) acc += v[r] * dot(m.row(r), v);
    return acc;
}

double max_abs(const Matrix& m) {
    double best = 0.0;
    const double* p = m.data();
    for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) best = std::max(best, std::abs(p[i]));
    return best;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
        best = std::max(best, std::abs(a.data()[i] - b.data()[i]));
    return best;
}

double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    const double* p = m.data();
    for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) acc += p[i] * p[i];
    return std::sqrt(acc);
}

} // namespace kcml
