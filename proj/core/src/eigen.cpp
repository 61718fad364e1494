#include "kcml/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kcml/error.hpp"

namespace kcml {
namespace {

// One Jacobi rotation zeroing a(p, q), accumulating the rotation into v.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;

    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    double t;
    if (theta >= 0.0)
        t = 1.0 / (theta + std::sqrt(theta * theta + 1.0));
    else
        t = -1.0 / (-theta + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const double tau = s / (1.0 + c);

    const std::size_t n = a.rows();
    a(p, p) -= t * apq;
    a(q, q) += t * apq;
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (r == p || r == q) continue;
        const double arp = a(r, p);
        const double arq = a(r, q);
        a(r, p) = arp - s * (arq + tau * arp);
        a(p, r) = a(r, p);
        a(r, q) = arq + s * (arp - tau * arq);
        a(q, r) = a(r, q);
    }
    for (std::size_t r = 0; r < n; ++r) {
        const double vrp = v(r, p);
        const double vrq = v(r, q);
        v(r, p) = vrp - s * (vrq + tau * vrp);
        v(r, q) = vrq + s * (vrp - tau * vrq);
    }
}

double max_off_diagonal(const Matrix& a) {
    double best = 0.0;
    for (std::size_t p = 0; p + 1 < a.rows(); ++p)
        for (std::size_t q = p + 1; q < a.rows(); ++q) best = std::max(best, std::abs(a(p, q)));
    return best;
}

} // namespace

EigenDecomposition symmetric_eigendecomposition(const Matrix& m, const JacobiOptions& options) {
    const std::size_t n = m.rows();
    if (n == 0 || m.cols() != n)
        throw argument_error("symmetric_eigendecomposition: matrix must be square and non-empty");

    const double scale = std::max(1.0, max_abs(m));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = r + 1; c < n; ++c)
            if (std::abs(m(r, c) - m(c, r)) > 1e-8 * scale)
                throw argument_error("symmetric_eigendecomposition: input is not symmetric");

    Matrix a(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) a(r, c) = 0.5 * (m(r, c) + m(c, r));
    Matrix v = Matrix::identity(n);

    const double threshold = options.tolerance * scale;
    bool converged = n == 1;
    for (std::size_t sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
        if (max_off_diagonal(a) <= threshold) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                if (std::abs(a(p, q)) > threshold) rotate(a, v, p, q);
    }
    if (!converged && max_off_diagonal(a) > threshold)
        throw numeric_error("symmetric_eigendecomposition: no convergence after " +
                            std::to_string(options.max_sweeps) + " sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.eigenvalues[c] = a(src, src);
        // Deterministic sign: largest-magnitude component positive.
        std::size_t pivot = 0;
        double best = -1.0;
        for (std::size_t r = 0; r < n; ++r) {
            if (std::abs(v(r, src)) > best) {
                best = std::abs(v(r, src));
                pivot = r;
            }
        }
        const double sign = v(pivot, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = sign * v(r, src);
    }
    return out;
}

} // namespace kcml
