#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "streampca/linalg.hpp"

namespace streampca {

struct EigenDecomposition {
    Vec values;      // descending
    Matrix vectors;  // row i is the eigenvector for values[i]
};

/// Flips the vector so its first coordinate with magnitude above `tol` is
/// positive. Gives tests a canonical representative of the +-v pair.
inline void canonical_sign(std::span<double> v, double tol = 1e-12) {
    for (double c : v) {
        if (std::abs(c) > tol) {
            if (c < 0.0) scale(-1.0, v);
            return;
        }
    }
}

// Cyclic-by-rows Jacobi diagonalization for symmetric matrices. Chosen over
// anything randomized or pivoted-by-magnitude: the sweep order is fixed, so
// results are bit-stable run to run, and quadratic convergence makes ~10
// sweeps plenty at the dimensions used here.
inline EigenDecomposition jacobi_eigen(Matrix a, int max_sweeps = 64) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n) throw std::invalid_argument("jacobi_eigen: matrix must be square");

    Matrix v = Matrix::identity(n);
    const double scale_tol = 1e-15 * std::max(1.0, a.max_abs());

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) <= scale_tol * n) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= scale_tol) continue;

                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
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
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t col = order[r];
        out.values[r] = a(col, col);
        for (std::size_t k = 0; k < n; ++k) out.vectors(r, k) = v(k, col);
        canonical_sign(out.vectors.row(r));
    }
    return out;
}

} // namespace streampca
