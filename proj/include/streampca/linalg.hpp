#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace streampca {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sq_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(sq_norm(a)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, std::span<double> x) {
    for (double& v : x) v *= alpha;
}

/// In-place projection to the unit sphere; returns the norm that was divided out.
inline double normalize(std::span<double> x) {
    const double n = norm(x);
    if (n == 0.0) throw std::invalid_argument("normalize: zero vector");
    scale(1.0 / n, x);
    return n;
}

inline Vec unit_vector(int d, int axis) {
    Vec e(static_cast<std::size_t>(d), 0.0);
    e[static_cast<std::size_t>(axis)] = 1.0;
    return e;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Dense row-major matrix. Everything here is desk scale (d up to a few
// hundred), so no attention is paid to blocking or sparsity.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    Vec apply(std::span<const double> w) const {
        Vec out(rows_, 0.0);
        apply_into(w, out);
        return out;
    }

    /// out must not alias w.
    void apply_into(std::span<const double> w, Vec& out) const {
        out.assign(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = dot(row(i), w);
    }

    double quad_form(std::span<const double> w) const {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += w[i] * dot(row(i), w);
        return s;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    double max_asymmetry() const {
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
        return m;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

/// max_{i,j} |<row_i, row_j> - delta_ij|, i.e. how far the rows are from
/// being an orthonormal set.
inline double orthonormality_defect(const Matrix& q) {
    double defect = 0.0;
    for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = i; j < q.rows(); ++j) {
            const double g = dot(q.row(i), q.row(j)) - (i == j ? 1.0 : 0.0);
            defect = std::max(defect, std::abs(g));
        }
    return defect;
}

// Modified Gram-Schmidt over the rows, with a second pass per row to keep the
// defect near machine precision. Throws if the rows are numerically dependent.
inline Matrix orthonormalize_rows(Matrix m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto ri = m.row(i);
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < i; ++j) axpy(-dot(m.row(j), ri), m.row(j), ri);
        const double n = norm(ri);
        if (n < 1e-12) throw std::invalid_argument("orthonormalize_rows: rank-deficient input");
        scale(1.0 / n, ri);
    }
    return m;
}

} // namespace streampca
