#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "streampca/jacobi.hpp"
#include "streampca/linalg.hpp"
#include "streampca/rng.hpp"

namespace streampca {

inline constexpr double kBasisTol = 1e-10;
inline constexpr double kDegenerateGapTol = 1e-12;

// A symmetric PSD matrix held in spectral form: eigenvalues (descending) plus
// an orthonormal eigenbasis. Ground truth for every correctness metric comes
// from this representation, so construction validates it strictly. Immutable
// after construction and safe to share across trial workers.
class CovarianceModel {
public:
    /// Standard-basis model, i.e. A = diag(spectrum).
    explicit CovarianceModel(Vec spectrum) : spectrum_(std::move(spectrum)) {
        validate_spectrum();
        basis_ = Matrix::identity(spectrum_.size());
        finish();
    }

    /// Model with an explicit eigenbasis; row i of `basis` is the eigenvector
    /// paired with spectrum[i]. Rows must be orthonormal to 1e-10.
    CovarianceModel(Vec spectrum, Matrix basis)
        : spectrum_(std::move(spectrum)), basis_(std::move(basis)) {
        validate_spectrum();
        if (basis_.rows() != spectrum_.size() || basis_.cols() != spectrum_.size())
            throw std::invalid_argument("CovarianceModel: basis shape must be d x d");
        if (orthonormality_defect(basis_) > kBasisTol)
            throw std::invalid_argument("CovarianceModel: basis is not orthonormal to 1e-10");
        standard_ = false;
        finish();
    }

    int dim() const { return static_cast<int>(spectrum_.size()); }
    const Vec& spectrum() const { return spectrum_; }
    double eigenvalue(int i) const { return spectrum_[static_cast<std::size_t>(i)]; }
    double spectral_norm() const { return spectrum_[0]; }
    double trace() const { return trace_; }
    double frobenius_sq() const { return frob_sq_; }

    bool standard_basis() const { return standard_; }
    const Matrix& basis() const { return basis_; }

    std::span<const double> eigenvector(int i) const {
        return basis_.row(static_cast<std::size_t>(i));
    }

    /// Coordinates of w in the eigenbasis: c_i = <u_i, w>.
    void to_eigenbasis_into(std::span<const double> w, Vec& c) const {
        const std::size_t d = spectrum_.size();
        if (standard_) {
            c.assign(w.begin(), w.end());
            return;
        }
        c.assign(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) c[i] = dot(basis_.row(i), w);
    }

    Vec to_eigenbasis(std::span<const double> w) const {
        Vec c;
        to_eigenbasis_into(w, c);
        return c;
    }

    /// Ambient vector from eigenbasis coordinates: sum_i c_i u_i.
    void from_eigenbasis_into(std::span<const double> c, Vec& w) const {
        const std::size_t d = spectrum_.size();
        if (standard_) {
            w.assign(c.begin(), c.end());
            return;
        }
        w.assign(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) axpy(c[i], basis_.row(i), w);
    }

    Vec from_eigenbasis(std::span<const double> c) const {
        Vec w;
        from_eigenbasis_into(c, w);
        return w;
    }

    /// A w
    Vec apply(std::span<const double> w) const {
        Vec c = to_eigenbasis(w);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= spectrum_[i];
        return from_eigenbasis(c);
    }

    /// w' A w
    double quad_form(std::span<const double> w) const {
        Vec c = to_eigenbasis(w);
        double s = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) s += spectrum_[i] * c[i] * c[i];
        return s;
    }

    Matrix reconstruct() const {
        const std::size_t d = spectrum_.size();
        Matrix a(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            auto u = eigenvector(static_cast<int>(i));
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t cidx = 0; cidx < d; ++cidx)
                    a(r, cidx) += spectrum_[i] * u[r] * u[cidx];
        }
        return a;
    }

private:
    void validate_spectrum() const {
        if (spectrum_.empty()) throw std::invalid_argument("CovarianceModel: empty spectrum");
        if (!(spectrum_[0] > 0.0)) throw std::invalid_argument("CovarianceModel: s1 must be > 0");
        for (std::size_t i = 0; i < spectrum_.size(); ++i) {
            if (!(spectrum_[i] >= 0.0) || !std::isfinite(spectrum_[i]))
                throw std::invalid_argument("CovarianceModel: spectrum entries must be finite and >= 0");
            if (i > 0 && spectrum_[i] > spectrum_[i - 1])
                throw std::invalid_argument("CovarianceModel: spectrum must be non-increasing");
        }
    }

    void finish() {
        trace_ = 0.0;
        frob_sq_ = 0.0;
        for (double s : spectrum_) {
            trace_ += s;
            frob_sq_ += s * s;
        }
    }

    Vec spectrum_;
    Matrix basis_;
    bool standard_ = true;
    double trace_ = 0.0;
    double frob_sq_ = 0.0;
};

struct EigenPair {
    double value = 0.0;
    Vec vector;
};

inline EigenPair leading_eigenpair(const CovarianceModel& a) {
    return {a.spectral_norm(), Vec(a.eigenvector(0).begin(), a.eigenvector(0).end())};
}

// Dense overload for ingested data. Rejects input that is not symmetric PSD
// (tolerance 1e-8 relative to the largest entry / eigenvalue) and fixes the
// eigenvector sign so the first coordinate above 1e-12 is positive.
inline EigenPair leading_eigenpair(const Matrix& dense) {
    if (dense.rows() != dense.cols() || dense.rows() == 0)
        throw std::invalid_argument("leading_eigenpair: matrix must be square and non-empty");
    const double sym_tol = 1e-8 * std::max(1.0, dense.max_abs());
    if (dense.max_asymmetry() > sym_tol)
        throw std::invalid_argument("leading_eigenpair: matrix is not symmetric (tolerance 1e-8)");

    EigenDecomposition eig = jacobi_eigen(dense);
    const double top = eig.values.front();
    if (!(top > 0.0))
        throw std::invalid_argument("leading_eigenpair: matrix has no positive eigenvalue");
    if (eig.values.back() < -1e-8 * top)
        throw std::invalid_argument("leading_eigenpair: matrix is not PSD (tolerance 1e-8)");

    EigenPair out;
    out.value = top;
    out.vector.assign(eig.vectors.row(0).begin(), eig.vectors.row(0).end());
    return out;
}

/// ||A||_F^2 / ||A||^2, a soft rank in [1, d].
inline double numerical_rank(const CovarianceModel& a) {
    return a.frobenius_sq() / (a.spectral_norm() * a.spectral_norm());
}

/// (s1 - s2) / s1, the relative separation of the top two eigenvalues.
inline double eigengap(const CovarianceModel& a) {
    if (a.dim() < 2) throw std::invalid_argument("eigengap: undefined for d = 1");
    return (a.eigenvalue(0) - a.eigenvalue(1)) / a.eigenvalue(0);
}

/// Same spectrum, eigenbasis replaced by {Q u_i}. Spectrum-derived quantities
/// are untouched by construction.
inline CovarianceModel rotate_model(const CovarianceModel& a, const Matrix& rotation) {
    const std::size_t d = static_cast<std::size_t>(a.dim());
    if (rotation.rows() != d || rotation.cols() != d)
        throw std::invalid_argument("rotate_model: rotation shape must be d x d");
    if (orthonormality_defect(rotation) > kBasisTol)
        throw std::invalid_argument("rotate_model: rotation is not orthonormal to 1e-10");

    Matrix basis(d, d);
    Vec rotated;
    for (std::size_t i = 0; i < d; ++i) {
        rotation.apply_into(a.eigenvector(static_cast<int>(i)), rotated);
        for (std::size_t k = 0; k < d; ++k) basis(i, k) = rotated[k];
    }
    return {a.spectrum(), std::move(basis)};
}

// --- spectrum families -------------------------------------------------

/// k leading eigenvalues equal to 1, the rest 0.
inline Vec flat_spectrum(int d, int k) {
    if (d < 1 || k < 1 || k > d) throw std::invalid_argument("flat_spectrum: need 1 <= k <= d");
    Vec s(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = 1.0;
    return s;
}

/// s_i = ratio^(i-1), ratio in (0, 1].
inline Vec geometric_spectrum(int d, double ratio) {
    if (d < 1 || !(ratio > 0.0) || ratio > 1.0)
        throw std::invalid_argument("geometric_spectrum: need d >= 1 and ratio in (0,1]");
    Vec s(static_cast<std::size_t>(d));
    double v = 1.0;
    for (int i = 0; i < d; ++i, v *= ratio) s[static_cast<std::size_t>(i)] = v;
    return s;
}

/// s_i = i^(-alpha), alpha >= 0.
inline Vec power_spectrum(int d, double alpha) {
    if (d < 1 || !(alpha >= 0.0)) throw std::invalid_argument("power_spectrum: need d >= 1, alpha >= 0");
    Vec s(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) s[static_cast<std::size_t>(i)] = std::pow(i + 1.0, -alpha);
    return s;
}

/// s_1 = 1, the bulk at 1 - gap; the relative top-eigenvalue separation is
/// exactly `gap`.
inline Vec spiked_spectrum(int d, double gap) {
    if (d < 2 || !(gap >= 0.0) || gap > 1.0)
        throw std::invalid_argument("spiked_spectrum: need d >= 2 and gap in [0,1]");
    Vec s(static_cast<std::size_t>(d), 1.0 - gap);
    s[0] = 1.0;
    return s;
}

/// Seeded orthonormal d x d matrix (rows orthonormal), from a Gaussian matrix
/// put through modified Gram-Schmidt.
inline Matrix random_rotation(int d, std::uint64_t seed) {
    Philox rng(seed);
    Matrix g(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < g.rows(); ++i) rng.fill_gaussian(g.row(i));
    return orthonormalize_rows(std::move(g));
}

} // namespace streampca
