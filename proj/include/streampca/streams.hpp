#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "streampca/covariance_model.hpp"
#include "streampca/io.hpp"
#include "streampca/linalg.hpp"
#include "streampca/rng.hpp"

namespace streampca {

// One stochastic update: either a rank-one outer product x x' (the common
// case, applied in O(d)) or an explicit dense symmetric matrix.
struct SampleUpdate {
    enum class Kind { rank_one, dense };

    Kind kind = Kind::rank_one;
    Vec factor;                           // x, when kind == rank_one
    std::shared_ptr<const Matrix> dense;  // when kind == dense

    int dim() const {
        return kind == Kind::rank_one ? static_cast<int>(factor.size())
                                      : static_cast<int>(dense->rows());
    }

    /// update * w
    void apply_into(std::span<const double> w, Vec& out) const {
        if (kind == Kind::rank_one) {
            const double a = dot(factor, w);
            out.assign(factor.size(), 0.0);
            axpy(a, factor, out);
        } else {
            dense->apply_into(w, out);
        }
    }

    Vec apply(std::span<const double> w) const {
        Vec out;
        apply_into(w, out);
        return out;
    }

    /// w' * update * w
    double quad_form(std::span<const double> w) const {
        if (kind == Kind::rank_one) {
            const double a = dot(factor, w);
            return a * a;
        }
        return dense->quad_form(w);
    }

    /// Spectral norm: exact and O(d) for rank-one, via diagonalization for
    /// dense (test-scale only).
    double spectral_norm() const {
        if (kind == Kind::rank_one) return sq_norm(factor);
        return jacobi_eigen(*dense).values.front();
    }
};

struct StreamExhausted : std::runtime_error {
    StreamExhausted(long consumed, std::string what_text)
        : std::runtime_error(std::move(what_text)), samples_consumed(consumed) {}
    long samples_consumed;
};

enum class StreamKind { rademacher, eigenbasis, file, exact };

struct StreamSpec {
    StreamKind kind = StreamKind::rademacher;
    std::uint64_t seed = 0;
    double declared_b = 0.0;  // required for file streams
    std::string path;         // file streams only
};

// Certified almost-sure bound b on both ||sample||/||A|| and
// ||sample - A||/||A||. Both built-in generators emit samples with
// ||sample|| = trace(A) deterministically, so trace/s1 covers the first
// ratio and trace/s1 + 1 covers the second by the triangle inequality.
inline double bound_b(const StreamSpec& spec, const CovarianceModel& model) {
    switch (spec.kind) {
        case StreamKind::rademacher:
        case StreamKind::eigenbasis:
            return model.trace() / model.spectral_norm() + 1.0;
        case StreamKind::exact:
            return 1.0;
        case StreamKind::file:
            if (!(spec.declared_b >= 1.0))
                throw std::invalid_argument("bound_b: file streams require a declared b >= 1");
            return spec.declared_b;
    }
    throw std::logic_error("bound_b: unknown stream kind");
}

// x = sum_i sigma_i sqrt(s_i) u_i with independent uniform signs sigma_i.
// E[x x'] = A exactly, and ||x||^2 = trace(A) on every draw, which is what
// certifies the norm bound ahead of time.
class RademacherStream {
public:
    RademacherStream(const CovarianceModel& model, std::uint64_t seed)
        : model_(&model), rng_(seed), sqrt_spectrum_(model.spectrum()) {
        for (double& s : sqrt_spectrum_) s = std::sqrt(s);
    }

    int dim() const { return model_->dim(); }

    void next_into(SampleUpdate& out) {
        const std::size_t d = sqrt_spectrum_.size();
        coords_.resize(d);
        for (std::size_t i = 0; i < d; ++i)
            coords_[i] = next_sign() ? sqrt_spectrum_[i] : -sqrt_spectrum_[i];
        out.kind = SampleUpdate::Kind::rank_one;
        model_->from_eigenbasis_into(coords_, out.factor);
    }

    SampleUpdate next() {
        SampleUpdate u;
        next_into(u);
        return u;
    }

private:
    bool next_sign() {
        if (bits_left_ == 0) {
            bit_buf_ = rng_.next_u64();
            bits_left_ = 64;
        }
        const bool s = bit_buf_ & 1u;
        bit_buf_ >>= 1;
        --bits_left_;
        return s;
    }

    const CovarianceModel* model_;
    Philox rng_;
    Vec sqrt_spectrum_;
    Vec coords_;
    std::uint64_t bit_buf_ = 0;
    int bits_left_ = 0;
};

// Draws eigenvector index i with probability s_i / trace(A) and emits
// x = sqrt(trace) u_i. Unbiased, norm trace(A) always, and each sample is a
// pure eigendirection -- maximally misaligned with A as a stress case.
class EigenbasisStream {
public:
    EigenbasisStream(const CovarianceModel& model, std::uint64_t seed)
        : model_(&model), rng_(seed), sqrt_trace_(std::sqrt(model.trace())) {
        if (!(model.trace() > 0.0))
            throw std::invalid_argument("EigenbasisStream: trace(A) must be positive");
        cumulative_.resize(model.spectrum().size());
        double acc = 0.0;
        for (std::size_t i = 0; i < cumulative_.size(); ++i) {
            acc += model.spectrum()[i] / model.trace();
            cumulative_[i] = acc;
        }
        cumulative_.back() = 1.0;
    }

    int dim() const { return model_->dim(); }

    void next_into(SampleUpdate& out) {
        const double u = rng_.next_double();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const std::size_t idx =
            std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
        coords_.assign(cumulative_.size(), 0.0);
        coords_[idx] = sqrt_trace_;
        out.kind = SampleUpdate::Kind::rank_one;
        model_->from_eigenbasis_into(coords_, out.factor);
    }

    SampleUpdate next() {
        SampleUpdate u;
        next_into(u);
        return u;
    }

private:
    const CovarianceModel* model_;
    Philox rng_;
    double sqrt_trace_;
    Vec cumulative_;
    Vec coords_;
};

/// Zero-noise reference stream: every sample is A itself.
class ExactStream {
public:
    explicit ExactStream(const CovarianceModel& model)
        : dim_(model.dim()), dense_(std::make_shared<const Matrix>(model.reconstruct())) {}

    int dim() const { return dim_; }

    void next_into(SampleUpdate& out) {
        out.kind = SampleUpdate::Kind::dense;
        out.dense = dense_;
        out.factor.clear();
    }

    SampleUpdate next() {
        SampleUpdate u;
        next_into(u);
        return u;
    }

private:
    int dim_;
    std::shared_ptr<const Matrix> dense_;
};

// Single pass over a CSV of data points (one row = one d-vector); each row
// becomes the rank-one update x x'. Tracks the running max of ||x||^2 for
// a-posteriori noise-bound estimation.
class FileStream {
public:
    FileStream(std::string path, int dim) : path_(std::move(path)), dim_(dim), in_(path_) {
        if (dim_ < 1) throw std::invalid_argument("FileStream: dim must be >= 1");
        if (!in_) throw std::runtime_error("cannot open data file: " + path_);
    }

    int dim() const { return dim_; }
    long rows_consumed() const { return rows_; }
    double max_sq_norm() const { return max_sq_norm_; }

    void next_into(SampleUpdate& out) {
        std::string line;
        if (!std::getline(in_, line))
            throw StreamExhausted(rows_, path_ + ": stream exhausted after " +
                                             std::to_string(rows_) + " samples");
        ++line_number_;
        const auto fields = split_fields(line);
        if (static_cast<int>(fields.size()) != dim_)
            throw std::runtime_error(path_ + ": line " + std::to_string(line_number_) + ": expected " +
                                     std::to_string(dim_) + " columns, got " +
                                     std::to_string(fields.size()));
        out.kind = SampleUpdate::Kind::rank_one;
        out.factor.resize(static_cast<std::size_t>(dim_));
        for (std::size_t i = 0; i < fields.size(); ++i) {
            try {
                out.factor[i] = parse_double(fields[i], path_);
            } catch (const std::exception&) {
                throw std::runtime_error(path_ + ": line " + std::to_string(line_number_) +
                                         ": malformed number '" + std::string(trim(fields[i])) + "'");
            }
        }
        ++rows_;
        max_sq_norm_ = std::max(max_sq_norm_, sq_norm(out.factor));
    }

    SampleUpdate next() {
        SampleUpdate u;
        next_into(u);
        return u;
    }

    /// Discards n rows (validating them as it goes).
    void skip(long n) {
        SampleUpdate scratch;
        for (long i = 0; i < n; ++i) next_into(scratch);
    }

private:
    std::string path_;
    int dim_;
    std::ifstream in_;
    long rows_ = 0;
    long line_number_ = 0;
    double max_sq_norm_ = 0.0;
};

template <typename S>
concept SampleStream = requires(S s, SampleUpdate& u) {
    { s.next_into(u) };
    { s.dim() } -> std::convertible_to<int>;
};

struct IngestResult {
    std::vector<SampleUpdate> samples;
    double max_sq_norm = 0.0;
};

/// Reads the whole file eagerly; errors carry line numbers.
inline IngestResult ingest_stream(const std::string& path, int dim) {
    FileStream fs(path, dim);
    IngestResult out;
    while (true) {
        SampleUpdate u;
        try {
            fs.next_into(u);
        } catch (const StreamExhausted&) {
            break;
        }
        out.samples.push_back(std::move(u));
    }
    out.max_sq_norm = fs.max_sq_norm();
    return out;
}

} // namespace streampca
