#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace streampca {

// Counter-based generator: Philox 2x64 with 10 rounds (Salmon et al., SC'11).
// The state is a 128-bit counter plus a 64-bit key, so independent substreams
// are just different keys, and the whole stream is a pure function of
// (seed, counter) -- exactly what reproducible parallel trials need.
class Philox {
public:
    explicit Philox(std::uint64_t seed) : key_(seed) {}

    std::uint64_t next_u64() {
        if (avail_ == 0) refill();
        return block_[--avail_];
    }

    /// Uniform on [0,1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the paired variate is cached.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    void fill_gaussian(std::span<double> out) {
        for (double& v : out) v = next_gaussian();
    }

    /// One block evaluated as a pure function of (key, counter); does not
    /// disturb the generator state.
    static void block_at(std::uint64_t key, std::uint64_t ctr_lo, std::uint64_t ctr_hi,
                         std::uint64_t out[2]) {
        std::uint64_t x0 = ctr_lo;
        std::uint64_t x1 = ctr_hi;
        std::uint64_t k = key;
        for (int round = 0; round < 10; ++round) {
            const unsigned __int128 prod = static_cast<unsigned __int128>(kMultiplier) * x0;
            const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
            const std::uint64_t lo = static_cast<std::uint64_t>(prod);
            x0 = hi ^ k ^ x1;
            x1 = lo;
            k += kWeylIncrement;
        }
        out[0] = x0;
        out[1] = x1;
    }

private:
    static constexpr std::uint64_t kMultiplier = 0xD2B74407B1CE6E93ull;
    static constexpr std::uint64_t kWeylIncrement = 0x9E3779B97F4A7C15ull;

    void refill() {
        block_at(key_, ctr_lo_, ctr_hi_, block_);
        if (++ctr_lo_ == 0) ++ctr_hi_;
        avail_ = 2;
    }

    std::uint64_t key_;
    std::uint64_t ctr_lo_ = 0;
    std::uint64_t ctr_hi_ = 0;
    std::uint64_t block_[2] = {0, 0};
    int avail_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Sub-seed derivation: one Philox block keyed by the master seed, with the
// (index, role) pair as the counter. Distinct (index, role) pairs give
// decorrelated streams regardless of how trials are scheduled.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t role = 0) {
    std::uint64_t out[2];
    Philox::block_at(master, index, role, out);
    return out[0];
}

} // namespace streampca
