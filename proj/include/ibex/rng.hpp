#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ibex {

// Philox 4x64 block cipher, 10 rounds.  Pure function of (key, counter);
// output matches numpy.random.Philox for the same key/counter words.
inline std::array<std::uint64_t, 4> philox4x64_10(
    const std::array<std::uint64_t, 2>& key,
    const std::array<std::uint64_t, 4>& counter) {
    constexpr std::uint64_t mul0 = 0xD2E7470EE14C6C93ULL;
    constexpr std::uint64_t mul1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t weyl0 = 0x9E3779B97F4A7C15ULL;
    constexpr std::uint64_t weyl1 = 0xBB67AE8584CAA73BULL;

    std::array<std::uint64_t, 4> x = counter;
    std::uint64_t k0 = key[0];
    std::uint64_t k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        const unsigned __int128 p0 = static_cast<unsigned __int128>(mul0) * x[0];
        const unsigned __int128 p1 = static_cast<unsigned __int128>(mul1) * x[2];
        const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
        const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
        const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
        const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
        x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
        k0 += weyl0;
        k1 += weyl1;
    }
    return x;
}

// Counter-based stream: key = (master seed, stream index), counter starts at
// (0, sample index, 0, 0) and the low word advances per block with carry.
// Every (seed, stream, sample) triple therefore owns an independent stream,
// which is what makes parallel fills order-independent.
class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream,
               std::uint64_t sample_index = 0)
        : key_{master_seed, stream},
          counter_{0, sample_index, 0, 0} {}

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            block_ = philox4x64_10(key_, counter_);
            advance_counter();
            pos_ = 0;
        }
        return block_[pos_++];
    }

    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() {
        for (;;) {
            const std::uint64_t bits = next_u64() >> 11;
            if (bits != 0) return static_cast<double>(bits) * 0x1.0p-53;
        }
    }

    // Standard normal via the polar method; second draw is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        for (;;) {
            const double a = 2.0 * uniform() - 1.0;
            const double b = 2.0 * uniform() - 1.0;
            const double s = a * a + b * b;
            if (s >= 1.0 || s == 0.0) continue;
            const double f = std::sqrt(-2.0 * std::log(s) / s);
            spare_ = b * f;
            have_spare_ = true;
            return a * f;
        }
    }

    // Strictly positive exponential draw.
    double exponential(double rate) {
        for (;;) {
            const double x = -std::log(uniform()) / rate;
            if (x > 0.0) return x;
        }
    }

private:
    void advance_counter() {
        for (int i = 0; i < 4; ++i) {
            if (++counter_[i] != 0) break;
        }
    }

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> counter_;
    std::array<std::uint64_t, 4> block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ibex
