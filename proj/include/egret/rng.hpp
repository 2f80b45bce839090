#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace egret {

// Deterministic, platform-independent generators. The standard <random>
// engines are portable but the distributions are not, so sampling is
// implemented here directly.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// xoshiro256++ core.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
        has_spare_ = false;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer on [lo, hi] inclusive, unbiased via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next_u64());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t draw;
        do {
            draw = next_u64();
        } while (draw >= limit);
        return lo + static_cast<std::int64_t>(draw % span);
    }

    // Box-Muller with a cached spare.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(theta);
        has_spare_ = true;
        return mean + stddev * radius * std::cos(theta);
    }

    // Normal resampled until strictly positive.
    double normal_positive(double mean, double stddev) {
        for (int attempt = 0; attempt < 10000; ++attempt) {
            const double v = normal(mean, stddev);
            if (v > 0.0) return v;
        }
        throw std::runtime_error("normal_positive: distribution mass is almost entirely non-positive");
    }

    // Knuth's product method; adequate for the small rates used here.
    int poisson(double lambda) {
        if (lambda <= 0.0) throw std::invalid_argument("poisson: lambda must be > 0");
        const double limit = std::exp(-lambda);
        int k = 0;
        double product = uniform01();
        while (product > limit) {
            ++k;
            product *= uniform01();
        }
        return k;
    }

    // Poisson conditioned on the value being <= cap.
    int poisson_truncated(double lambda, int cap) {
        for (;;) {
            const int k = poisson(lambda);
            if (k <= cap) return k;
        }
    }

    // k distinct values from {0, ..., n-1}, order randomized (partial Fisher-Yates).
    std::vector<int> sample_distinct(int n, int k, bool sorted = false) {
        if (k > n) throw std::invalid_argument("sample_distinct: k > n");
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        for (int i = 0; i < k; ++i) {
            const int j = static_cast<int>(uniform_int(i, n - 1));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        if (sorted) {
            for (int i = 1; i < k; ++i)
                for (int j = i; j > 0 && pool[j - 1] > pool[j]; --j) std::swap(pool[j - 1], pool[j]);
        }
        return pool;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// One named generator per concern, so perturbing one stream leaves the
// others untouched.
inline Rng named_rng(std::uint64_t seed, std::string_view concern, std::uint64_t index = 0) {
    std::uint64_t mix = seed ^ fnv1a64(concern);
    mix = splitmix64(mix);
    mix ^= 0x9E3779B97F4A7C15ULL * (index + 1);
    return Rng(splitmix64(mix));
}

}  // namespace egret
