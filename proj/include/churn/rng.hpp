#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace churn {

// splitmix64; used to derive independent per-row / per-tree streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic RNG wrapper. mt19937_64 output is pinned by the standard and the
// derived draws below avoid std::uniform_*_distribution, whose mapping is
// implementation-defined; results are therefore stable across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Lemire's unbiased bounded draw.
    std::size_t index(std::size_t n) {
        using u128 = unsigned __int128;
        const std::uint64_t range = static_cast<std::uint64_t>(n);
        std::uint64_t x = eng_();
        u128 m = static_cast<u128>(x) * range;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < range) {
            const std::uint64_t threshold = (0ULL - range) % range;
            while (lo < threshold) {
                x = eng_();
                m = static_cast<u128>(x) * range;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::size_t>(m >> 64);
    }

    // k distinct values from [0, n) in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + index(n - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace churn
