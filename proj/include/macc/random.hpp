#pragma once

// Seeded randomness with a portable draw procedure. std::mt19937_64 output is
// fixed by the standard, the std distributions are not, so integer draws are
// done here by rejection sampling on the raw engine output.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace macc {

class Rng {
public:
    static constexpr std::string_view kAlgorithm = "mt19937_64";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::below: zero bound");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform integer in [lo, hi].
    int between(int lo, int hi) {
        if (lo > hi) throw std::invalid_argument("Rng::between: lo > hi");
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniformly random size-k subset of {0..n-1}, returned sorted.
    std::vector<int> subset(int n, int k) {
        if (k < 0 || k > n) throw std::invalid_argument("Rng::subset: bad size");
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        // partial Fisher-Yates
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace macc
