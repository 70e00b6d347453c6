#pragma once

// Binomial coefficients and lexicographic ranking of k-subsets.
//
// Subsets are sorted vectors of 0-based element indices drawn from
// {0, ..., n-1}. Lexicographic order compares the sorted element lists, so
// for n = 4, k = 2 the order is {0,1} {0,2} {0,3} {1,2} {1,3} {2,3}.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace macc {

using Subset = std::vector<int>;

/// Exact C(n, k); 0 when k < 0 or k > n. Throws on uint64 overflow.
inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (int i = 1; i <= k; ++i) {
        // result * (n - k + i) is divisible by i at every step
        const unsigned __int128 next = static_cast<unsigned __int128>(result) * static_cast<unsigned>(n - k + i) /
                                       static_cast<unsigned>(i);
        if (next > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("binomial: overflow");
        result = static_cast<std::uint64_t>(next);
    }
    return result;
}

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<Subset> lex_subsets(int n, int k) {
    std::vector<Subset> out;
    if (k < 0 || k > n) return out;
    out.reserve(binomial(n, k));
    Subset cur(k);
    for (int i = 0; i < k; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

/// 0-based lexicographic rank of a sorted k-subset of {0..n-1}.
inline std::uint64_t lex_rank(const Subset& subset, int n) {
    const int k = static_cast<int>(subset.size());
    std::uint64_t rank = 0;
    int prev = -1;
    for (int i = 0; i < k; ++i) {
        const int a = subset[i];
        if (a <= prev || a >= n) throw std::invalid_argument("lex_rank: subset not sorted or out of range");
        // count subsets that agree on positions < i and place a smaller element at i
        for (int j = prev + 1; j < a; ++j) rank += binomial(n - 1 - j, k - 1 - i);
        prev = a;
    }
    return rank;
}

/// Inverse of lex_rank.
inline Subset lex_unrank(std::uint64_t rank, int n, int k) {
    if (rank >= binomial(n, k)) throw std::out_of_range("lex_unrank: rank out of range");
    Subset out;
    out.reserve(k);
    int next = 0;
    for (int i = 0; i < k; ++i) {
        while (true) {
            const std::uint64_t block = binomial(n - 1 - next, k - 1 - i);
            if (rank < block) break;
            rank -= block;
            ++next;
        }
        out.push_back(next++);
    }
    return out;
}

}  // namespace macc
