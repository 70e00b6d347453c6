#pragma once

// Lower bounds on the delivery load under uncoded placement.
//
// For a user order u, the acyclic-set inequality reads
//     F * R_u = sum_i |S_{u_1} n ... n S_{u_i}|
// where S_k is the set of packets user k cannot retrieve. The index-coding
// converse is the maximum of R_u over all orders; the greedy converse builds a
// single order by always extending with the user that keeps the running
// intersection largest.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "macc_model.hpp"

namespace macc {

struct DemandSetFamily {
    std::vector<PacketSet> sets;  // S_{d_k}, one per user, all of size F
    std::uint64_t packets = 0;    // F

    static DemandSetFamily from(const RetrieveArray& u) {
        return {uncached_sets(u), static_cast<std::uint64_t>(u.packets())};
    }
    static DemandSetFamily from(const StarGrid& u) { return {uncached_sets(u), static_cast<std::uint64_t>(u.rows())}; }

    int users() const { return static_cast<int>(sets.size()); }

    void validate() const {
        if (packets == 0) throw std::invalid_argument("DemandSetFamily: F must be positive");
        if (sets.empty()) throw std::invalid_argument("DemandSetFamily: no users");
        for (const auto& s : sets)
            if (s.size() != packets) throw std::invalid_argument("DemandSetFamily: set width differs from F");
    }
};

enum class ConverseMethod { greedy, ic_enum, ic_dp };

inline const char* to_string(ConverseMethod m) {
    switch (m) {
        case ConverseMethod::greedy: return "greedy";
        case ConverseMethod::ic_enum: return "ic-enum";
        case ConverseMethod::ic_dp: return "ic-dp";
    }
    return "?";
}

struct GreedyStep {
    std::vector<int> remaining;                  // candidate columns before the pick
    std::vector<std::size_t> intersection_sizes;  // |I_k| aligned with remaining
    int chosen = 0;
    std::size_t accumulated_size = 0;  // |S| after the pick
    std::uint64_t cumulative = 0;      // running sum of |S|
};

struct ConverseReport {
    Rational bound;
    ConverseMethod method = ConverseMethod::greedy;
    std::vector<int> witness;  // 0-based user order attaining the bound
    std::uint64_t work = 0;    // intersections (greedy), permutations (enum) or subsets (dp)
    std::vector<GreedyStep> trace;
};

/// "method bound_num bound_den witness_order work_count", witness 1-based and comma-separated.
inline std::string report_line(const ConverseReport& r) {
    std::ostringstream os;
    os << to_string(r.method) << ' ' << r.bound.numerator() << ' ' << r.bound.denominator() << ' ';
    for (std::size_t i = 0; i < r.witness.size(); ++i) os << (i ? "," : "") << r.witness[i] + 1;
    os << ' ' << r.work;
    return os.str();
}

// ---------------------------------------------------------------------------

inline Rational permutation_value(const DemandSetFamily& family, const std::vector<int>& order) {
    family.validate();
    const int k_users = family.users();
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> identity(k_users);
    std::iota(identity.begin(), identity.end(), 0);
    if (sorted != identity) throw std::invalid_argument("permutation_value: order is not a permutation of the users");

    PacketSet acc = family.sets[order[0]];
    std::uint64_t total = acc.count();
    for (std::size_t i = 1; i < order.size(); ++i) {
        acc &= family.sets[order[i]];
        total += acc.count();
    }
    return Rational(static_cast<std::int64_t>(total), static_cast<std::int64_t>(family.packets));
}

inline constexpr int kEnumerationLimit = 10;
inline constexpr int kDpLimit = 24;

/// Max of R_u over all K! orders by depth-first enumeration with shared
/// prefixes. The witness is the lexicographically first maximizing order.
inline ConverseReport ic_converse_enum(const DemandSetFamily& family, int limit = kEnumerationLimit) {
    family.validate();
    const int k_users = family.users();
    if (k_users > limit)
        throw std::invalid_argument("ic_converse_enum: K = " + std::to_string(k_users) + " exceeds the enumeration limit " +
                                    std::to_string(limit) + "; use ic_converse_dp");

    ConverseReport report;
    report.method = ConverseMethod::ic_enum;
    std::uint64_t best = 0;
    bool have_best = false;
    std::vector<int> order;
    std::vector<bool> taken(k_users, false);
    std::vector<PacketSet> prefix(k_users);

    auto dfs = [&](auto& self, int depth, std::uint64_t sum) -> void {
        if (depth == k_users) {
            ++report.work;
            if (!have_best || sum > best) {
                best = sum;
                have_best = true;
                report.witness = order;
            }
            return;
        }
        for (int k = 0; k < k_users; ++k) {
            if (taken[k]) continue;
            prefix[depth] = depth == 0 ? family.sets[k] : (prefix[depth - 1] & family.sets[k]);
            taken[k] = true;
            order.push_back(k);
            self(self, depth + 1, sum + prefix[depth].count());
            order.pop_back();
            taken[k] = false;
        }
    };
    dfs(dfs, 0, 0);
    report.bound = Rational(static_cast<std::int64_t>(best), static_cast<std::int64_t>(family.packets));
    return report;
}

/// Same bound as ic_converse_enum via a subset recursion: the i-th term
/// depends only on the set B of the first i users, and
///     |n_{j in B} S_j| = #{f : B is a subset of M_f},  M_f = {k : f in S_k},
/// so term sizes come from a superset-sum transform over user masks and
///     best(B) = |n_B| + max_{k in B} best(B - {k}).
inline ConverseReport ic_converse_dp(const DemandSetFamily& family, int limit = kDpLimit) {
    family.validate();
    const int k_users = family.users();
    if (k_users > limit || k_users > 30)
        throw std::invalid_argument("ic_converse_dp: K = " + std::to_string(k_users) + " exceeds the subset budget " +
                                    std::to_string(limit));

    const std::size_t states = std::size_t{1} << k_users;
    std::vector<std::uint32_t> common(states, 0);
    for (std::uint64_t f = 0; f < family.packets; ++f) {
        std::size_t mask = 0;
        for (int k = 0; k < k_users; ++k)
            if (family.sets[k].test(f)) mask |= std::size_t{1} << k;
        ++common[mask];
    }
    for (int k = 0; k < k_users; ++k) {
        const std::size_t bit = std::size_t{1} << k;
        for (std::size_t mask = 0; mask < states; ++mask)
            if (!(mask & bit)) common[mask] += common[mask | bit];
    }

    std::vector<std::uint64_t> best(states, 0);
    for (std::size_t mask = 1; mask < states; ++mask) {
        std::uint64_t tail = 0;
        for (int k = 0; k < k_users; ++k)
            if (mask & (std::size_t{1} << k)) tail = std::max(tail, best[mask ^ (std::size_t{1} << k)]);
        best[mask] = common[mask] + tail;
    }

    ConverseReport report;
    report.method = ConverseMethod::ic_dp;
    report.work = states;
    std::vector<int> reversed;
    std::size_t mask = states - 1;
    while (mask) {
        int pick = -1;
        for (int k = 0; k < k_users; ++k) {
            const std::size_t bit = std::size_t{1} << k;
            if ((mask & bit) && (pick < 0 || best[mask ^ bit] > best[mask ^ (std::size_t{1} << pick)])) pick = k;
        }
        reversed.push_back(pick);
        mask ^= std::size_t{1} << pick;
    }
    report.witness.assign(reversed.rbegin(), reversed.rend());
    report.bound = Rational(static_cast<std::int64_t>(best[states - 1]), static_cast<std::int64_t>(family.packets));
    return report;
}

/// Exact IC converse, by enumeration when K is small and the subset recursion otherwise.
inline ConverseReport ic_converse(const DemandSetFamily& family) {
    return family.users() <= 8 ? ic_converse_enum(family) : ic_converse_dp(family);
}

/// Greedy converse. The first pick maximizes |S_k|, each later pick maximizes
/// |S n S_k| over the remaining columns; ties go to the smallest column.
inline ConverseReport greedy_converse(const DemandSetFamily& family) {
    family.validate();
    const int k_users = family.users();
    ConverseReport report;
    report.method = ConverseMethod::greedy;

    std::vector<int> remaining(k_users);
    std::iota(remaining.begin(), remaining.end(), 0);
    PacketSet acc;
    std::uint64_t total = 0;
    bool first = true;
    while (!remaining.empty()) {
        GreedyStep step;
        step.remaining = remaining;
        std::size_t best_pos = 0;
        std::size_t best_size = 0;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            const PacketSet& s = family.sets[remaining[i]];
            const std::size_t size = first ? s.count() : (acc & s).count();
            ++report.work;
            step.intersection_sizes.push_back(size);
            if (i == 0 || size > best_size) {
                best_pos = i;
                best_size = size;
            }
        }
        const int chosen = remaining[best_pos];
        acc = first ? family.sets[chosen] : (acc & family.sets[chosen]);
        first = false;
        total += acc.count();
        step.chosen = chosen;
        step.accumulated_size = acc.count();
        step.cumulative = total;
        report.trace.push_back(std::move(step));
        report.witness.push_back(chosen);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
    }
    report.bound = Rational(static_cast<std::int64_t>(total), static_cast<std::int64_t>(family.packets));
    return report;
}

}  // namespace macc
