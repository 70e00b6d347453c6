#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace macc;

namespace {

DemandSetFamily example_family() {
    const AccessTopology topo(4, {{0, 1}, {0, 2}, {3}, {1}, {2}});
    return DemandSetFamily::from(derive_retrieve_array(topo, 2));
}

DemandSetFamily identity_family(int k, int t) {
    std::vector<std::vector<int>> sets;
    for (int i = 0; i < k; ++i) sets.push_back({i});
    return DemandSetFamily::from(derive_retrieve_array(AccessTopology(k, sets), t));
}

std::vector<std::set<int>> as_sets(const DemandSetFamily& fam) {
    std::vector<std::set<int>> out;
    for (const auto& s : fam.sets) {
        std::set<int> m;
        for (auto i = s.find_first(); i != PacketSet::npos; i = s.find_next(i)) m.insert(static_cast<int>(i));
        out.push_back(m);
    }
    return out;
}

}  // namespace

TEST(Greedy, ExampleTrace) {
    const auto r = greedy_converse(example_family());
    EXPECT_EQ(r.bound, Rational(2, 3));
    EXPECT_EQ(r.work, 15u);
    EXPECT_EQ(r.witness, (std::vector<int>{2, 3, 0, 1, 4}));
    EXPECT_EQ(report_line(r), "greedy 2 3 3,4,1,2,5 15");
    ASSERT_EQ(r.trace.size(), 5u);
    EXPECT_EQ(r.trace[0].remaining, (std::vector<int>{0, 1, 2, 3, 4}));
    EXPECT_EQ(r.trace[0].intersection_sizes, (std::vector<std::size_t>{1, 1, 3, 3, 3}));
    EXPECT_EQ(r.trace[1].remaining, (std::vector<int>{0, 1, 3, 4}));
    EXPECT_EQ(r.trace[1].intersection_sizes, (std::vector<std::size_t>{0, 0, 1, 1}));
    EXPECT_EQ(r.trace[2].intersection_sizes, (std::vector<std::size_t>{0, 0, 0}));
    const std::vector<std::uint64_t> cumulative{3, 4, 4, 4, 4};
    const std::vector<std::size_t> sizes{3, 1, 0, 0, 0};
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(r.trace[i].cumulative, cumulative[i]);
        EXPECT_EQ(r.trace[i].accumulated_size, sizes[i]);
        EXPECT_EQ(r.trace[i].chosen, r.witness[i]);
    }
}

TEST(IcConverse, ExampleBothRoutes) {
    const auto fam = example_family();
    const auto e = ic_converse_enum(fam);
    EXPECT_EQ(e.bound, Rational(2, 3));
    EXPECT_EQ(e.work, 120u);
    EXPECT_EQ(permutation_value(fam, e.witness), e.bound);
    const auto d = ic_converse_dp(fam);
    EXPECT_EQ(d.bound, Rational(2, 3));
    EXPECT_EQ(d.work, 32u);
    EXPECT_EQ(permutation_value(fam, d.witness), d.bound);
    EXPECT_EQ(report_line(e).substr(0, 12), "ic-enum 2 3 ");
    EXPECT_EQ(oracle::ic_numerator(as_sets(fam)), 4u);
}

TEST(IcConverse, EnumWitnessIsLexFirstMaximizer) {
    const auto fam = example_family();
    const auto e = ic_converse_enum(fam);
    std::vector<int> order{0, 1, 2, 3, 4};
    do {
        if (permutation_value(fam, order) == e.bound) break;
    } while (std::next_permutation(order.begin(), order.end()));
    EXPECT_EQ(e.witness, order);
}

TEST(IcConverse, IdentityTopologyMatchesClosedForm) {
    for (int k = 4; k <= 6; ++k)
        for (int t = 0; t <= k; ++t) {
            const auto fam = identity_family(k, t);
            const Rational want(k - t, t + 1);
            EXPECT_EQ(greedy_converse(fam).bound, want) << k << "," << t;
            EXPECT_EQ(ic_converse_enum(fam).bound, want) << k << "," << t;
            EXPECT_EQ(ic_converse_dp(fam).bound, want) << k << "," << t;
        }
}

TEST(IcConverse, RoutesAgreeWithBruteForce) {
    std::mt19937_64 gen(73);
    for (int trial = 0; trial < 120; ++trial) {
        const auto c = oracle::random_case(gen, 7, 8, 4);
        const auto fam = DemandSetFamily::from(derive_retrieve_array(c.topology, c.t));
        const Rational brute(static_cast<std::int64_t>(oracle::ic_numerator(as_sets(fam))),
                             static_cast<std::int64_t>(fam.packets));
        const auto e = ic_converse_enum(fam);
        const auto d = ic_converse_dp(fam);
        EXPECT_EQ(e.bound, brute);
        EXPECT_EQ(d.bound, brute);
        EXPECT_EQ(permutation_value(fam, d.witness), d.bound);
        EXPECT_EQ(ic_converse(fam).bound, brute);
    }
}

TEST(Sandwich, GreedyBelowIcBelowDsatur) {
    std::mt19937_64 gen(79);
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = oracle::random_case(gen, 8, 8, 5);
        const auto u = derive_retrieve_array(c.topology, c.t);
        const auto fam = DemandSetFamily::from(u);
        const auto greedy = greedy_converse(fam);
        const auto ic = ic_converse_dp(fam);
        const Rational dsatur_load = load(dsatur(build_conflict_graph(u)), u.packets());
        EXPECT_LE(greedy.bound, ic.bound);
        EXPECT_LE(ic.bound, dsatur_load);
        EXPECT_EQ(permutation_value(fam, greedy.witness), greedy.bound);
        EXPECT_EQ(greedy.work, static_cast<std::uint64_t>(c.users * (c.users + 1) / 2));
    }
}

TEST(Greedy, TiesGoToSmallestColumn) {
    DemandSetFamily fam;
    fam.packets = 4;
    for (int k = 0; k < 3; ++k) fam.sets.emplace_back(4);
    fam.sets[0].set(0);
    fam.sets[1].set(1);
    fam.sets[2].set(2);
    const auto r = greedy_converse(fam);
    EXPECT_EQ(r.witness, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(r.bound, Rational(1, 4));
}

TEST(Greedy, FirstPickUsesLargestSet) {
    DemandSetFamily fam;
    fam.packets = 5;
    for (int k = 0; k < 3; ++k) fam.sets.emplace_back(5);
    fam.sets[0].set(0);
    for (int f = 0; f < 4; ++f) fam.sets[2].set(f);
    fam.sets[1].set(4);
    const auto r = greedy_converse(fam);
    EXPECT_EQ(r.witness, (std::vector<int>{2, 0, 1}));
    EXPECT_EQ(r.bound, Rational(5, 5));
}

TEST(Converse, Rejections) {
    const auto fam = example_family();
    EXPECT_THROW(permutation_value(fam, {0, 1, 2, 3}), std::invalid_argument);
    EXPECT_THROW(permutation_value(fam, {0, 1, 2, 3, 3}), std::invalid_argument);
    EXPECT_THROW(permutation_value(fam, {0, 1, 2, 3, 5}), std::invalid_argument);
    EXPECT_THROW(ic_converse_enum(fam, 4), std::invalid_argument);
    EXPECT_THROW(ic_converse_dp(fam, 4), std::invalid_argument);
    EXPECT_THROW(greedy_converse(DemandSetFamily{}), std::invalid_argument);
    DemandSetFamily ragged = fam;
    ragged.sets[1].resize(3);
    EXPECT_THROW(ic_converse_dp(ragged), std::invalid_argument);
    EXPECT_THROW(ic_converse_enum(identity_family(11, 2)), std::invalid_argument);
    EXPECT_NO_THROW(ic_converse(identity_family(11, 2)));
}

TEST(Converse, AllCachedGivesZero) {
    const auto fam = identity_family(4, 4);
    EXPECT_EQ(greedy_converse(fam).bound, Rational(0));
    EXPECT_EQ(ic_converse_dp(fam).bound, Rational(0));
}

TEST(Converse, MethodNames) {
    EXPECT_STREQ(to_string(ConverseMethod::greedy), "greedy");
    EXPECT_STREQ(to_string(ConverseMethod::ic_enum), "ic-enum");
    EXPECT_STREQ(to_string(ConverseMethod::ic_dp), "ic-dp");
}
