#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <map>

#include "rrglab/error.hpp"
#include "rrglab/switching.hpp"

using namespace rrglab;

namespace {

RegularGraph two_triangles() {
    const std::vector<RegularGraph::Edge> e{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
    return RegularGraph::from_edges(6, 2, e);
}

long long switchable_count(const RegularGraph& a) {
    long long count = 0;
    const int n = a.n();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int m = 0; m < n; ++m)
                for (int q = 0; q < n; ++q) count += indicator_Iijmn(i, j, m, q, a);
    return count;
}

}  // namespace

TEST(Enumeration, KnownCounts) {
    EXPECT_EQ(enumerate_regular_graphs(4, 3).size(), 1u);
    EXPECT_EQ(enumerate_regular_graphs(6, 2).size(), 70u);
    EXPECT_EQ(enumerate_regular_graphs(6, 3).size(), 70u);
    EXPECT_EQ(enumerate_regular_graphs(8, 3).size(), 19355u);
    EXPECT_THROW(enumerate_regular_graphs(12, 3), SizeError);
}

TEST(IndicatorIijmn, DirectEvaluation) {
    const RegularGraph g = two_triangles();
    EXPECT_EQ(indicator_Iijmn(0, 1, 3, 4, g), 1);
    EXPECT_EQ(indicator_Iijmn(0, 1, 1, 2, g), 0);
    EXPECT_EQ(indicator_Iijmn(0, 3, 1, 4, g), 0);
}

TEST(JumpChain, K4NeverSwitches) {
    const RegularGraph k4 = sample_initial(4, 3, 1);
    EXPECT_EQ(switchable_count(k4), 0);
    JumpChainState state{k4, 0, 0, RngStream(3, 0)};
    for (int s = 0; s < 1000; ++s) EXPECT_FALSE(jump_step(state));
    EXPECT_EQ(state.graph, k4);
}

TEST(JumpChain, ZeroStepsIsIdentityAndDegreesHold) {
    const RegularGraph a = sample_initial(30, 4, 8);
    EXPECT_EQ(run_chain(a, 0, 1), a);
    const RegularGraph b = run_chain(a, 20000, 1);
    b.validate();
    EXPECT_EQ(b.adjacency_matrix().rowwise().sum(), Eigen::VectorXd::Constant(30, 4.0));
}

TEST(JumpChain, AcceptanceRateMatchesExactAverage) {
    const auto all = enumerate_regular_graphs(8, 3);
    double expected = 0.0;
    for (const auto& g : all) expected += static_cast<double>(switchable_count(g));
    expected /= static_cast<double>(all.size()) * 4096.0;

    JumpChainState state{all.front(), 0, 0, RngStream(11, 0)};
    const int batches = 200;
    const int batch = 20000;
    double sum = 0.0, sum2 = 0.0;
    for (int b = 0; b < batches; ++b) {
        const auto before = state.accepted_switches;
        for (int s = 0; s < batch; ++s) jump_step(state);
        const double rate = static_cast<double>(state.accepted_switches - before) / batch;
        sum += rate;
        sum2 += rate * rate;
    }
    const double mean = sum / batches;
    const double se = std::sqrt((sum2 / batches - mean * mean) / (batches - 1));
    EXPECT_NEAR(mean, expected, 3.0 * se);
}

TEST(JumpChain, StationaryLawIsUniformOnEight) {
    const auto all = enumerate_regular_graphs(8, 3);
    std::map<std::uint64_t, std::size_t> slot;
    for (std::size_t k = 0; k < all.size(); ++k) slot[graph_code(all[k])] = k;
    std::vector<double> counts(all.size(), 0.0);
    // about 1.8% of tuples switch at N = 8, so records are ~27 switches apart
    const int records = 100000;
    const int thin = 1500;
    JumpChainState state{all.front(), 0, 0, RngStream(5, 0)};
    for (int s = 0; s < 100000; ++s) jump_step(state);
    for (int r = 0; r < records; ++r) {
        for (int s = 0; s < thin; ++s) jump_step(state);
        counts[slot.at(graph_code(state.graph))] += 1.0;
    }
    const double expected = static_cast<double>(records) / static_cast<double>(all.size());
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(static_cast<double>(all.size() - 1));
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01);
}

TEST(QApply, ConstantGivesZero) {
    const RegularGraph a = sample_initial(10, 3, 2);
    EXPECT_EQ(q_apply([](const RegularGraph&) { return 3.5; }, a), 0.0);
}

TEST(QApply, DenseAndSparseAgree) {
    RngStream rng(19, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const RegularGraph a = sample_initial(8, 3, rng);
        std::vector<double> w(64);
        for (double& x : w) x = rng.normal();
        const GraphObservable f = [&w](const RegularGraph& g) {
            double v = 0.0;
            for (int u = 0; u < g.n(); ++u)
                for (int x = 0; x < g.n(); ++x)
                    if (g.has_edge(u, x)) v += w[static_cast<std::size_t>(u * 8 + x)] * (1 + u * x);
            return v * v;
        };
        const double dense = q_apply_dense(f, a);
        const double sparse = q_apply(f, a);
        ASSERT_NEAR(dense, sparse, 1e-12 * (1.0 + std::abs(dense)));
    }
}

TEST(QApply, SumOverAllGraphsVanishes) {
    const auto all = enumerate_regular_graphs(8, 3);
    std::map<std::uint64_t, double> values;
    RngStream rng(21, 0);
    for (int obs = 0; obs < 10; ++obs) {
        values.clear();
        for (const auto& g : all) values[graph_code(g)] = rng.normal();
        const GraphObservable f = [&values](const RegularGraph& g) { return values.at(graph_code(g)); };
        double total = 0.0, scale = 0.0;
        for (const auto& g : all) {
            const double q = q_apply(f, g);
            total += q;
            scale += std::abs(q);
        }
        EXPECT_LE(std::abs(total), 1e-10 * scale);
    }
}

TEST(InvarianceCheck, SmallCasesPass) {
    for (const auto& [n, d] : {std::pair{4, 3}, std::pair{6, 3}, std::pair{8, 3}}) {
        const InvarianceReport r = invariance_check(n, d);
        EXPECT_TRUE(r.passed) << r.summary();
        EXPECT_TRUE(r.reversible);
    }
    EXPECT_EQ(invariance_check(6, 3).n_states, 70u);
}
