#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <map>
#include <sstream>

#include "rrglab/error.hpp"
#include "rrglab/graph.hpp"
#include "rrglab/switching.hpp"

using namespace rrglab;

namespace {

RegularGraph two_triangles() {
    const std::vector<RegularGraph::Edge> e{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
    return RegularGraph::from_edges(6, 2, e);
}

RegularGraph four_cycle() {
    const std::vector<RegularGraph::Edge> e{{0, 1}, {1, 2}, {2, 3}, {0, 3}};
    return RegularGraph::from_edges(4, 2, e);
}

}  // namespace

TEST(RegularGraph, RejectsInvalidInput) {
    const std::vector<RegularGraph::Edge> loop{{0, 0}, {1, 2}};
    EXPECT_THROW(RegularGraph::from_edges(3, 1, loop), Error);
    const std::vector<RegularGraph::Edge> uneven{{0, 1}, {1, 2}};
    EXPECT_THROW(RegularGraph::from_edges(3, 1, uneven), Error);
}

TEST(RegularGraph, ReadWriteRoundTrip) {
    const RegularGraph g = sample_initial(20, 3, 5);
    std::stringstream io;
    write_graph(io, g);
    EXPECT_EQ(read_graph(io), g);
}

TEST(SampleInitial, K4IsUnique) {
    const RegularGraph g = sample_initial(4, 3, 1);
    for (int u = 0; u < 4; ++u)
        for (int v = 0; v < 4; ++v) EXPECT_EQ(g.entry(u, v), u != v ? 1 : 0);
}

TEST(SampleInitial, CycleUnionHasDegreeTwo) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const RegularGraph g = sample_initial(6, 2, seed);
        g.validate();
        EXPECT_EQ(g.adjacency_matrix().rowwise().sum(), Eigen::VectorXd::Constant(6, 2.0));
    }
}

TEST(SampleInitial, RepairReachesDenseGraphs) {
    SamplerOptions opts;
    opts.method = SamplerMethod::Repair;
    opts.burn_in_steps = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const RegularGraph k8 = sample_initial(8, 7, seed, opts);
        EXPECT_NO_THROW(k8.validate());
        const RegularGraph g = sample_initial(9, 6, seed, opts);
        EXPECT_NO_THROW(g.validate());
    }
}

TEST(SampleInitial, InvalidParameters) {
    EXPECT_THROW(sample_initial(5, 3, 1), ParameterError);
    EXPECT_THROW(sample_initial(4, 4, 1), ParameterError);
}

TEST(SampleInitial, LargeDegreeSucceeds) {
    const RegularGraph g = sample_initial(300, 40, 2);
    g.validate();
    EXPECT_EQ(g.degree(), 40);
}

TEST(SampleInitial, UniformOverLabeledCubicGraphsOnEight) {
    const auto all = enumerate_regular_graphs(8, 3);
    ASSERT_EQ(all.size(), 19355u);
    std::map<std::uint64_t, std::size_t> slot;
    for (std::size_t k = 0; k < all.size(); ++k) slot[graph_code(all[k])] = k;
    std::vector<double> counts(all.size(), 0.0);
    const int samples = 100000;
    RngStream rng(2024, 0);
    for (int s = 0; s < samples; ++s) {
        const auto it = slot.find(graph_code(sample_initial(8, 3, rng)));
        ASSERT_NE(it, slot.end());
        counts[it->second] += 1.0;
    }
    const double expected = static_cast<double>(samples) / static_cast<double>(all.size());
    const double se = std::sqrt(expected * (1.0 - 1.0 / static_cast<double>(all.size())));
    double chi2 = 0.0;
    std::size_t outside = 0;
    for (double c : counts) {
        chi2 += (c - expected) * (c - expected) / expected;
        if (std::abs(c - expected) > 3.0 * se) ++outside;
    }
    const boost::math::chi_squared dist(static_cast<double>(all.size() - 1));
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01);
    // a Poisson(5.2) count leaves the 3-SE band with probability about 0.0045
    EXPECT_LT(static_cast<double>(outside) / static_cast<double>(all.size()), 0.01);
}

TEST(Indicators, SwitchabilityOfTwoTriangles) {
    const RegularGraph g = two_triangles();
    EXPECT_EQ(indicator_I({0, 1, 3, 4}, g), 1);
    EXPECT_EQ(indicator_I({0, 1, 1, 2}, g), 0);
    EXPECT_EQ(indicator_I({0, 1, 2, 3}, four_cycle()), 0);
}

TEST(Indicators, DisjointPairs) {
    EXPECT_EQ(indicator_J({0, 1, 2, 3}, {4, 5, 6, 7}), 1);
    EXPECT_EQ(indicator_J({0, 1, 2, 3}, {3, 4, 5, 6}), 0);
    EXPECT_EQ(indicator_J({0, 1, 2, 3}, {0, 1, 2, 3}), 0);
}

TEST(Switch, TwoTrianglesBecomeSixCycle) {
    const RegularGraph g = two_triangles();
    const RegularGraph s = t_switch({0, 1, 3, 4}, g);
    const std::vector<RegularGraph::Edge> cycle{{2, 0}, {0, 3}, {3, 5}, {5, 4}, {4, 1}, {1, 2}};
    EXPECT_EQ(s, RegularGraph::from_edges(6, 2, cycle));
    EXPECT_EQ(t_switch({0, 1, 3, 4}, s), g);
}

TEST(Switch, NonSwitchableIsIdentity) {
    const RegularGraph c = four_cycle();
    EXPECT_EQ(t_switch({0, 1, 2, 3}, c), c);
}

TEST(Switch, InvolutionConservationAndIndicatorOnRandomPairs) {
    RngStream rng(77, 0);
    int switched = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 6 + static_cast<int>(rng.below(20));
        const int d = 2 + static_cast<int>(rng.below(3));
        if ((n * d) % 2 != 0) continue;
        const RegularGraph a = sample_initial(n, d, rng, {SamplerMethod::Auto, 50});
        const EdgePair s{static_cast<int>(rng.below(n)), static_cast<int>(rng.below(n)),
                         static_cast<int>(rng.below(n)), static_cast<int>(rng.below(n))};
        const RegularGraph b = t_switch(s, a);
        b.validate();
        ASSERT_EQ(t_switch(s, b), a);
        ASSERT_EQ(indicator_I(s, a), indicator_I(s, b));
        switched += !(a == b);
    }
    EXPECT_GT(switched, 100);
}

TEST(Switch, PairOfDisjointSwitchesComposes) {
    const std::vector<RegularGraph::Edge> e{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5},
                                            {6, 7}, {7, 8}, {6, 8}, {9, 10}, {10, 11}, {9, 11}};
    const RegularGraph g = RegularGraph::from_edges(12, 2, e);
    const EdgePair s{0, 1, 3, 4};
    const EdgePair s2{6, 7, 9, 10};
    const RegularGraph both = t_switch_pair(s, s2, g);
    EXPECT_EQ(both, t_switch(s2, t_switch(s, g)));
    EXPECT_EQ(t_switch_pair(s, s2, both), g);
    EXPECT_EQ(t_switch_pair(s, {3, 4, 6, 7}, g), g);
}

TEST(ApplyXi, SignPatternAndRowSums) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(5, 5);
    apply_xi(0, 1, 2, 3, m, 1.0);
    EXPECT_EQ(m(0, 1), 1);
    EXPECT_EQ(m(1, 0), 1);
    EXPECT_EQ(m(2, 3), 1);
    EXPECT_EQ(m(3, 2), 1);
    EXPECT_EQ(m(0, 2), -1);
    EXPECT_EQ(m(2, 0), -1);
    EXPECT_EQ(m(1, 3), -1);
    EXPECT_EQ(m(3, 1), -1);
    EXPECT_EQ(m.cwiseAbs().sum(), 8);
    EXPECT_EQ(m.rowwise().sum().cwiseAbs().maxCoeff(), 0.0);
    apply_xi(0, 1, 2, 3, m, -1.0);
    EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ApplyXi, RowSumsVanishWithCoincidingIndices) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
                    apply_xi(i, j, k, l, m, 1.0);
                    EXPECT_NEAR(m.rowwise().sum().cwiseAbs().maxCoeff(), 0.0, 0.0);
                }
}
