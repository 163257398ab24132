#include <gtest/gtest.h>

#include <json.hpp>

#include <sstream>

#include "rrglab/stats.hpp"

using namespace rrglab;

TEST(RunningStats, MatchesTwoPassAndMerges) {
    const std::vector<double> xs{1.0, 4.0, -2.0, 7.5, 3.25, 0.0};
    RunningStats all, left, right;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        all.add(xs[k]);
        (k < 2 ? left : right).add(xs[k]);
    }
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= xs.size() - 1;
    EXPECT_NEAR(all.mean(), mean, 1e-14);
    EXPECT_NEAR(all.variance(), var, 1e-13);
    EXPECT_NEAR(all.stderr_of_mean(), std::sqrt(var / xs.size()), 1e-14);
    left.merge(right);
    EXPECT_EQ(left.count(), 6u);
    EXPECT_NEAR(left.mean(), mean, 1e-14);
    EXPECT_NEAR(left.variance(), var, 1e-13);
    EXPECT_EQ(RunningStats{}.variance(), 0.0);
}

TEST(StatisticsReport, JsonRoundTrip) {
    StatisticsReport r;
    r.add({"ks", 0.012, 0.0, 100});
    r.add({"bad", std::nan(""), 0.0, 1});
    ASSERT_NE(r.find("ks"), nullptr);
    EXPECT_EQ(r.find("missing"), nullptr);
    const auto j = nlohmann::json::parse(r.to_json());
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["name"], "ks");
    EXPECT_DOUBLE_EQ(j[0]["value"].get<double>(), 0.012);
    EXPECT_TRUE(j[1]["value"].is_null());
}

TEST(Histogram, IntegratesToOne) {
    const std::vector<double> xs{0.1, 0.2, 0.2, 0.7, 0.95};
    const auto h = histogram_density(xs, 0.0, 1.0, 4);
    ASSERT_EQ(h.size(), 4u);
    double mass = 0;
    for (const auto& [c, dens] : h) mass += dens * 0.25;
    EXPECT_NEAR(mass, 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(h[0].first, 0.125);
    EXPECT_DOUBLE_EQ(h[0].second, 3 / 5.0 / 0.25);
}

TEST(Csv, GapsHaveHeaderAndLfEndings) {
    GapEnsemble g;
    g.entries = {0.5, 1.25};
    g.sample_ids = {0, 0};
    g.indices = {100, 101};
    std::ostringstream out;
    write_gaps_csv(out, g);
    EXPECT_EQ(out.str(), "sample_id,index,gap\n0,100,0.5\n0,101,1.25\n");
    std::ostringstream s;
    const std::vector<std::pair<double, double>> series{{0.0, 1.5}};
    write_series_csv(s, "t", "y", series);
    EXPECT_EQ(s.str(), "t,y\n0,1.5\n");
}
