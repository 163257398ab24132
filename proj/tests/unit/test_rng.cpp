#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "rrglab/rng.hpp"

using namespace rrglab;

TEST(Philox, KnownAnswers) {
    using Block = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, SameSeedAndIdRepeat) {
    RngStream a = rng_stream(42, 7);
    RngStream b = rng_stream(42, 7);
    for (int k = 0; k < 1000; ++k) ASSERT_EQ(a(), b());
}

TEST(RngStream, StreamsAreUncorrelated) {
    RngStream a = rng_stream(42, 0);
    RngStream b = rng_stream(42, 1);
    const int n = 10000;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int k = 0; k < n; ++k) {
        const double x = a.uniform();
        const double y = b.uniform();
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    EXPECT_LT(std::abs(corr), 0.02);
}

TEST(RngStream, TrialStreamsDoNotDependOnTrialCount) {
    // stream k is addressed directly, so drawing streams 0..9 or only 5 gives the same numbers
    std::vector<std::uint64_t> direct;
    RngStream five = rng_stream(3, 5);
    for (int k = 0; k < 16; ++k) direct.push_back(five());
    for (std::uint64_t id = 0; id < 10; ++id) {
        RngStream s = rng_stream(3, id);
        if (id != 5) continue;
        for (int k = 0; k < 16; ++k) EXPECT_EQ(s(), direct[static_cast<std::size_t>(k)]);
    }
}

TEST(RngStream, UniformAndNormalMoments) {
    RngStream r(9, 0);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    for (int k = 0; k < n; ++k) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    EXPECT_NEAR(su / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
    EXPECT_NEAR(sn / n, 0.0, 4 / std::sqrt(n));
    EXPECT_NEAR(sn2 / n, 1.0, 4 * std::sqrt(2.0 / n));
}

TEST(RngStream, BelowIsUnbiased) {
    RngStream r(1, 1);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int k = 0; k < n; ++k) ++counts[r.below(7)];
    for (int c : counts) EXPECT_NEAR(c, n / 7.0, 4 * std::sqrt(n / 7.0));
}

TEST(RngStream, DerivedIdsSpread) {
    std::set<std::uint64_t> ids;
    for (std::uint64_t t = 0; t < 1000; ++t) ids.insert(derive_stream_id(12, t));
    EXPECT_EQ(ids.size(), 1000u);
}
