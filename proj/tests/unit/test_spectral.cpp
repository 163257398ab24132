#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "rrglab/error.hpp"
#include "rrglab/harness.hpp"
#include "rrglab/spectral.hpp"

using namespace rrglab;

namespace {

std::vector<double> values(const SpectralDecomposition& s) {
    return {s.eigenvalues.data(), s.eigenvalues.data() + s.m()};
}

}  // namespace

TEST(Decompose, CompleteGraphOnFour) {
    const auto s = decompose(center_rescale(sample_initial(4, 3, 1)));
    ASSERT_EQ(s.m(), 3);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(s.eigenvalues(k), -1 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(s.trivial_overlap, 1.0, 1e-12);
}

TEST(Decompose, TwoTriangles) {
    const std::vector<RegularGraph::Edge> e{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
    const auto s = decompose(center_rescale(RegularGraph::from_edges(6, 2, e)), false);
    ASSERT_EQ(s.m(), 5);
    EXPECT_NEAR(s.eigenvalues(0), 2.0, 1e-14);
    for (int k = 1; k < 5; ++k) EXPECT_NEAR(s.eigenvalues(k), -1.0, 1e-14);
}

TEST(Decompose, LargeEigenvectorsAreOrthonormal) {
    RngStream rng(31, 0);
    const ConstrainedMatrix h = sample_constrained_goe(300, rng);
    const auto s = decompose(h, true);
    const int m = s.m();
    EXPECT_LT((s.eigenvectors.transpose() * s.eigenvectors - Matrix::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((h.entries() * s.eigenvectors - s.eigenvectors * s.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff(),
              1e-10);
}

TEST(Decompose, EigenpairsAndTrace) {
    const ConstrainedMatrix h = center_rescale(sample_initial(60, 5, 3));
    const auto s = decompose(h, true);
    EXPECT_NEAR(s.eigenvalues.sum(), h.entries().trace(), 1e-11);
    for (int k = 0; k + 1 < s.m(); ++k) EXPECT_GE(s.eigenvalues(k), s.eigenvalues(k + 1));
    const Matrix residual = h.entries() * s.eigenvectors - s.eigenvectors * s.eigenvalues.asDiagonal();
    EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((s.eigenvectors.transpose() * Eigen::VectorXd::Ones(60)).cwiseAbs().maxCoeff(), 1e-12);
    const auto v = decompose(h, false);
    EXPECT_LT((v.eigenvalues - s.eigenvalues).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Decompose, BlockVectorsLiveOnPerp) {
    RngStream rng(3, 0);
    const Matrix block = sample_goe_block(29, 30, rng);
    const auto s = decompose_block(block, true);
    const Matrix h = embed_householder(block);
    EXPECT_LT((h * s.eigenvectors - s.eigenvectors * s.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Semicircle, StieltjesTransformValues) {
    EXPECT_LT(std::abs(semicircle_m({0.0, 1e-300}) - Complex(0, 1)), 1e-12);
    const Complex m = semicircle_m({0.0, 1.0});
    EXPECT_LT(std::abs(m - Complex(0, (std::sqrt(5.0) - 1) / 2)), 1e-15);
    EXPECT_LT(std::abs(m * m + m * Complex(0, 1) + 1.0), 1e-14);
    for (const Complex z : {Complex(100, 0.1), Complex(-60, 80), Complex(0, 100)})
        EXPECT_LT(std::abs(z * semicircle_m(z) + 1.0), 1e-3);
    for (double e = -3; e <= 3; e += 0.25) EXPECT_GT(semicircle_m({e, 1e-3}).imag(), 0.0);
}

TEST(Semicircle, Density) {
    EXPECT_DOUBLE_EQ(semicircle_density(0.0), 1 / std::numbers::pi);
    EXPECT_EQ(semicircle_density(2.0), 0.0);
    EXPECT_EQ(semicircle_density(-2.5), 0.0);
    const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        semicircle_density, -2.0, 2.0, 15, 1e-14);
    EXPECT_NEAR(mass, 1.0, 1e-10);
    EXPECT_NEAR(semicircle_cdf(0.0), 0.5, 1e-15);
    EXPECT_NEAR(semicircle_tail(1.0) + semicircle_cdf(1.0), 1.0, 1e-15);
}

TEST(Semicircle, ClassicalLocations) {
    const int n = 100;
    const auto g = classical_locations(n);
    ASSERT_EQ(g.size(), 100u);
    EXPECT_NEAR(g[n / 2 - 1], 0.0, 1e-12);
    EXPECT_EQ(g.back(), -2.0);
    for (int i = 0; i + 1 < n; ++i) EXPECT_GT(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(i + 1)]);
    for (int i = 1; i < n; ++i) EXPECT_NEAR(semicircle_tail(g[static_cast<std::size_t>(i - 1)]), double(i) / n, 1e-12);
}

TEST(Stieltjes, EmpiricalAndGreenFunction) {
    const std::vector<double> one{0.0};
    EXPECT_LT(std::abs(stieltjes_empirical(one, {0, 1}) - Complex(0, 1)), 1e-15);
    const auto s = decompose(center_rescale(sample_initial(80, 6, 4)));
    const Complex z{0.3, 0.1};
    const ComplexMatrix g = green_matrix(s, z);
    EXPECT_LT(std::abs(g.trace() / double(s.m()) - stieltjes_empirical(s, z)), 1e-13);
    EXPECT_GT(stieltjes_empirical(s, z).imag(), 0.0);
    EXPECT_GE(gamma_stat(s, {0.0, 10.0}), 1.0);
    const ComplexMatrix g2 = green_matrix_squared(s, z);
    EXPECT_LT((g * g - g2).cwiseAbs().maxCoeff(), 1e-11);
    const std::vector<std::pair<int, int>> pairs{{0, 0}, {3, 7}};
    const auto entries = green_entries(s, z, pairs);
    EXPECT_LT(std::abs(entries[1] - g(3, 7)), 1e-14);
}

TEST(Stieltjes, GreenBoundOnRegularGraphs) {
    const auto s = decompose(center_rescale(sample_initial(1000, 32, 9)));
    EXPECT_LE(gamma_stat(s, {0.0, 0.1}), 10.0 * (1 + 1 / (1000 * 0.1)));
}

TEST(Gaps, ConstantFunctionAndRigidSpectrum) {
    const int n = 1000;
    const auto g = classical_locations(n);
    const std::vector<std::vector<double>> rigid{std::vector<double>(g.begin(), g.end() - 1)};
    const Estimate one = gap_statistic(rigid, n, 500, 1, [](std::span<const double>) { return 1.0; });
    EXPECT_EQ(one.value, 1.0);
    for (int i : {150, 400, 500, 800}) {
        const Estimate e = gap_statistic(rigid, n, i, 1, [](std::span<const double> x) { return x[0]; });
        EXPECT_NEAR(e.value, 1.0, 0.01);
    }
    const GapEnsemble ens = gap_ensemble(rigid, n, 0.1);
    EXPECT_NEAR(ens.mean(), 1.0, 0.01);
    const auto [lo, hi] = bulk_window(n, 0.1);
    EXPECT_EQ(lo, 100);
    EXPECT_EQ(hi, 900);
    EXPECT_EQ(ens.size(), 801u);
}

TEST(Correlation, OnePointDensityRatio) {
    const int n = 4000;
    const auto g = classical_locations(n);
    const std::vector<std::vector<double>> rigid{std::vector<double>(g.begin(), g.end() - 1)};
    double mass = 0.0;
    for (int k = 0; k < 20000; ++k) mass += bump(-1.0 + (k + 0.5) / 10000.0) / 10000.0;
    const GapFunction phi = [mass](std::span<const double> x) { return bump(x[0]) / mass; };
    const double b = std::pow(double(n), -0.7);
    const Estimate e = correlation_estimator(rigid, n, 1, 0.0, b, phi, 64, 1.0);
    EXPECT_NEAR(e.value, 1.0, 0.05);
    const Estimate full = correlation_estimator(rigid, n, 1, 0.0, b, phi);
    EXPECT_NEAR(full.value, e.value, 1e-12);
}

TEST(Correlation, TwoPointOutsideSupportVanishes) {
    const int n = 500;
    const auto g = classical_locations(n);
    const std::vector<std::vector<double>> rigid{std::vector<double>(g.begin(), g.end() - 1)};
    const GapFunction phi = [](std::span<const double> x) { return std::abs(x[0] - x[1]) > 5000.0 ? 1.0 : 0.0; };
    EXPECT_EQ(correlation_estimator(rigid, n, 2, 0.0, 0.05, phi).value, 0.0);
}

TEST(LevelRepulsion, ClosedForms) {
    const int n = 2001;
    std::vector<double> eq(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n - 1; ++j) eq[static_cast<std::size_t>(j)] = double(j) / n;
    const double q = level_repulsion_Q(eq, n, 1000);
    EXPECT_LE(q, std::numbers::pi * std::numbers::pi / 3);
    EXPECT_GE(q, std::numbers::pi * std::numbers::pi / 3 - 0.1);
    const std::vector<double> two{0.0, 1.0 / 3.0};
    EXPECT_NEAR(level_repulsion_Q(two, 3, 0), 1.0, 1e-14);
    const std::vector<double> tied{0.5, 0.5, 0.1};
    EXPECT_TRUE(std::isinf(level_repulsion_Q(tied, 4, 0)));
}

TEST(LevelRepulsion, ResolventIdentity) {
    RngStream rng(13, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 5 + static_cast<int>(rng.below(20));
        const auto s = decompose(sample_constrained_goe(n, rng), true);
        const auto v = values(s);
        for (int i = 0; i < s.m(); ++i) {
            const double a = level_repulsion_Q(v, n, i);
            EXPECT_NEAR(level_repulsion_Q_resolvent(s, i), a, 1e-10 * a);
        }
    }
}

TEST(Delocalization, GoeBoundAndRigidSpectrum) {
    RngStream rng(2, 0);
    const auto s = decompose(sample_constrained_goe(500, rng), true);
    EXPECT_LE(delocalization_stat(s), 3 * std::sqrt(std::log(500.0)));
    const auto g = classical_locations(500);
    EXPECT_EQ(rigidity_stat(std::vector<double>(g.begin(), g.end() - 1), 500, 0.1), 0.0);
}

TEST(KolmogorovSmirnov, Basics) {
    const std::vector<double> a{0.1, 0.5, 0.9, 1.3, 2.0};
    EXPECT_EQ(ks_two_sample(a, a).statistic, 0.0);
    EXPECT_NEAR(ks_two_sample(a, a).p_value, 1.0, 1e-12);
    std::vector<double> b = a;
    for (double& x : b) x += 10;
    EXPECT_EQ(ks_two_sample(a, b).statistic, 1.0);
    const std::vector<double> c{0.2, 0.4, 0.6};
    const std::vector<double> d{0.3, 0.5};
    // ECDF difference by hand: 1/3 at 0.2 and at 0.5
    EXPECT_NEAR(ks_two_sample(c, d).statistic, 1.0 / 3.0, 1e-15);
    const std::vector<double> u{0.25, 0.75};
    EXPECT_NEAR(ks_one_sample(u, [](double x) { return x; }), 0.25, 1e-15);
    EXPECT_THROW(ks_two_sample(a, std::vector<double>{}), ParameterError);
}

TEST(KolmogorovSmirnov, IndependentGoeGapEnsembles) {
    const int n = 200;
    const auto a = gap_ensemble(goe_reference(n, 65, 1, 1), n, 0.1);
    const auto b = gap_ensemble(goe_reference(n, 65, 2, 1), n, 0.1);
    ASSERT_GT(a.size(), 10000u);
    EXPECT_LT(ks_two_sample(a.entries, b.entries).statistic, 0.03);
    EXPECT_GT(ks_two_sample(a.entries, b.entries).p_value, 0.001);
}
