#include <gtest/gtest.h>

#include <cmath>

#include "rrglab/dbm.hpp"
#include "rrglab/error.hpp"
#include "rrglab/stats.hpp"
#include "rrglab/switching.hpp"

using namespace rrglab;

namespace {

double spectral_moment(const ConstrainedMatrix& h, int k) {
    // tr H^k / N; the trivial eigenvalue is 0 and does not contribute
    Matrix p = Matrix::Identity(h.n(), h.n());
    for (int a = 0; a < k; ++a) p = p * h.entries();
    return p.trace() / h.n();
}

}  // namespace

TEST(EvolveExact, ZeroTimeIsIdentity) {
    const ConstrainedMatrix h0 = sample_constrained_goe(9, 1);
    EXPECT_EQ(evolve_exact(h0, 0.0, 5).entries(), h0.entries());
    EXPECT_THROW(evolve_exact(h0, -1.0, 5), ParameterError);
}

TEST(EvolveExact, NormRelaxesAtOuRate) {
    const int n = 8;
    const double t = 0.7;
    const ConstrainedMatrix h0 = ConstrainedMatrix::adopt(3.0 * sample_constrained_goe(n, 2).entries());
    RunningStats s;
    RngStream rng(4, 0);
    for (int k = 0; k < 10000; ++k) {
        const ConstrainedMatrix h = evolve_exact(h0, t, rng);
        ASSERT_LT(h.max_row_sum(), 1e-12);
        s.add(inner_product(h, h));
    }
    const double expected = std::exp(-t) * inner_product(h0, h0) + (1 - std::exp(-t)) * n * (n - 1) / 2.0;
    EXPECT_NEAR(s.mean(), expected, 4 * s.stderr_of_mean());
}

TEST(EvolveExact, LongTimeMatchesConstrainedGoe) {
    const int n = 5;
    const ConstrainedMatrix h0 = ConstrainedMatrix::adopt(10.0 * sample_constrained_goe(n, 3).entries());
    RunningStats a, b, c;
    RngStream rng(5, 0);
    for (int k = 0; k < 20000; ++k) {
        const ConstrainedMatrix h = evolve_exact(h0, 50.0, rng);
        a.add(h(0, 0) * h(0, 0));
        b.add(h(0, 1) * h(0, 1));
        c.add(h(0, 1) * h(2, 3));
    }
    const double p = 1.0 - 1.0 / n, q = -1.0 / n;
    EXPECT_NEAR(a.mean(), 2 * p * p / n, 4 * a.stderr_of_mean());
    EXPECT_NEAR(b.mean(), (p * p + q * q) / n, 4 * b.stderr_of_mean());
    EXPECT_NEAR(c.mean(), 2 * q * q / n, 4 * c.stderr_of_mean());
}

TEST(EvolveSde, ZeroNoiseIsExponentialDecay) {
    const ConstrainedMatrix h0 = sample_constrained_goe(7, 8);
    const double t = 1.3, dt = 1e-3;
    const ConstrainedMatrix h = evolve_sde(h0, t, dt, 1, 0.0);
    const double rel = (h.entries() - std::exp(-t / 2) * h0.entries()).norm() / h0.entries().norm();
    EXPECT_LT(rel, dt);
}

TEST(EvolveSde, OneStepMean) {
    const int n = 6;
    const double dt = 0.01;
    const ConstrainedMatrix h0 = sample_constrained_goe(n, 10);
    Matrix sum = Matrix::Zero(n, n);
    const int samples = 20000;
    RngStream rng(2, 0);
    for (int k = 0; k < samples; ++k) sum += evolve_sde(h0, dt, dt, rng).entries();
    const Matrix mean = sum / samples;
    // entry noise sd is at most sqrt(2 dt / N)
    const double tol = 4 * std::sqrt(2 * dt / n / samples);
    EXPECT_LT((mean - (1 - dt / 2) * h0.entries()).cwiseAbs().maxCoeff(), tol);
}

TEST(EvolveSde, EndpointLawMatchesExactScheme) {
    const int n = 6;
    const double t = 0.5, dt = 1e-3;
    const ConstrainedMatrix h0 = ConstrainedMatrix::adopt(2.0 * sample_constrained_goe(n, 11).entries());
    RunningStats e1, e2, x1, x2;
    RngStream re(1, 0), rx(1, 1);
    for (int k = 0; k < 2000; ++k) {
        const ConstrainedMatrix a = evolve_sde(h0, t, dt, re);
        const ConstrainedMatrix b = evolve_exact(h0, t, rx);
        e1.add(spectral_moment(a, 3));
        e2.add(spectral_moment(a, 2));
        x1.add(spectral_moment(b, 3));
        x2.add(spectral_moment(b, 2));
    }
    EXPECT_NEAR(e1.mean(), x1.mean(), 4 * std::hypot(e1.stderr_of_mean(), x1.stderr_of_mean()) + 10 * dt);
    EXPECT_NEAR(e2.mean(), x2.mean(), 4 * std::hypot(e2.stderr_of_mean(), x2.stderr_of_mean()) + 10 * dt);
}

TEST(Trajectory, ExactSchemeStartsAtH0) {
    const ConstrainedMatrix h0 = sample_constrained_goe(6, 1);
    const std::vector<double> times{0.0, 0.1, 0.5};
    const DbmTrajectory tr = simulate_trajectory(h0, times, Scheme::ExactOU, 1e-3, 9);
    ASSERT_EQ(tr.states.size(), 3u);
    EXPECT_EQ(tr.states[0].entries(), h0.entries());
    const DbmTrajectory again = simulate_trajectory(h0, times, Scheme::ExactOU, 1e-3, 9);
    EXPECT_EQ(again.states[2].entries(), tr.states[2].entries());
    const std::vector<double> bad{0.0, 0.5, 0.2};
    EXPECT_THROW(simulate_trajectory(h0, bad, Scheme::ExactOU, 1e-3, 9), ParameterError);
}

TEST(Generator, ConstantIsZero) {
    const ConstrainedMatrix h = sample_constrained_goe(8, 2);
    EXPECT_EQ(generator_L(*constant_observable(4.0), h).value, 0.0);
    EXPECT_EQ(generator_L_entries(*constant_observable(4.0), h), 0.0);
}

TEST(Generator, NormIdentity) {
    const int n = 10;
    const ConstrainedMatrix h = ConstrainedMatrix::adopt(2.0 * sample_constrained_goe(n, 3).entries());
    const double analytic = n * (n - 1) / 2.0 - inner_product(h, h);
    EXPECT_NEAR(generator_L(*norm_observable(), h).value, analytic, 1e-4 * std::abs(analytic));
    EXPECT_NEAR(generator_L(*polynomial_observable(n / 2.0, 0.0), h).value, analytic, 1e-9 * std::abs(analytic));
}

TEST(Generator, TwoFormsAgree) {
    RngStream rng(17, 0);
    for (int k = 0; k < 5; ++k) {
        const int n = 8 + k;
        const ConstrainedMatrix h = sample_constrained_goe(n, rng);
        const auto f = polynomial_observable(rng.normal(), rng.normal(), sample_goe_block(n, n, rng));
        const double a = generator_L(*f, h).value;
        const double b = generator_L_entries(*f, h);
        EXPECT_NEAR(a, b, 1e-9 * std::max(std::abs(a), std::abs(b)));
    }
}

TEST(Generator, StieltjesMatchesEigenvalueGenerator) {
    const int n = 12;
    const ConstrainedMatrix h = center_rescale(sample_initial(n, 4, 6));
    const Complex z{0.2, 0.5};
    const auto spec = decompose(h, false);
    const std::vector<double> eig(spec.eigenvalues.data(), spec.eigenvalues.data() + spec.m());
    const Complex expected = stieltjes_generator(eig, n, z);
    EXPECT_NEAR(generator_L(*stieltjes_observable(z, ComplexPart::Imag), h).value, expected.imag(), 1e-10);
    EXPECT_NEAR(generator_L(*stieltjes_observable(z, ComplexPart::Real), h).value, expected.real(), 1e-10);
    EXPECT_NEAR(generator_L_entries(*stieltjes_observable(z, ComplexPart::Imag), h), expected.imag(), 1e-10);
}

TEST(Generator, SampledSumIsUnbiased) {
    const int n = 16;
    const ConstrainedMatrix h = center_rescale(sample_initial(n, 4, 2));
    const auto f = stieltjes_observable({0.0, 0.5});
    const double dense = generator_L(*f, h).value;
    GeneratorOptions opts;
    opts.dense_limit = 8;
    opts.sampled_tuples = 400000;
    const GeneratorValue mc = generator_L(*f, h, opts);
    EXPECT_FALSE(mc.dense);
    EXPECT_NEAR(mc.value, dense, 4 * mc.stderr_);
}

TEST(Generator, TimeDerivativeOfExpectation) {
    // d/dt E F(H(t)) at 0 from antithetic OU pairs
    const int n = 10;
    const ConstrainedMatrix h0 = center_rescale(sample_initial(n, 3, 12));
    const auto f = stieltjes_observable({0.1, 0.5});
    const double t = 2e-3;
    const double decay = std::exp(-t / 2), spread = std::sqrt(1 - std::exp(-t));
    const double f0 = f->value(h0.entries());
    RunningStats slope;
    RngStream rng(3, 0);
    for (int k = 0; k < 6000; ++k) {
        const Matrix w = (evolve_exact(h0, t, rng).entries() - decay * h0.entries()) / spread;
        const double up = f->value(decay * h0.entries() + spread * w);
        const double down = f->value(decay * h0.entries() - spread * w);
        slope.add((0.5 * (up + down) - f0) / t);
    }
    const double lf = generator_L(*f, h0).value;
    EXPECT_NEAR(slope.mean(), lf, 4 * slope.stderr_of_mean() + 0.01 * std::abs(lf));
}

TEST(QfLf, ConstantObservableVanishes) {
    const std::vector<int> ds{3, 4};
    QfLfOptions opts;
    opts.seminorm_samples = 2;
    const QfLfReport r = qf_lf_compare(*constant_observable(1.0), 10, ds, 4, 1, opts);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.mean_abs, 0.0);
        EXPECT_EQ(row.normalized, 0.0);
    }
}

TEST(QfLf, LinearObservableDiscrepancyShrinks) {
    const int n = 16;
    RngStream rng(5, 0);
    const auto f = linear_observable(sample_constrained_goe(n, rng).entries());
    const std::vector<int> ds{4, 8, 12};
    QfLfOptions opts;
    opts.seminorm_samples = 4;
    opts.seminorm.draws = 64;
    const QfLfReport r = qf_lf_compare(*f, n, ds, 60, 7, opts);
    for (const auto& row : r.rows) {
        EXPECT_TRUE(std::isfinite(row.normalized));
        EXPECT_GT(row.seminorm_max, 0.0);
    }
    for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_LT(r.rows[i].normalized, r.rows[i - 1].normalized);
}

TEST(QApplyObservable, MatchesGraphLevelSum) {
    const RegularGraph a = sample_initial(10, 3, 4);
    const auto f = stieltjes_observable({0.0, 0.5});
    const GraphObservable g = [&f](const RegularGraph& x) { return f->value(center_rescale(x).entries()); };
    EXPECT_NEAR(q_apply_observable(*f, a), q_apply(g, a), 1e-11);
}

TEST(Seminorm, ConstantAndLinear) {
    const int n = 8;
    const std::vector<ConstrainedMatrix> states{sample_constrained_goe(n, 1), sample_constrained_goe(n, 2)};
    EXPECT_NEAR(estimate_seminorm(*constant_observable(-3.0), 0, 8.0, states, 3), 3.0, 1e-14);

    const Matrix m = sample_constrained_goe(n, 3).entries();
    double sup = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) sup = std::max(sup, std::abs(h_switch_component(m, i, j, k, l)));
    SeminormOptions opts;
    opts.draws = 40000;
    EXPECT_NEAR(estimate_seminorm(*linear_observable(m), 1, 8.0, states, 3, opts), sup, 1e-6 * sup);
}

TEST(Seminorm, StableUnderSampleDoubling) {
    const auto f = stieltjes_observable({0.0, 0.5});
    SeminormOptions opts;
    opts.draws = 64;
    const double a = estimate_seminorm(*f, 2, 8.0, 24, 6, 0.0, 8, 1, opts);
    const double b = estimate_seminorm(*f, 2, 8.0, 24, 6, 0.0, 16, 1, opts);
    EXPECT_NEAR(a, b, 0.1 * b);
}

TEST(Sparsity, Scale) {
    EXPECT_EQ(sparsity_scale(32, 4), 4.0);
    EXPECT_EQ(sparsity_scale(32, 8), 2.0);
    EXPECT_EQ(sparsity_scale(32, 16), 0.25);
    EXPECT_EQ(sparsity_scale(1000, 32), 1000.0 * 1000 / 32768);
}
