#include "rrglab/dbm.hpp"

#include <algorithm>
#include <cmath>

#include "rrglab/error.hpp"
#include "rrglab/switching.hpp"

namespace rrglab {

ConstrainedMatrix evolve_exact(const ConstrainedMatrix& h0, double t, RngStream& rng) {
    if (!(t >= 0.0)) throw ParameterError("evolve_exact: need t >= 0");
    if (t == 0.0) return h0;
    const ConstrainedMatrix w = sample_constrained_goe(h0.n(), rng);
    Matrix out = std::exp(-0.5 * t) * h0.entries() + std::sqrt(-std::expm1(-t)) * w.entries();
    return ConstrainedMatrix::adopt(std::move(out));
}

ConstrainedMatrix evolve_exact(const ConstrainedMatrix& h0, double t, std::uint64_t seed) {
    RngStream rng = rng_stream(seed, 0);
    return evolve_exact(h0, t, rng);
}

ConstrainedMatrix evolve_sde(const ConstrainedMatrix& h0, double t, double dt, RngStream& rng,
                             double noise_scale) {
    if (!(dt > 0.0)) throw ParameterError("evolve_sde: need dt > 0");
    if (!(t >= 0.0)) throw ParameterError("evolve_sde: need t >= 0");
    Matrix h = h0.entries();
    double now = 0.0;
    while (now < t) {
        const double step = std::min(dt, t - now);
        h *= 1.0 - 0.5 * step;
        if (noise_scale != 0.0)
            h += (noise_scale * std::sqrt(step)) * sample_constrained_goe(h0.n(), rng).entries();
        now = (t - now - step <= 1e-12 * t) ? t : now + step;
    }
    return ConstrainedMatrix::adopt(std::move(h));
}

ConstrainedMatrix evolve_sde(const ConstrainedMatrix& h0, double t, double dt, std::uint64_t seed,
                             double noise_scale) {
    RngStream rng = rng_stream(seed, 0);
    return evolve_sde(h0, t, dt, rng, noise_scale);
}

DbmTrajectory simulate_trajectory(const ConstrainedMatrix& h0, std::span<const double> times,
                                  Scheme scheme, double dt, std::uint64_t seed) {
    if (times.empty() || times.front() != 0.0)
        throw ParameterError("simulate_trajectory: time grid must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw ParameterError("simulate_trajectory: times must increase");
    if (scheme == Scheme::EulerMaruyama && !(dt > 0.0))
        throw ParameterError("simulate_trajectory: need dt > 0");

    DbmTrajectory traj;
    traj.seed = seed;
    traj.scheme = scheme;
    traj.dt = dt;
    traj.times.assign(times.begin(), times.end());
    traj.states.push_back(h0);
    RngStream rng = rng_stream(seed, 0);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double span = times[k] - times[k - 1];
        traj.states.push_back(scheme == Scheme::ExactOU ? evolve_exact(traj.states.back(), span, rng)
                                                        : evolve_sde(traj.states.back(), span, dt, rng));
    }
    return traj;
}

GeneratorValue generator_L(const MatrixObservable& f, const ConstrainedMatrix& h,
                           const GeneratorOptions& options) {
    const int n = h.n();
    const auto probe = f.probe(h.entries());
    const double n3 = static_cast<double>(n) * n * n;
    const double c2 = 1.0 / (16.0 * n3);
    const double c1 = 1.0 / (32.0 * static_cast<double>(n) * n);

    auto term = [&](int i, int j, int k, int l) {
        if (i == l || j == k) return 0.0;  // xi_ij^kl = 0
        const SwitchDirection x{i, j, k, l};
        return c2 * probe->d2(x) - c1 * h_switch_component(h, i, j, k, l) * probe->d1(x);
    };

    GeneratorValue out;
    if (n <= options.dense_limit) {
        double total = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) total += term(i, j, k, l);
        out.value = total;
        out.n_terms = static_cast<long long>(n) * n * n * n;
        return out;
    }

    if (options.sampled_tuples < 2) throw ParameterError("generator_L: need >= 2 sampled tuples");
    RngStream rng = rng_stream(options.seed, 0);
    const double volume = n3 * n;
    double mean = 0.0;
    double m2 = 0.0;
    for (long long s = 0; s < options.sampled_tuples; ++s) {
        const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const int l = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const double v = volume * term(i, j, k, l);
        const double delta = v - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (v - mean);
    }
    const double count = static_cast<double>(options.sampled_tuples);
    out.value = mean;
    out.stderr_ = std::sqrt(m2 / (count - 1.0) / count);
    out.n_terms = options.sampled_tuples;
    out.dense = false;
    return out;
}

double generator_L_entries(const MatrixObservable& f, const ConstrainedMatrix& h) {
    const int n = h.n();
    const auto probe = f.probe(h.entries());
    const Matrix p = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n);

    auto pair_index = [n](int i, int j) {
        if (i > j) std::swap(i, j);
        return i * n - i * (i - 1) / 2 + (j - i);
    };
    const int n_pairs = n * (n + 1) / 2;
    std::vector<Matrix> dirs(static_cast<std::size_t>(n_pairs));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Matrix e = Matrix::Zero(n, n);
            e(i, j) += 0.5;
            e(j, i) += 0.5;
            dirs[static_cast<std::size_t>(pair_index(i, j))] = p * e * p;
        }

    Matrix hess(n_pairs, n_pairs);
    Eigen::VectorXd grad(n_pairs);
    for (int a = 0; a < n_pairs; ++a) {
        grad(a) = probe->gradient(dirs[static_cast<std::size_t>(a)]);
        for (int b = a; b < n_pairs; ++b) {
            const double v = probe->hessian(dirs[static_cast<std::size_t>(a)], dirs[static_cast<std::size_t>(b)]);
            hess(a, b) = v;
            hess(b, a) = v;
        }
    }

    double second = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int ij = pair_index(i, j);
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    second += hess(ij, ij) + hess(ij, pair_index(k, l)) - hess(ij, pair_index(i, l)) -
                              hess(ij, pair_index(j, k));
        }
    double first = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) first += h(i, j) * grad(pair_index(i, j));
    return second / (static_cast<double>(n) * n * n) - 0.5 * first;
}

std::complex<double> stieltjes_generator(std::span<const double> eigenvalues, int n,
                                         std::complex<double> z) {
    const std::size_t m = eigenvalues.size();
    if (m == 0) throw ParameterError("stieltjes_generator: empty spectrum");
    std::complex<double> local = 0.0;
    std::complex<double> pairs = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double a = eigenvalues[i];
        const std::complex<double> ra = 1.0 / (a - z);
        const std::complex<double> d1 = -ra * ra;
        const std::complex<double> d2 = 2.0 * ra * ra * ra;
        local += d2 / static_cast<double>(n) - 0.5 * a * d1;
        for (std::size_t j = i + 1; j < m; ++j) {
            const double b = eigenvalues[j];
            const std::complex<double> rb = 1.0 / (b - z);
            // (phi'(a) - phi'(b)) / (a - b), written without the cancellation
            pairs += (a + b - 2.0 * z) * ra * ra * rb * rb;
        }
    }
    return (local + pairs / static_cast<double>(n)) / static_cast<double>(m);
}

double q_apply_observable(const MatrixObservable& f, const RegularGraph& a) {
    const ConstrainedMatrix h = center_rescale(a);
    const auto probe = f.probe(h.entries());
    const double base = probe->value();
    const double c = 1.0 / std::sqrt(static_cast<double>(a.degree() - 1));
    return q_apply_increments(a, [&](int i, int j, int m, int n) {
        return probe->shifted(SwitchDirection{i, j, m, n}, -c) - base;
    });
}

double estimate_seminorm(const MatrixObservable& f, int order, double r,
                         std::span<const ConstrainedMatrix> states, int d,
                         const SeminormOptions& options) {
    if (order < 0 || order > 4) throw ParameterError("estimate_seminorm: order must be 0..4");
    if (!(r >= 1.0)) throw ParameterError("estimate_seminorm: need r >= 1");
    if (states.empty()) throw ParameterError("estimate_seminorm: no states");
    if (d < 2) throw ParameterError("estimate_seminorm: need d >= 2");
    const double c = 1.0 / std::sqrt(static_cast<double>(d - 1));
    const MatrixFunction fn = [&f](const Matrix& m) { return f.value(m); };

    double acc = 0.0;
    for (std::size_t s = 0; s < states.size(); ++s) {
        const Matrix& h = states[s].entries();
        const int n = static_cast<int>(h.rows());
        double sup = 0.0;
        if (order == 0) {
            sup = std::abs(f.value(h));
        } else {
            RngStream rng = rng_stream(options.seed, s);
            std::vector<SwitchDirection> dirs(static_cast<std::size_t>(order));
            for (int draw = 0; draw < options.draws; ++draw) {
                Matrix point = h;
                for (auto& x : dirs) {
                    x = SwitchDirection{static_cast<int>(rng.below(static_cast<std::uint64_t>(n))),
                                        static_cast<int>(rng.below(static_cast<std::uint64_t>(n))),
                                        static_cast<int>(rng.below(static_cast<std::uint64_t>(n))),
                                        static_cast<int>(rng.below(static_cast<std::uint64_t>(n)))};
                    apply_xi(x.i, x.j, x.k, x.l, point, c * rng.uniform());
                }
                sup = std::max(sup, std::abs(directional_derivative(
                                        fn, point, std::span<const SwitchDirection>(dirs))));
            }
        }
        acc += std::pow(sup, r);
    }
    return std::pow(acc / static_cast<double>(states.size()), 1.0 / r);
}

double estimate_seminorm(const MatrixObservable& f, int order, double r, int n, int d, double t,
                         int samples, std::uint64_t seed, const SeminormOptions& options) {
    if (samples < 1) throw ParameterError("estimate_seminorm: need samples >= 1");
    std::vector<ConstrainedMatrix> states;
    for (int s = 0; s < samples; ++s) {
        RngStream rng = rng_stream(seed, static_cast<std::uint64_t>(s));
        const ConstrainedMatrix h0 = center_rescale(sample_initial(n, d, rng));
        states.push_back(evolve_exact(h0, t, rng));
    }
    return estimate_seminorm(f, order, r, states, d, options);
}

double sparsity_scale(int n, int d) {
    const double nd = static_cast<double>(d);
    return std::min(nd, static_cast<double>(n) * n / (nd * nd * nd));
}

namespace {
bool decreasing(const std::vector<QfLfRow>& rows, double QfLfRow::*value, double QfLfRow::*err) {
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double drop = rows[k - 1].*value - rows[k].*value;
        const double combined = std::hypot(rows[k - 1].*err, rows[k].*err);
        if (!(drop > combined)) return false;
    }
    return true;
}
}  // namespace

QfLfReport qf_lf_compare(const MatrixObservable& f, int n, std::span<const int> d_list, int samples,
                         std::uint64_t seed, const QfLfOptions& options) {
    if (samples < 2) throw ParameterError("qf_lf_compare: need at least 2 samples");
    QfLfReport report;
    report.observable = f.name();
    report.n = n;
    report.r = options.r;
    for (const int d : d_list) {
        std::vector<double> diffs;
        std::vector<ConstrainedMatrix> states;
        for (int s = 0; s < samples; ++s) {
            RngStream rng = rng_stream(seed, derive_stream_id(static_cast<std::uint64_t>(d),
                                                              static_cast<std::uint64_t>(s)));
            const RegularGraph a = sample_initial(n, d, rng, options.sampler);
            const ConstrainedMatrix h = center_rescale(a);
            const double qf = q_apply_observable(f, a);
            const double lf = generator_L(f, h, options.generator).value;
            diffs.push_back(qf - lf);
            if (s < options.seminorm_samples) states.push_back(h);
        }
        QfLfRow row;
        row.d = d;
        row.D = sparsity_scale(n, d);
        row.n_samples = samples;
        const double count = static_cast<double>(samples);
        double sum_abs = 0.0;
        double sum = 0.0;
        for (double x : diffs) {
            sum_abs += std::abs(x);
            sum += x;
        }
        row.mean_abs = sum_abs / count;
        row.mean_signed = sum / count;
        double var_abs = 0.0;
        double var = 0.0;
        for (double x : diffs) {
            var_abs += (std::abs(x) - row.mean_abs) * (std::abs(x) - row.mean_abs);
            var += (x - row.mean_signed) * (x - row.mean_signed);
        }
        row.stderr_abs = std::sqrt(var_abs / (count - 1.0) / count);
        row.stderr_signed = std::sqrt(var / (count - 1.0) / count);
        for (int order = 1; order <= 4; ++order)
            row.seminorm_max = std::max(row.seminorm_max,
                                        estimate_seminorm(f, order, options.r, states, d, options.seminorm));
        const double scale = n * row.seminorm_max / std::sqrt(row.D);
        row.normalized = scale > 0.0 ? row.mean_abs / scale : 0.0;
        row.normalized_stderr = scale > 0.0 ? row.stderr_abs / scale : 0.0;
        report.rows.push_back(row);
    }
    report.monotone = decreasing(report.rows, &QfLfRow::normalized, &QfLfRow::normalized_stderr);
    report.raw_monotone = decreasing(report.rows, &QfLfRow::mean_abs, &QfLfRow::stderr_abs);
    return report;
}

}  // namespace rrglab
