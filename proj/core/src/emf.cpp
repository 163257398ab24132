#include "rrglab/emf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "rrglab/error.hpp"

namespace rrglab {

Eigen::VectorXd EigenvaluePath::at(double t) const {
    if (times.empty()) throw ParameterError("eigenvalue path is empty");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto k = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    return (1.0 - w) * values[k - 1] + w * values[k];
}

double EigenvaluePath::min_gap() const {
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& v : values)
        for (Eigen::Index i = 0; i < v.size(); ++i)
            for (Eigen::Index j = i + 1; j < v.size(); ++j) gap = std::min(gap, std::abs(v(i) - v(j)));
    return gap;
}

namespace {
void check_gaps(const Eigen::VectorXd& lambda, double min_gap, double t) {
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        for (Eigen::Index j = i + 1; j < lambda.size(); ++j)
            if (std::abs(lambda(i) - lambda(j)) <= min_gap)
                throw SingularityError("eigenvalue gap collapsed at t = " + std::to_string(t));
}
}  // namespace

EigenvaluePath simulate_eigenvalue_path(const Eigen::VectorXd& lambda0, int n, double t_end,
                                        double dt, std::uint64_t seed, double min_gap) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw ParameterError("eigenvalue path: need dt > 0, t_end >= 0");
    if (n < 1) throw ParameterError("eigenvalue path: need N >= 1");
    check_gaps(lambda0, min_gap, 0.0);
    const Eigen::Index m = lambda0.size();
    // order[0] is the largest eigenvalue; a step may never change it
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return lambda0(a) > lambda0(b); });
    auto smallest_gap = [&](const Eigen::VectorXd& l) {
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < order.size(); ++k) g = std::min(g, l(order[k]) - l(order[k + 1]));
        return g;
    };

    const long long n_steps = std::max<long long>(1, static_cast<long long>(std::ceil(t_end / dt - 1e-9)));
    const double grid = t_end / static_cast<double>(n_steps);
    EigenvaluePath path;
    path.n = n;
    path.times.push_back(0.0);
    path.values.push_back(lambda0);
    RngStream rng = rng_stream(seed, 0);
    Eigen::VectorXd lambda = lambda0;
    Eigen::VectorXd next(m);
    for (long long s = 1; s <= n_steps; ++s) {
        const double target = s == n_steps ? t_end : static_cast<double>(s) * grid;
        double t = path.times.back();
        while (t < target) {
            // noise per step stays a small fraction of the smallest gap
            const double gap = smallest_gap(lambda);
            double h = std::min(target - t, 0.01 * n * gap * gap);
            for (;;) {
                const double sigma = std::sqrt(2.0 * h / n);
                for (Eigen::Index i = 0; i < m; ++i) {
                    double repulsion = 0.0;
                    for (Eigen::Index j = 0; j < m; ++j)
                        if (j != i) repulsion += 1.0 / (lambda(i) - lambda(j));
                    next(i) = lambda(i) + sigma * rng.normal() + h * (repulsion / n - 0.5 * lambda(i));
                }
                if (smallest_gap(next) > min_gap) break;
                h *= 0.25;
                if (h < 1e-300 || t + h == t)
                    throw SingularityError("eigenvalue gap collapsed at t = " + std::to_string(t));
            }
            lambda.swap(next);
            t = (target - t - h <= 1e-15 * std::max(1.0, target)) ? target : t + h;
            path.times.push_back(t);
            path.values.push_back(lambda);
        }
    }
    return path;
}

EigenvaluePath simulate_separated_eigenvalue_path(const Eigen::VectorXd& lambda0, int n, double t_end,
                                                  double dt, std::uint64_t seed, int max_attempts,
                                                  double min_gap) {
    for (int k = 0; k < max_attempts; ++k) {
        const std::uint64_t s = k == 0 ? seed : derive_stream_id(seed, static_cast<std::uint64_t>(k));
        try {
            EigenvaluePath path = simulate_eigenvalue_path(lambda0, n, t_end, dt, s, min_gap);
            path.redraws = k;
            return path;
        } catch (const SingularityError&) {
            if (k == 0) check_gaps(lambda0, min_gap, 0.0);
        }
    }
    throw SingularityError("eigenvalue path: every attempt reached a near collision");
}

ParticleSpace::ParticleSpace(int m, int p) : m_(m), p_(p) {
    if (m < 1 || p < 0) throw ParameterError("particle space: need M >= 1, p >= 0");
    std::vector<int> eta(static_cast<std::size_t>(m), 0);
    // compositions of p into m parts, lexicographically decreasing in eta_1
    auto fill = [&](auto&& self, int site, int left) -> void {
        if (site == m - 1) {
            eta[static_cast<std::size_t>(site)] = left;
            configs_.push_back(eta);
            return;
        }
        for (int k = left; k >= 0; --k) {
            eta[static_cast<std::size_t>(site)] = k;
            self(self, site + 1, left - k);
        }
    };
    fill(fill, 0, p);
    if (configs_.size() > 200000) throw SizeError("particle space too large");
}

std::size_t ParticleSpace::index(std::span<const int> eta) const {
    const auto it = std::lower_bound(configs_.begin(), configs_.end(), eta,
                                     [](const std::vector<int>& a, std::span<const int> b) {
                                         return std::lexicographical_compare(b.begin(), b.end(),
                                                                             a.begin(), a.end());
                                     });
    if (it == configs_.end() || !std::equal(it->begin(), it->end(), eta.begin(), eta.end()))
        throw ParameterError("configuration not in the particle space");
    return static_cast<std::size_t>(it - configs_.begin());
}

std::size_t ParticleSpace::single(int i) const {
    std::vector<int> eta(static_cast<std::size_t>(m_), 0);
    eta.at(static_cast<std::size_t>(i)) = 1;
    return index(eta);
}

Eigen::MatrixXd emf_generator(const ParticleSpace& space, const Eigen::VectorXd& lambda, int n) {
    const int m = space.sites();
    if (lambda.size() != m) throw ParameterError("emf_generator: eigenvalue count != M");
    const auto size = static_cast<Eigen::Index>(space.size());
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(size, size);
    std::vector<int> moved;
    for (Eigen::Index a = 0; a < size; ++a) {
        const auto& eta = space.config(static_cast<std::size_t>(a));
        for (int i = 0; i < m; ++i) {
            if (eta[static_cast<std::size_t>(i)] == 0) continue;
            for (int j = 0; j < m; ++j) {
                if (j == i) continue;
                const double gap = lambda(i) - lambda(j);
                const double rate = eta[static_cast<std::size_t>(i)] *
                                    (1.0 + 2.0 * eta[static_cast<std::size_t>(j)]) / (n * gap * gap);
                moved = eta;
                --moved[static_cast<std::size_t>(i)];
                ++moved[static_cast<std::size_t>(j)];
                const auto b = static_cast<Eigen::Index>(space.index(moved));
                r(a, b) += rate;
                r(a, a) -= rate;
            }
        }
    }
    return r;
}

namespace {
// Largest exit rate of R(s) over s in [t0, t1]. Each gap is linear between
// path knots and keeps its sign, so its minimum sits at a knot or an end.
double max_exit_rate(const EigenvaluePath& path, const ParticleSpace& space, double t0, double t1) {
    const Eigen::Index m = path.m();
    Eigen::MatrixXd min_gap = Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::infinity());
    auto visit = [&](const Eigen::VectorXd& l) {
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                if (i != j) min_gap(i, j) = std::min(min_gap(i, j), std::abs(l(i) - l(j)));
    };
    visit(path.at(t0));
    visit(path.at(t1));
    auto it = std::upper_bound(path.times.begin(), path.times.end(), t0);
    for (; it != path.times.end() && *it < t1; ++it)
        visit(path.values[static_cast<std::size_t>(it - path.times.begin())]);

    double worst = 0.0;
    for (std::size_t a = 0; a < space.size(); ++a) {
        const auto& eta = space.config(a);
        double rate = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (eta[static_cast<std::size_t>(i)] == 0) continue;
            for (Eigen::Index j = 0; j < m; ++j)
                if (j != i)
                    rate += eta[static_cast<std::size_t>(i)] * (1.0 + 2.0 * eta[static_cast<std::size_t>(j)]) /
                            (path.n * min_gap(i, j) * min_gap(i, j));
        }
        worst = std::max(worst, rate);
    }
    return worst;
}
}  // namespace

EmfResult emf_solve(const EigenvaluePath& path, const ParticleSpace& space, const Eigen::VectorXd& f0,
                    double t_end, const EmfOptions& options) {
    if (f0.size() != static_cast<Eigen::Index>(space.size()))
        throw ParameterError("emf_solve: f0 has the wrong size");
    if (!(t_end >= 0.0) || t_end > path.t_end() + 1e-12)
        throw ParameterError("emf_solve: t_end outside the eigenvalue path");
    if (path.min_gap() <= options.min_gap) throw SingularityError("emf_solve: eigenvalue gap collapsed");
    for (std::size_t k = 0; k < options.record_times.size(); ++k) {
        const double rt = options.record_times[k];
        if (rt < 0.0 || rt > t_end || (k > 0 && rt < options.record_times[k - 1]))
            throw ParameterError("emf_solve: record times must be ascending within [0, t_end]");
    }

    auto gen = [&](double t) { return emf_generator(space, path.at(t), path.n); };

    EmfResult out;
    Eigen::VectorXd f = f0;
    double t = 0.0;
    std::size_t next_record = 0;
    auto record_due = [&] {
        while (next_record < options.record_times.size() && options.record_times[next_record] <= t + 1e-14) {
            out.record_times.push_back(options.record_times[next_record]);
            out.records.push_back(f);
            ++next_record;
        }
    };
    record_due();
    while (t < t_end) {
        const Eigen::MatrixXd r0 = gen(t);
        const Eigen::VectorXd k1 = r0 * f;
        double h = std::min(options.h_max, t_end - t);
        const double change = k1.cwiseAbs().maxCoeff();
        if (change > 0.0) h = std::min(h, options.change_tolerance / change);
        if (next_record < options.record_times.size())
            h = std::min(h, std::max(options.record_times[next_record] - t, 1e-15));
        for (;;) {
            const double rate = max_exit_rate(path, space, t, t + h);
            if (h * rate <= options.rate_fraction) break;
            h = std::min(0.5 * h, options.rate_fraction / rate);
        }

        const Eigen::MatrixXd r_mid = gen(t + 0.5 * h);
        const Eigen::VectorXd k2 = r_mid * (f + 0.5 * h * k1);
        const Eigen::VectorXd k3 = r_mid * (f + 0.5 * h * k2);
        const Eigen::VectorXd k4 = gen(t + h) * (f + h * k3);
        const double before = f.cwiseAbs().maxCoeff();
        f += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double after = f.cwiseAbs().maxCoeff();
        const double growth = after - before;
        out.max_norm_growth = std::max(out.max_norm_growth, growth);
        if (growth > 1e-14 * std::max(1.0, before)) out.contraction_held = false;

        t = (t_end - t - h <= 1e-14 * std::max(1.0, t_end)) ? t_end : t + h;
        ++out.steps;
        record_due();
    }
    out.f_end = f;
    return out;
}

void orthonormalize_rows(Eigen::MatrixXd& v) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) v.row(i) -= v.row(i).dot(v.row(j)) * v.row(j);
        const double norm = v.row(i).norm();
        if (!(norm > 0.0)) throw NumericError("orthonormalize_rows: rank deficient frame");
        v.row(i) /= norm;
    }
}

EigenvectorFlow::EigenvectorFlow(const EigenvaluePath& path, double t_end, double min_gap) {
    if (t_end > path.t_end() + 1e-12) throw ParameterError("eigenvector flow: t_end outside path");
    m_ = path.m();
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(path.n));
    for (std::size_t k = 0; k + 1 < path.times.size() && path.times[k] < t_end; ++k) {
        const Eigen::VectorXd& lambda = path.values[k];
        Step step;
        step.t0 = path.times[k];
        step.dt = std::min(path.times[k + 1], t_end) - path.times[k];
        step.noise = Eigen::MatrixXd::Zero(m_, m_);
        step.decay = Eigen::VectorXd::Zero(m_);
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < m_; ++j) {
                if (i == j) continue;
                const double gap = lambda(i) - lambda(j);
                if (std::abs(gap) <= min_gap) throw SingularityError("eigenvector flow: gap collapsed");
                step.noise(i, j) = inv_sqrt_n / gap;
                step.decay(i) += 0.5 / (path.n * gap * gap);
            }
        steps_.push_back(std::move(step));
    }
}

std::vector<Eigen::MatrixXd> EigenvectorFlow::run_recorded(const Eigen::MatrixXd& v0,
                                                           std::span<const double> times,
                                                           RngStream& rng, double noise_scale) const {
    if (v0.rows() != m_ || v0.cols() != m_) throw ParameterError("eigenvector flow: frame must be M x M");
    std::vector<Eigen::MatrixXd> out;
    Eigen::MatrixXd v = v0;
    Eigen::MatrixXd a(m_, m_);
    std::size_t next = 0;
    double t = 0.0;
    auto record = [&] {
        while (next < times.size() && times[next] <= t + 1e-12) {
            out.push_back(v);
            ++next;
        }
    };
    record();
    for (const auto& step : steps_) {
        const double sd = noise_scale * std::sqrt(step.dt);
        for (int i = 0; i < m_; ++i) {
            a(i, i) = -step.dt * step.decay(i);
            for (int j = i + 1; j < m_; ++j) {
                const double db = sd * rng.normal();  // dB_ij = dB_ji
                a(i, j) = db * step.noise(i, j);
                a(j, i) = db * step.noise(j, i);
            }
        }
        v += a * v;
        orthonormalize_rows(v);
        t = step.t0 + step.dt;
        record();
    }
    return out;
}

Eigen::MatrixXd EigenvectorFlow::run(const Eigen::MatrixXd& v0, RngStream& rng, double noise_scale) const {
    const double t_end = steps_.empty() ? 0.0 : steps_.back().t0 + steps_.back().dt;
    const std::array<double, 1> at{t_end};
    return run_recorded(v0, at, rng, noise_scale).back();
}

Eigen::MatrixXd eigenvector_sde(const EigenvaluePath& path, const Eigen::MatrixXd& v0, double t_end,
                                RngStream& rng, double noise_scale, double min_gap) {
    return EigenvectorFlow(path, t_end, min_gap).run(v0, rng, noise_scale);
}

}  // namespace rrglab
