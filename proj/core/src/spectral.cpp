#include "rrglab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <cblas.h>
#include <lapacke.h>

#include <Eigen/Eigenvalues>

#include "rrglab/error.hpp"

namespace rrglab {

bool blas_gemm_healthy() {
    static const bool healthy = [] {
        const int n = 256;
        const int k = 64;
        Matrix a(n, k);
        Matrix b(k, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) {
                a(i, j) = std::sin(1.0 + i + 7.0 * j);
                b(j, i) = std::cos(2.0 + 3.0 * i - j);
            }
        Matrix c(n, n);
        cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, n, n, k, 1.0, a.data(), n, b.data(), k, 0.0,
                    c.data(), n);
        double err = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int l = 0; l < k; ++l) s += a(i, l) * b(l, j);
                err = std::max(err, std::abs(s - c(i, j)));
            }
        return err < 1e-10;
    }();
    return healthy;
}

Eigen::VectorXd symmetric_eigen(Matrix& a, bool with_vectors) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    Eigen::VectorXd w(n);
    if (n == 0) return w;
    if (with_vectors && !blas_gemm_healthy()) {
        const Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
        if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
        a = solver.eigenvectors();
        return solver.eigenvalues();
    }
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, with_vectors ? 'V' : 'N', 'L', n,
                                           a.data(), n, w.data());
    if (info != 0) throw NumericError("dsyevd failed with info " + std::to_string(info));
    return w;
}

SpectralDecomposition decompose(const ConstrainedMatrix& h, bool with_vectors) {
    const int n = h.n();
    if (n < 2) throw ParameterError("decompose: need N >= 2");
    const double shift = 1.0 + h.entries().cwiseAbs().rowwise().sum().maxCoeff();
    Matrix a = h.entries();
    a.array() += shift / n;
    const Eigen::VectorXd w = symmetric_eigen(a, with_vectors);

    SpectralDecomposition out;
    out.n = n;
    out.eigenvalues.resize(n - 1);
    if (!with_vectors) {
        // The shifted trivial eigenvalue sits strictly above the rest.
        for (int k = 0; k < n - 1; ++k) out.eigenvalues(k) = w(n - 2 - k);
        return out;
    }

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    int trivial = 0;
    double best = -1.0;
    for (int k = 0; k < n; ++k) {
        const double overlap = std::abs(a.col(k).sum()) * inv_sqrt_n;
        if (overlap > best) {
            best = overlap;
            trivial = k;
        }
    }
    if (best <= 0.99)
        throw DeflationError("decompose: trivial direction not identified (max overlap " +
                             std::to_string(best) + ")");
    out.trivial_overlap = best;
    out.eigenvectors.resize(n, n - 1);
    int col = 0;
    for (int k = n - 1; k >= 0; --k) {
        if (k == trivial) continue;
        out.eigenvalues(col) = w(k);
        out.eigenvectors.col(col) = a.col(k);
        ++col;
    }
    return out;
}

SpectralDecomposition decompose_block(const Matrix& block, bool with_vectors) {
    const int m = static_cast<int>(block.rows());
    Matrix a = block;
    const Eigen::VectorXd w = symmetric_eigen(a, with_vectors);
    SpectralDecomposition out;
    out.n = m + 1;
    out.eigenvalues = w.reverse();
    if (with_vectors) {
        const Eigen::VectorXd u = householder_unit(m + 1);
        out.eigenvectors = Matrix::Zero(m + 1, m);
        out.eigenvectors.topRows(m) = a.rowwise().reverse();
        const Eigen::RowVectorXd proj = u.transpose() * out.eigenvectors;
        out.eigenvectors.noalias() -= 2.0 * u * proj;
    }
    return out;
}

Complex semicircle_m(Complex z) {
    // Product of principal roots keeps Im m > 0 on the upper half plane.
    if (z.imag() == 0.0) z = Complex(z.real(), +0.0);
    return 0.5 * (-z + std::sqrt(z - 2.0) * std::sqrt(z + 2.0));
}

double semicircle_density(double x) {
    const double s = 4.0 - x * x;
    return s > 0.0 ? std::sqrt(s) / (2.0 * std::numbers::pi) : 0.0;
}

double semicircle_cdf(double x) {
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * std::numbers::pi) +
           std::asin(x / 2.0) / std::numbers::pi;
}

double semicircle_tail(double x) {
    return 1.0 - semicircle_cdf(x);
}

std::vector<double> classical_locations(int n) {
    if (n < 1) throw ParameterError("classical_locations: need N >= 1");
    std::vector<double> gamma(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        const double target = static_cast<double>(i) / n;
        double lo = -2.0;
        double hi = 2.0;
        // tail is decreasing: tail(lo) = 1 >= target >= 0 = tail(hi)
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double r = semicircle_tail(mid) - target;
            if (std::abs(r) < 1e-14) {
                lo = hi = mid;
                break;
            }
            (r > 0.0 ? lo : hi) = mid;
        }
        gamma[static_cast<std::size_t>(i - 1)] = i == n ? -2.0 : 0.5 * (lo + hi);
    }
    return gamma;
}

Complex stieltjes_empirical(std::span<const double> eigenvalues, Complex z) {
    if (eigenvalues.empty()) throw ParameterError("stieltjes_empirical: empty spectrum");
    Complex s = 0.0;
    for (double l : eigenvalues) s += 1.0 / (l - z);
    return s / static_cast<double>(eigenvalues.size());
}

Complex stieltjes_empirical(const SpectralDecomposition& spec, Complex z) {
    return stieltjes_empirical(std::span<const double>(spec.eigenvalues.data(),
                                                       static_cast<std::size_t>(spec.m())),
                               z);
}

namespace {
void require_vectors(const SpectralDecomposition& spec, const char* what) {
    if (!spec.has_vectors()) throw ParameterError(std::string(what) + ": eigenvectors required");
}

ComplexMatrix spectral_function(const SpectralDecomposition& spec, const Eigen::VectorXcd& w) {
    const ComplexMatrix v = spec.eigenvectors.cast<Complex>();
    return v * w.asDiagonal() * v.transpose();
}
}  // namespace

ComplexMatrix green_matrix(const SpectralDecomposition& spec, Complex z) {
    require_vectors(spec, "green_matrix");
    const Eigen::VectorXcd w = (spec.eigenvalues.cast<Complex>().array() - z).inverse();
    return spectral_function(spec, w);
}

ComplexMatrix green_matrix_squared(const SpectralDecomposition& spec, Complex z) {
    require_vectors(spec, "green_matrix_squared");
    const Eigen::VectorXcd w = (spec.eigenvalues.cast<Complex>().array() - z).square().inverse();
    return spectral_function(spec, w);
}

std::vector<Complex> green_entries(const SpectralDecomposition& spec, Complex z,
                                   std::span<const std::pair<int, int>> pairs) {
    require_vectors(spec, "green_entries");
    const Eigen::VectorXcd w = (spec.eigenvalues.cast<Complex>().array() - z).inverse();
    std::vector<Complex> out;
    out.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        Complex g = 0.0;
        for (int k = 0; k < spec.m(); ++k)
            g += spec.eigenvectors(i, k) * spec.eigenvectors(j, k) * w(k);
        out.push_back(g);
    }
    return out;
}

double gamma_stat(const SpectralDecomposition& spec, Complex z) {
    return std::max(1.0, green_matrix(spec, z).cwiseAbs().maxCoeff());
}

double delocalization_stat(const SpectralDecomposition& spec) {
    require_vectors(spec, "delocalization_stat");
    return std::sqrt(static_cast<double>(spec.n)) * spec.eigenvectors.cwiseAbs().maxCoeff();
}

std::pair<int, int> bulk_window(int n, double kappa) {
    if (!(kappa > 0.0 && kappa < 0.5)) throw ParameterError("bulk window: kappa must lie in (0, 1/2)");
    const int lo = std::max(1, static_cast<int>(std::ceil(kappa * n)));
    const int hi = std::min(n - 2, static_cast<int>(std::floor((1.0 - kappa) * n)));
    return {lo, hi};
}

double rigidity_stat(std::span<const double> eigenvalues, int n, double kappa) {
    const auto gamma = classical_locations(n);
    if (!(kappa > 0.0 && kappa < 0.5)) throw ParameterError("rigidity_stat: kappa must lie in (0, 1/2)");
    const int lo = std::max(1, static_cast<int>(std::ceil(kappa * n)));
    const int hi = std::min(static_cast<int>(eigenvalues.size()),
                            static_cast<int>(std::floor((1.0 - kappa) * n)));
    double worst = 0.0;
    for (int i = lo; i <= hi; ++i)
        worst = std::max(worst, std::abs(eigenvalues[static_cast<std::size_t>(i - 1)] -
                                         gamma[static_cast<std::size_t>(i - 1)]));
    return worst;
}

double level_repulsion_Q(std::span<const double> eigenvalues, int n, int i) {
    const int m = static_cast<int>(eigenvalues.size());
    if (i < 0 || i >= m) throw ParameterError("level_repulsion_Q: index out of range");
    const double li = eigenvalues[static_cast<std::size_t>(i)];
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        const double gap = eigenvalues[static_cast<std::size_t>(j)] - li;
        if (std::abs(gap) <= 1e-12) return std::numeric_limits<double>::infinity();
        sum += 1.0 / (gap * gap);
    }
    return sum / (static_cast<double>(n) * n);
}

double level_repulsion_Q_resolvent(const SpectralDecomposition& spec, int i) {
    require_vectors(spec, "level_repulsion_Q_resolvent");
    const int m = spec.m();
    if (i < 0 || i >= m) throw ParameterError("level_repulsion_Q_resolvent: index out of range");
    Eigen::VectorXd w(m);
    for (int j = 0; j < m; ++j) {
        const double gap = spec.eigenvalues(i) - spec.eigenvalues(j);
        if (j != i && std::abs(gap) <= 1e-12) return std::numeric_limits<double>::infinity();
        w(j) = j == i ? 0.0 : 1.0 / gap;
    }
    const Matrix r = spec.eigenvectors * w.asDiagonal() * spec.eigenvectors.transpose();
    return r.squaredNorm() / (static_cast<double>(spec.n) * spec.n);
}

double GapEnsemble::mean() const {
    if (entries.empty()) throw ParameterError("gap ensemble is empty");
    double s = 0.0;
    for (double g : entries) s += g;
    return s / static_cast<double>(entries.size());
}

std::pair<double, double> GapEnsemble::fraction_below(double threshold) const {
    if (entries.empty()) throw ParameterError("gap ensemble is empty");
    const auto below = std::count_if(entries.begin(), entries.end(),
                                     [&](double g) { return g < threshold; });
    const double n = static_cast<double>(entries.size());
    const double p = static_cast<double>(below) / n;
    return {p, std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n)};
}

void append_gaps(GapEnsemble& ensemble, std::span<const double> eigenvalues, int n, int sample_id) {
    const auto gamma = classical_locations(n);
    const auto [lo, hi] = bulk_window(n, ensemble.kappa);
    const int m = static_cast<int>(eigenvalues.size());
    for (int i = lo; i <= hi && i + 1 <= m; ++i) {
        const double a = eigenvalues[static_cast<std::size_t>(i - 1)];
        const double b = eigenvalues[static_cast<std::size_t>(i)];
        double gap = a - b;
        if (gap <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a))) {
            gap = 0.0;
            ++ensemble.n_degenerate;
        }
        ensemble.entries.push_back(n * semicircle_density(gamma[static_cast<std::size_t>(i - 1)]) * gap);
        ensemble.sample_ids.push_back(sample_id);
        ensemble.indices.push_back(i);
    }
}

GapEnsemble gap_ensemble(const std::vector<std::vector<double>>& spectra, int n, double kappa) {
    GapEnsemble out;
    out.kappa = kappa;
    for (std::size_t s = 0; s < spectra.size(); ++s)
        append_gaps(out, spectra[s], n, static_cast<int>(s));
    return out;
}

namespace {
Estimate mean_and_error(const std::vector<double>& xs) {
    Estimate e;
    e.n_samples = xs.size();
    if (xs.empty()) return e;
    double s = 0.0;
    for (double x : xs) s += x;
    e.value = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double v = 0.0;
        for (double x : xs) v += (x - e.value) * (x - e.value);
        e.stderr_ = std::sqrt(v / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return e;
}
}  // namespace

Estimate gap_statistic(const std::vector<std::vector<double>>& spectra, int n_dim, int i, int n,
                       const GapFunction& phi) {
    if (spectra.empty()) throw ParameterError("gap_statistic: empty ensemble");
    if (i < 1 || n < 1) throw ParameterError("gap_statistic: need i >= 1 and n >= 1");
    const double scale = n_dim * semicircle_density(classical_locations(n_dim)[static_cast<std::size_t>(i - 1)]);
    std::vector<double> values;
    std::vector<double> x(static_cast<std::size_t>(n));
    for (const auto& lambda : spectra) {
        if (i + n > static_cast<int>(lambda.size())) throw ParameterError("gap_statistic: i + n exceeds M");
        for (int k = 1; k <= n; ++k)
            x[static_cast<std::size_t>(k - 1)] =
                scale * (lambda[static_cast<std::size_t>(i - 1)] - lambda[static_cast<std::size_t>(i - 1 + k)]);
        values.push_back(phi(x));
    }
    return mean_and_error(values);
}

double bump(double x) {
    const double s = 1.0 - x * x;
    return s > 0.0 ? std::exp(1.0 - 1.0 / s) : 0.0;
}

Estimate correlation_estimator(const std::vector<std::vector<double>>& spectra, int n_dim, int n,
                               double energy, double b, const GapFunction& phi,
                               int quadrature_nodes, double support_radius) {
    if (n != 1 && n != 2) throw ParameterError("correlation_estimator: n must be 1 or 2");
    if (!(energy > -2.0 && energy < 2.0) || b <= 0.0 || quadrature_nodes < 1)
        throw ParameterError("correlation_estimator: need E in (-2, 2), b > 0");
    if (spectra.empty()) throw ParameterError("correlation_estimator: empty ensemble");
    const double scale = n_dim * semicircle_density(energy);
    std::vector<double> values;
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<std::size_t> near;
    for (const auto& lambda : spectra) {
        const double m = static_cast<double>(lambda.size());
        const double norm = n == 1 ? n_dim / m : (static_cast<double>(n_dim) * n_dim) / (m * (m - 1.0));
        double acc = 0.0;
        for (int q = 0; q < quadrature_nodes; ++q) {
            // midpoint nodes on [E - b, E + b]
            const double e_prime = energy - b + (2.0 * b) * (q + 0.5) / quadrature_nodes;
            near.clear();
            for (std::size_t k = 0; k < lambda.size(); ++k)
                if (std::abs(lambda[k] - e_prime) * scale <= support_radius) near.push_back(k);
            double inner = 0.0;
            for (std::size_t k : near) {
                x[0] = (lambda[k] - e_prime) * scale;
                if (n == 1) {
                    inner += phi(x);
                    continue;
                }
                for (std::size_t l : near) {
                    if (l == k) continue;
                    x[1] = (lambda[l] - e_prime) * scale;
                    inner += phi(x);
                }
            }
            acc += inner;
        }
        values.push_back(norm * acc / quadrature_nodes);
    }
    return mean_and_error(values);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ParameterError("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    KsResult r;
    r.statistic = d;
    const double ne = std::sqrt(nx * ny / (nx + ny));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    if (lambda < 0.2) return r;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        q += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    r.p_value = std::clamp(q, 0.0, 1.0);
    return r;
}

double ks_one_sample(std::span<const double> values, const std::function<double(double)>& cdf) {
    if (values.empty()) throw ParameterError("ks_one_sample: empty sample");
    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double f = cdf(x[k]);
        d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
    }
    return d;
}

}  // namespace rrglab
