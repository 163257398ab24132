#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rrglab/matrix.hpp"

namespace rrglab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Nontrivial spectrum of H restricted to e-perp.
struct SpectralDecomposition {
    int n = 0;  ///< ambient dimension N
    /// M = N - 1 eigenvalues, sorted descending.
    Eigen::VectorXd eigenvalues;
    /// N x M, column k is the unit eigenvector of eigenvalues(k). Empty when
    /// only values were requested.
    Matrix eigenvectors;
    /// |e . v| of the removed trivial eigenvector (1 for values-only runs).
    double trivial_overlap = 1.0;

    int m() const { return static_cast<int>(eigenvalues.size()); }
    bool has_vectors() const { return eigenvectors.size() > 0; }
};

/// Full symmetric eigendecomposition (LAPACK dsyevd) with the trivial pair
/// removed. In vector mode the removed pair is the one with maximal |e . v|,
/// which must exceed 0.99 (DeflationError otherwise). Internally the
/// trivial eigenvalue is first shifted above the spectrum so it cannot
/// coincide with a bulk eigenvalue.
SpectralDecomposition decompose(const ConstrainedMatrix& h, bool with_vectors = true);

/// Eigendecomposition of a (N-1) x (N-1) block acting on e-perp in the
/// Householder frame. Vectors, when requested, are mapped back to R^N.
SpectralDecomposition decompose_block(const Matrix& block, bool with_vectors = false);

/// False when a one-time 256 x 64 x 256 dgemm probe disagrees with a plain
/// loop (seen with the AVX-512 kernels of OpenBLAS 0.3.20 on some virtual
/// CPUs). Vector runs then use Eigen's solver; OPENBLAS_CORETYPE=Haswell
/// restores the LAPACK path.
bool blas_gemm_healthy();

/// Raw symmetric eigensolver: ascending values, optional vectors in place.
Eigen::VectorXd symmetric_eigen(Matrix& a, bool with_vectors);

// Semicircle law.
Complex semicircle_m(Complex z);
double semicircle_density(double x);
/// Mass of the semicircle law on [x, 2].
double semicircle_tail(double x);
double semicircle_cdf(double x);
/// gamma_1 > ... > gamma_N with i/N = semicircle_tail(gamma_i).
std::vector<double> classical_locations(int n);

Complex stieltjes_empirical(std::span<const double> eigenvalues, Complex z);
Complex stieltjes_empirical(const SpectralDecomposition& spec, Complex z);

/// G_ij = sum_k v_k(i) v_k(j) / (lambda_k - z), the Green function on e-perp.
ComplexMatrix green_matrix(const SpectralDecomposition& spec, Complex z);
/// G^2 restricted to e-perp (needed for switch derivatives).
ComplexMatrix green_matrix_squared(const SpectralDecomposition& spec, Complex z);
std::vector<Complex> green_entries(const SpectralDecomposition& spec, Complex z,
                                   std::span<const std::pair<int, int>> pairs);
/// max(1, max_ij |G_ij|).
double gamma_stat(const SpectralDecomposition& spec, Complex z);

/// sqrt(N) max_{k,i} |v_k(i)|.
double delocalization_stat(const SpectralDecomposition& spec);
/// max over bulk i in [kappa N, (1 - kappa) N] of |lambda_i - gamma_i|.
double rigidity_stat(std::span<const double> eigenvalues, int n, double kappa);

/// Q_i = N^{-2} sum_{j != i} (lambda_j - lambda_i)^{-2}; index is 0-based.
/// Returns +infinity when lambda_i is not simple (neighbour gap <= 1e-12).
double level_repulsion_Q(std::span<const double> eigenvalues, int n, int i);
/// The same quantity as tr(R_i^2) / N^2 with R_i = sum_{j != i} v_j v_j^T /
/// (lambda_i - lambda_j), evaluated from the eigenvectors.
double level_repulsion_Q_resolvent(const SpectralDecomposition& spec, int i);

/// Pooled bulk normalized gaps N rho(gamma_i) (lambda_i - lambda_{i+1}).
struct GapEnsemble {
    double kappa = 0.1;
    std::vector<double> entries;
    std::vector<int> sample_ids;
    std::vector<int> indices;  ///< 1-based i of lambda_i - lambda_{i+1}
    /// Gaps that vanished at machine precision (kept as 0 entries).
    std::size_t n_degenerate = 0;

    std::size_t size() const { return entries.size(); }
    double mean() const;
    /// Fraction of entries below a threshold, with its binomial standard error.
    std::pair<double, double> fraction_below(double threshold) const;
};

/// Bulk window: 1-based i with kappa N <= i <= (1 - kappa) N and i + 1 <= M.
std::pair<int, int> bulk_window(int n, double kappa);

void append_gaps(GapEnsemble& ensemble, std::span<const double> eigenvalues, int n, int sample_id);
GapEnsemble gap_ensemble(const std::vector<std::vector<double>>& spectra, int n, double kappa = 0.1);

/// Mean and standard error of a Monte Carlo average.
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n_samples = 0;
};

using GapFunction = std::function<double(std::span<const double>)>;
/// E phi(N rho(gamma_i)(lambda_i - lambda_{i+1}), ..., N rho(gamma_i)(lambda_i -
/// lambda_{i+n})) over the ensemble; i is 1-based and i + n <= M.
Estimate gap_statistic(const std::vector<std::vector<double>>& spectra, int n_dim, int i, int n,
                       const GapFunction& phi);

/// exp(1 - 1/(1 - x^2)) for |x| < 1, else 0.
double bump(double x);

/// Locally averaged n-point correlation integral (n = 1 or 2):
/// (1/2b) int dE' N^n / (M)_n sum over distinct ordered tuples of
/// phi((lambda - E') N rho(E)), with 64 uniform quadrature nodes on
/// [E - b, E + b] and the Monte Carlo average over spectra. When phi
/// vanishes as soon as some |x_a| > support_radius, pass that radius to skip
/// eigenvalues that cannot contribute.
Estimate correlation_estimator(const std::vector<std::vector<double>>& spectra, int n_dim, int n,
                               double energy, double b, const GapFunction& phi,
                               int quadrature_nodes = 64,
                               double support_radius = std::numeric_limits<double>::infinity());

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};
/// Two-sample Kolmogorov-Smirnov with the asymptotic Kolmogorov p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);
/// Sup distance between the empirical CDF of the values and a reference CDF.
double ks_one_sample(std::span<const double> values, const std::function<double(double)>& cdf);

}  // namespace rrglab
