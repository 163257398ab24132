#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rrglab/graph.hpp"
#include "rrglab/matrix.hpp"
#include "rrglab/observable.hpp"
#include "rrglab/rng.hpp"
#include "rrglab/spectral.hpp"

namespace rrglab {

enum class Scheme { ExactOU, EulerMaruyama };

/// H(t) =d e^{-t/2} H0 + sqrt(1 - e^{-t}) W with W a constrained GOE sample.
ConstrainedMatrix evolve_exact(const ConstrainedMatrix& h0, double t, RngStream& rng);
ConstrainedMatrix evolve_exact(const ConstrainedMatrix& h0, double t, std::uint64_t seed);

/// Euler-Maruyama for dH = N^{-1/2} dB - H dt / 2 with increments drawn as
/// sqrt(dt) times constrained GOE samples. noise_scale = 0 switches the
/// noise off. The last step is shortened to land exactly on t.
ConstrainedMatrix evolve_sde(const ConstrainedMatrix& h0, double t, double dt, RngStream& rng,
                             double noise_scale = 1.0);
ConstrainedMatrix evolve_sde(const ConstrainedMatrix& h0, double t, double dt, std::uint64_t seed,
                             double noise_scale = 1.0);

struct DbmTrajectory {
    std::vector<double> times;
    std::vector<ConstrainedMatrix> states;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::ExactOU;
    double dt = 0.0;
};

/// States on an increasing time grid starting at 0. The exact scheme
/// chains the OU transition kernel between grid points.
DbmTrajectory simulate_trajectory(const ConstrainedMatrix& h0, std::span<const double> times,
                                  Scheme scheme, double dt, std::uint64_t seed);

struct GeneratorOptions {
    /// Dense tuple sums up to this N, uniform-tuple Monte Carlo above.
    int dense_limit = 40;
    long long sampled_tuples = 200000;
    std::uint64_t seed = 0;
};

struct GeneratorValue {
    double value = 0.0;
    double stderr_ = 0.0;  ///< zero for the dense sum
    long long n_terms = 0;
    bool dense = true;
};

/// LF(H) = (1/16N^3) sum (d_ij^kl)^2 F - (1/32N^2) sum H_ij^kl d_ij^kl F over
/// all (i,j,k,l) in [N]^4, with switch derivatives from F's probe.
GeneratorValue generator_L(const MatrixObservable& f, const ConstrainedMatrix& h,
                           const GeneratorOptions& options = {});

/// The same generator written with entry derivatives:
/// (1/N^3) sum_{ijkl} d_ij (d_ij + d_kl - d_il - d_jk) F - (1/2) sum_ij H_ij d_ij F,
/// where d_ij is the derivative along (1/2) P (E_ij + E_ji) P, P = I - e e^T.
/// Uses the probe Hessian on an N^2 x N^2 table; intended for small N.
double generator_L_entries(const MatrixObservable& f, const ConstrainedMatrix& h);

/// LF for F = (1/M) sum_k 1/(lambda_k - z) from the eigenvalue SDE:
/// (1/M) sum_i [phi''/N + (1/2N) sum_{j != i} (phi'(l_i) - phi'(l_j))/(l_i - l_j)
/// - l_i phi'(l_i)/2] with phi(x) = 1/(x - z).
std::complex<double> stieltjes_generator(std::span<const double> eigenvalues, int n,
                                         std::complex<double> z);

/// Qf(A) for f(A) = F(H_A), via the sparse switch sum and the probe.
double q_apply_observable(const MatrixObservable& f, const RegularGraph& a);

struct SeminormOptions {
    int draws = 256;       ///< sampled (theta, X) per state
    std::uint64_t seed = 0;
};

/// Sampled ||d^n F||_{r}: the L^r norm over the supplied states of the
/// maximum over random theta in [0,1]^n and X in the switch set of
/// |d_X1 ... d_Xn F(H + (d-1)^{-1/2} theta . X)|. A lower bound of the
/// supremum it replaces. order 0 gives (mean |F|^r)^{1/r}.
double estimate_seminorm(const MatrixObservable& f, int order, double r,
                         std::span<const ConstrainedMatrix> states, int d,
                         const SeminormOptions& options = {});

/// Convenience form: states are H(t) from the exact OU flow started at
/// centred uniform d-regular graphs.
double estimate_seminorm(const MatrixObservable& f, int order, double r, int n, int d, double t,
                         int samples, std::uint64_t seed, const SeminormOptions& options = {});

/// min(d, N^2 / d^3).
double sparsity_scale(int n, int d);

struct QfLfRow {
    int d = 0;
    double D = 0.0;
    int n_samples = 0;
    double mean_abs = 0.0;       ///< E |Qf - LF|
    double stderr_abs = 0.0;
    double mean_signed = 0.0;    ///< E (Qf - LF)
    double stderr_signed = 0.0;
    double seminorm_max = 0.0;   ///< max_{1..4} ||d^i F||_{r,0}
    double normalized = 0.0;     ///< mean_abs / (D^{-1/2} N seminorm_max)
    double normalized_stderr = 0.0;
};

struct QfLfReport {
    std::string observable;
    int n = 0;
    double r = 8.0;
    std::vector<QfLfRow> rows;
    /// Every consecutive decrease of `normalized` exceeds the combined
    /// standard error.
    bool monotone = false;
    bool raw_monotone = false;  ///< same test on mean_abs
};

struct QfLfOptions {
    double r = 8.0;
    /// States used for the seminorm estimate (a prefix of the samples).
    int seminorm_samples = 32;
    SeminormOptions seminorm;
    GeneratorOptions generator;
    SamplerOptions sampler;
};

/// For each d: uniform graph samples A, f(A) = F(H_A), and |Qf(A) - LF(H_A)|.
QfLfReport qf_lf_compare(const MatrixObservable& f, int n, std::span<const int> d_list, int samples,
                         std::uint64_t seed, const QfLfOptions& options = {});

}  // namespace rrglab
