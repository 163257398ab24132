#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rrglab/rng.hpp"

namespace rrglab {

/// Eigenvalue trajectories on a time grid, linearly interpolated between
/// snapshots. values[k] holds lambda_1..lambda_M at times[k].
struct EigenvaluePath {
    int n = 0;  ///< normalisation N in the SDE (N = M + 1 on e-perp)
    std::vector<double> times;
    std::vector<Eigen::VectorXd> values;
    int redraws = 0;  ///< discarded attempts, see simulate_separated_eigenvalue_path

    int m() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
    double t_end() const { return times.empty() ? 0.0 : times.back(); }
    Eigen::VectorXd at(double t) const;
    /// Smallest |lambda_i - lambda_j| over all snapshots.
    double min_gap() const;
};

/// Euler scheme for d lambda_i = dB_ii / sqrt(N) + (1/N) sum_{j != i} dt /
/// (lambda_i - lambda_j) - lambda_i dt / 2, with Var dB_ii = 2 dt. Within each
/// grid interval of length dt the step shrinks to 0.01 N g^2 (g the smallest
/// gap) and a step that would reorder the eigenvalues is retried at a quarter
/// of the size. Every step is stored, grid points included. Throws
/// SingularityError if a gap cannot be kept above min_gap.
EigenvaluePath simulate_eigenvalue_path(const Eigen::VectorXd& lambda0, int n, double t_end,
                                        double dt, std::uint64_t seed, double min_gap = 1e-8);

/// simulate_eigenvalue_path, redrawn with stream derive_stream_id(seed, k) for
/// k = 1, 2, ... whenever a gap reaches min_gap (attempt 0 uses seed itself).
/// Throws SingularityError after max_attempts.
EigenvaluePath simulate_separated_eigenvalue_path(const Eigen::VectorXd& lambda0, int n, double t_end,
                                                  double dt, std::uint64_t seed, int max_attempts = 32,
                                                  double min_gap = 1e-8);

/// Omega_p: configurations of p particles on M sites, in a fixed order.
class ParticleSpace {
public:
    ParticleSpace(int m, int p);

    int sites() const { return m_; }
    int particles() const { return p_; }
    std::size_t size() const { return configs_.size(); }
    const std::vector<int>& config(std::size_t k) const { return configs_[k]; }
    /// Index of a configuration; throws ParameterError if not in Omega_p.
    std::size_t index(std::span<const int> eta) const;
    /// Index of the configuration with one particle at site i (p = 1).
    std::size_t single(int i) const;

private:
    int m_;
    int p_;
    std::vector<std::vector<int>> configs_;
};

/// (R(t) f)(eta) = sum_{i != j} c_ij(t) eta_i (1 + 2 eta_j) (f(eta^{ij}) - f(eta))
/// with c_ij = 1 / (N (lambda_i - lambda_j)^2), as a dense rate matrix.
Eigen::MatrixXd emf_generator(const ParticleSpace& space, const Eigen::VectorXd& lambda, int n);

struct EmfOptions {
    /// Upper bound on h * (largest exit rate over [t, t + h]).
    double rate_fraction = 0.5;
    /// Upper bound on h * ||R f||_inf.
    double change_tolerance = 1e-3;
    double h_max = 1e-2;
    double min_gap = 1e-8;
    /// Output times (ascending, within [0, t_end]); values are recorded there.
    std::vector<double> record_times;
};

struct EmfResult {
    Eigen::VectorXd f_end;
    std::vector<double> record_times;
    std::vector<Eigen::VectorXd> records;
    std::size_t steps = 0;
    /// ||f||_inf never increased (beyond 1e-14 relative) across any step.
    bool contraction_held = true;
    double max_norm_growth = 0.0;
};

/// Integrates d f / dt = R(t) f from f0 with adaptive classical RK4.
EmfResult emf_solve(const EigenvaluePath& path, const ParticleSpace& space, const Eigen::VectorXd& f0,
                    double t_end, const EmfOptions& options = {});

/// Euler-Maruyama for dv_i = N^{-1/2} sum_{j != i} dB_ij v_j / (lambda_i - lambda_j)
/// - (1/2N) sum_{j != i} dt v_i / (lambda_i - lambda_j)^2 (Var dB_ij = dt),
/// with modified Gram-Schmidt after each step. Rows of the frame are the
/// v_i. Steps follow the path grid. noise_scale = 0 disables the noise.
Eigen::MatrixXd eigenvector_sde(const EigenvaluePath& path, const Eigen::MatrixXd& v0, double t_end,
                                RngStream& rng, double noise_scale = 1.0, double min_gap = 1e-8);

/// eigenvector_sde with the per-step coefficients of a frozen path
/// computed once, for running many replicas.
class EigenvectorFlow {
public:
    EigenvectorFlow(const EigenvaluePath& path, double t_end, double min_gap = 1e-8);

    Eigen::MatrixXd run(const Eigen::MatrixXd& v0, RngStream& rng, double noise_scale = 1.0) const;
    /// Frames at the requested times (ascending, <= t_end), one run.
    std::vector<Eigen::MatrixXd> run_recorded(const Eigen::MatrixXd& v0, std::span<const double> times,
                                              RngStream& rng, double noise_scale = 1.0) const;

private:
    struct Step {
        double t0;
        double dt;
        Eigen::MatrixXd noise;  ///< 1 / (sqrt(N) (lambda_i - lambda_j)), zero diagonal
        Eigen::VectorXd decay;  ///< (1/2N) sum_j 1 / (lambda_i - lambda_j)^2
    };
    int m_ = 0;
    std::vector<Step> steps_;
};

/// Orthonormalises the rows of v in place (modified Gram-Schmidt).
void orthonormalize_rows(Eigen::MatrixXd& v);

}  // namespace rrglab
