#pragma once

#include <atomic>
#include <complex>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rrglab/dbm.hpp"
#include "rrglab/graph.hpp"
#include "rrglab/matrix.hpp"
#include "rrglab/spectral.hpp"

namespace rrglab {

/// Flat key/value experiment description. Every key has a default; see
/// key_values() for the list echoed into manifests.
struct ExperimentConfig {
    int n = 1000;
    int d = 32;
    int n_samples = 100;
    std::uint64_t seed = 1;
    double kappa = 0.1;
    double alpha = 0.05;
    std::vector<double> t_grid{0.0};
    std::vector<std::complex<double>> z_grid{{-1.0, 0.05}, {0.0, 0.05}, {1.0, 0.05}};
    Scheme scheme = Scheme::ExactOU;
    double dt = 1e-3;
    std::string output_dir = "rrglab-out";
    int threads = 0;  ///< 0: available cores
    long long burn_in = -1;
    bool snapshots = false;

    double energy = 0.0;
    double corr_c = 0.3;
    std::vector<int> d_list{4, 8, 16};
    int generator_n = 10;
    int qf_n = 32;
    int qf_samples = 200;
    double seminorm_r = 8.0;
    int seminorm_draws = 256;
    int seminorm_samples = 32;
    int emf_m = 8;
    int emf_p = 1;
    int emf_replicas = 10000;
    double emf_dt = 1e-4;
    std::vector<double> emf_times{0.1, 0.5};
    double ks_max = 0.05;
    double mean_tol = 0.03;
    double small_gap = 0.05;
    int observables = 10;

    /// min(d, N^2 / d^3), always recomputed.
    double sparsity() const { return sparsity_scale(n, d); }
    int worker_count() const;
    /// Empty unless N^alpha <= d <= N^{2/3 - alpha} fails.
    std::vector<std::string> regime_warnings() const;

    /// Applies one key; throws ParameterError for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Parses "key = value" lines; '#' starts a comment.
    void merge_text(const std::string& text);
    void load_file(const std::filesystem::path& path);
    /// Every key with its current value, in a fixed order.
    std::vector<std::pair<std::string, std::string>> key_values() const;
};

inline constexpr std::string_view kRecipes[] = {"sample",          "evolve",         "gap-test",
                                                "corr-test",       "semicircle-scan", "generator-check",
                                                "emf-check",       "repulsion-scan", "verify-small"};

struct RunOutcome {
    int exit_code = 0;  ///< 0 ok, 3 acceptance check failed
    std::string message;
    std::vector<std::filesystem::path> artifacts;
};

/// Runs a recipe, writing artifacts plus manifest.json into output_dir.
/// Parameter problems throw ParameterError; the CLI maps them to exit 2.
RunOutcome run_experiment(const ExperimentConfig& config, const std::string& recipe);

/// Runs fn(0..count-1) on `threads` workers; results are in index order.
template <typename T>
std::vector<T> parallel_map(std::size_t count, int threads, const std::function<T(std::size_t)>& fn) {
    std::vector<std::optional<T>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                slots[k].emplace(fn(k));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    std::vector<T> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// Nontrivial spectra of (N-1) x (N-1) GOE samples (off-diagonal variance
/// 1/N), one rng stream per sample.
std::vector<std::vector<double>> goe_reference(int n, int samples, std::uint64_t seed, int threads = 1);

/// Centred, rescaled adjacency of the uniform-graph sample for one trial
/// (stream `trial` of `seed`).
ConstrainedMatrix sample_rrg_matrix(int n, int d, std::uint64_t seed, std::uint64_t trial,
                                    const SamplerOptions& options = {});

std::vector<std::vector<double>> rrg_spectra(int n, int d, int samples, std::uint64_t seed,
                                             int threads = 1, const SamplerOptions& options = {});

std::string version_string();
std::string git_describe();

}  // namespace rrglab
