#include "rrglab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "rrglab/emf.hpp"
#include "rrglab/error.hpp"
#include "rrglab/observable.hpp"
#include "rrglab/stats.hpp"
#include "rrglab/switching.hpp"

#ifndef RRGLAB_VERSION_STRING
#define RRGLAB_VERSION_STRING "unknown"
#endif
#ifndef RRGLAB_GIT_DESCRIBE
#define RRGLAB_GIT_DESCRIBE "unknown"
#endif

namespace rrglab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string version_string() { return RRGLAB_VERSION_STRING; }
std::string git_describe() { return RRGLAB_GIT_DESCRIBE; }

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    T value{};
    in >> value;
    if (!in || !(in >> std::ws).eof())
        throw ParameterError("config key '" + key + "': cannot parse '" + text + "'");
    return value;
}

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k > 0) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += fmt(xs[k]);
        else
            out += std::to_string(xs[k]);
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParameterError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace

int ExperimentConfig::worker_count() const {
    if (threads > 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> ExperimentConfig::regime_warnings() const {
    std::vector<std::string> out;
    const double lo = std::pow(static_cast<double>(n), alpha);
    const double hi = std::pow(static_cast<double>(n), 2.0 / 3.0 - alpha);
    if (d < lo || d > hi) {
        std::ostringstream msg;
        msg << "d = " << d << " lies outside [N^alpha, N^(2/3 - alpha)] = [" << lo << ", " << hi
            << "] for N = " << n << ", alpha = " << alpha;
        out.push_back(msg.str());
    }
    return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (key == "n") n = parse_number<int>(key, v);
    else if (key == "d") d = parse_number<int>(key, v);
    else if (key == "samples") n_samples = parse_number<int>(key, v);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, v);
    else if (key == "kappa") kappa = parse_number<double>(key, v);
    else if (key == "alpha") alpha = parse_number<double>(key, v);
    else if (key == "t_grid") {
        t_grid.clear();
        for (const auto& x : split(v, ',')) t_grid.push_back(parse_number<double>(key, x));
    } else if (key == "z_grid") {
        z_grid.clear();
        for (const auto& x : split(v, ',')) {
            const auto parts = split(x, ':');
            if (parts.size() != 2) throw ParameterError("config key 'z_grid': expected re:im, got '" + x + "'");
            z_grid.emplace_back(parse_number<double>(key, parts[0]), parse_number<double>(key, parts[1]));
        }
    } else if (key == "scheme") {
        if (v == "exact") scheme = Scheme::ExactOU;
        else if (v == "euler") scheme = Scheme::EulerMaruyama;
        else throw ParameterError("config key 'scheme': expected exact or euler");
    } else if (key == "dt") dt = parse_number<double>(key, v);
    else if (key == "output_dir") output_dir = v;
    else if (key == "threads") threads = parse_number<int>(key, v);
    else if (key == "burn_in") burn_in = parse_number<long long>(key, v);
    else if (key == "snapshots") snapshots = parse_bool(key, v);
    else if (key == "energy") energy = parse_number<double>(key, v);
    else if (key == "corr_c") corr_c = parse_number<double>(key, v);
    else if (key == "d_list") {
        d_list.clear();
        for (const auto& x : split(v, ',')) d_list.push_back(parse_number<int>(key, x));
    } else if (key == "generator_n") generator_n = parse_number<int>(key, v);
    else if (key == "qf_n") qf_n = parse_number<int>(key, v);
    else if (key == "qf_samples") qf_samples = parse_number<int>(key, v);
    else if (key == "seminorm_r") seminorm_r = parse_number<double>(key, v);
    else if (key == "seminorm_draws") seminorm_draws = parse_number<int>(key, v);
    else if (key == "seminorm_samples") seminorm_samples = parse_number<int>(key, v);
    else if (key == "emf_m") emf_m = parse_number<int>(key, v);
    else if (key == "emf_p") emf_p = parse_number<int>(key, v);
    else if (key == "emf_replicas") emf_replicas = parse_number<int>(key, v);
    else if (key == "emf_dt") emf_dt = parse_number<double>(key, v);
    else if (key == "emf_times") {
        emf_times.clear();
        for (const auto& x : split(v, ',')) emf_times.push_back(parse_number<double>(key, x));
    } else if (key == "ks_max") ks_max = parse_number<double>(key, v);
    else if (key == "mean_tol") mean_tol = parse_number<double>(key, v);
    else if (key == "small_gap") small_gap = parse_number<double>(key, v);
    else if (key == "observables") observables = parse_number<int>(key, v);
    else throw ParameterError("unknown config key '" + key + "'");
}

void ExperimentConfig::merge_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
        set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

void ExperimentConfig::load_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    merge_text(text.str());
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::key_values() const {
    std::string z;
    for (std::size_t k = 0; k < z_grid.size(); ++k) {
        if (k > 0) z += ',';
        z += fmt(z_grid[k].real()) + ":" + fmt(z_grid[k].imag());
    }
    return {
        {"n", std::to_string(n)},
        {"d", std::to_string(d)},
        {"D", fmt(sparsity())},
        {"samples", std::to_string(n_samples)},
        {"seed", std::to_string(seed)},
        {"kappa", fmt(kappa)},
        {"alpha", fmt(alpha)},
        {"t_grid", join(t_grid)},
        {"z_grid", z},
        {"scheme", scheme == Scheme::ExactOU ? "exact" : "euler"},
        {"dt", fmt(dt)},
        {"output_dir", output_dir},
        {"threads", std::to_string(worker_count())},
        {"burn_in", std::to_string(burn_in)},
        {"snapshots", snapshots ? "true" : "false"},
        {"energy", fmt(energy)},
        {"corr_c", fmt(corr_c)},
        {"d_list", join(d_list)},
        {"generator_n", std::to_string(generator_n)},
        {"qf_n", std::to_string(qf_n)},
        {"qf_samples", std::to_string(qf_samples)},
        {"seminorm_r", fmt(seminorm_r)},
        {"seminorm_draws", std::to_string(seminorm_draws)},
        {"seminorm_samples", std::to_string(seminorm_samples)},
        {"emf_m", std::to_string(emf_m)},
        {"emf_p", std::to_string(emf_p)},
        {"emf_replicas", std::to_string(emf_replicas)},
        {"emf_dt", fmt(emf_dt)},
        {"emf_times", join(emf_times)},
        {"ks_max", fmt(ks_max)},
        {"mean_tol", fmt(mean_tol)},
        {"small_gap", fmt(small_gap)},
        {"observables", std::to_string(observables)},
    };
}

std::vector<std::vector<double>> goe_reference(int n, int samples, std::uint64_t seed, int threads) {
    if (n < 2) throw ParameterError("goe_reference: need N >= 2");
    if (samples < 1) throw ParameterError("goe_reference: need at least one sample");
    return parallel_map<std::vector<double>>(
        static_cast<std::size_t>(samples), threads, [&](std::size_t trial) {
            RngStream rng = rng_stream(seed, trial);
            const SpectralDecomposition spec = decompose_block(sample_goe_block(n - 1, n, rng), false);
            return std::vector<double>(spec.eigenvalues.data(), spec.eigenvalues.data() + spec.m());
        });
}

ConstrainedMatrix sample_rrg_matrix(int n, int d, std::uint64_t seed, std::uint64_t trial,
                                    const SamplerOptions& options) {
    RngStream rng = rng_stream(seed, trial);
    return center_rescale(sample_initial(n, d, rng, options));
}

std::vector<std::vector<double>> rrg_spectra(int n, int d, int samples, std::uint64_t seed, int threads,
                                             const SamplerOptions& options) {
    if (samples < 1) throw ParameterError("rrg_spectra: need at least one sample");
    return parallel_map<std::vector<double>>(
        static_cast<std::size_t>(samples), threads, [&](std::size_t trial) {
            const SpectralDecomposition spec = decompose(sample_rrg_matrix(n, d, seed, trial, options), false);
            return std::vector<double>(spec.eigenvalues.data(), spec.eigenvalues.data() + spec.m());
        });
}

namespace {

// Stream-id tags that keep auxiliary randomness apart from the per-trial
// graph streams.
constexpr std::uint64_t kGoeTag = 0x474f45;
constexpr std::uint64_t kFlowTag = 0x464c4f57;
constexpr std::uint64_t kEmfTag = 0x454d46;
constexpr std::uint64_t kCheckTag = 0x43484b;

class Run {
public:
    Run(const ExperimentConfig& config, std::string recipe)
        : config_(config), recipe_(std::move(recipe)), dir_(config.output_dir),
          start_(std::chrono::steady_clock::now()) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw IoError("cannot create output directory " + dir_.string());
        sampler_.burn_in_steps = config.burn_in;
        for (const auto& w : config.regime_warnings()) warn(w);
        if (!blas_gemm_healthy()) warn("BLAS dgemm probe failed; eigenvectors use the Eigen solver");
    }

    const ExperimentConfig& config() const { return config_; }
    const SamplerOptions& sampler() const { return sampler_; }
    int threads() const { return config_.worker_count(); }

    void warn(const std::string& w) {
        std::cerr << "warning: " << w << '\n';
        warnings_.push_back(w);
    }

    std::ofstream open(const std::string& name) {
        const fs::path path = dir_ / name;
        fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out.imbue(std::locale::classic());
        out << std::setprecision(17);
        outcome_.artifacts.push_back(path);
        return out;
    }

    void write_report(const StatisticsReport& report) {
        auto out = open("report.json");
        out << report.to_json();
    }

    void check(bool ok, const std::string& what) {
        checks_.push_back({what, ok});
        if (!ok) outcome_.exit_code = 3;
    }

    RunOutcome finish() {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json manifest;
        manifest["recipe"] = recipe_;
        json cfg;
        for (const auto& [k, v] : config_.key_values()) cfg[k] = v;
        manifest["config"] = cfg;
        manifest["version"] = version_string();
        manifest["git_describe"] = git_describe();
        manifest["rng_algorithm"] = std::string(kRngAlgorithm);
        manifest["wall_time_seconds"] = wall;
        manifest["warnings"] = warnings_;
        json checks = json::array();
        for (const auto& [what, ok] : checks_) checks.push_back({{"check", what}, {"passed", ok}});
        manifest["checks"] = checks;
        json artifacts = json::array();
        for (const auto& p : outcome_.artifacts) artifacts.push_back(p.filename().string());
        manifest["artifacts"] = artifacts;
        manifest["exit_code"] = outcome_.exit_code;
        const fs::path path = dir_ / "manifest.json";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << manifest.dump(2) << '\n';
        outcome_.artifacts.push_back(path);
        std::ostringstream msg;
        for (const auto& [what, ok] : checks_) msg << (ok ? "ok   " : "FAIL ") << what << '\n';
        outcome_.message = msg.str();
        return outcome_;
    }

private:
    const ExperimentConfig& config_;
    std::string recipe_;
    fs::path dir_;
    std::chrono::steady_clock::time_point start_;
    SamplerOptions sampler_;
    std::vector<std::string> warnings_;
    std::vector<std::pair<std::string, bool>> checks_;
    RunOutcome outcome_;
};

void require_samples(const ExperimentConfig& c) {
    if (c.n_samples < 1) throw ParameterError("samples must be positive");
}

std::string padded(std::size_t k) {
    std::ostringstream s;
    s << std::setw(5) << std::setfill('0') << k;
    return s.str();
}

void recipe_sample(Run& run) {
    const auto& c = run.config();
    require_samples(c);
    struct Result {
        RegularGraph graph;
        double top;
        double bottom;
    };
    const auto results = parallel_map<Result>(
        static_cast<std::size_t>(c.n_samples), run.threads(), [&](std::size_t trial) {
            RngStream rng = rng_stream(c.seed, trial);
            RegularGraph g = sample_initial(c.n, c.d, rng, run.sampler());
            const auto spec = decompose(center_rescale(g), false);
            return Result{std::move(g), spec.eigenvalues(0), spec.eigenvalues(spec.m() - 1)};
        });
    auto summary = run.open("samples.csv");
    summary << "sample_id,lambda_max,lambda_min\n";
    for (std::size_t k = 0; k < results.size(); ++k) {
        auto out = run.open("graphs/sample_" + padded(k) + ".txt");
        write_graph(out, results[k].graph);
        summary << k << ',' << results[k].top << ',' << results[k].bottom << '\n';
    }
}

void recipe_evolve(Run& run) {
    const auto& c = run.config();
    require_samples(c);
    if (c.t_grid.empty() || c.t_grid.front() != 0.0) throw ParameterError("t_grid must start at 0");
    if (c.z_grid.empty()) throw ParameterError("z_grid must not be empty");
    const Complex z = c.z_grid.front();
    struct Row {
        double t, norm, top, bottom;
        Complex s;
    };
    const auto results = parallel_map<std::vector<Row>>(
        static_cast<std::size_t>(c.n_samples), run.threads(), [&](std::size_t trial) {
            const ConstrainedMatrix h0 = sample_rrg_matrix(c.n, c.d, c.seed, trial, run.sampler());
            const auto traj = simulate_trajectory(h0, c.t_grid, c.scheme, c.dt,
                                                  derive_stream_id(c.seed ^ kFlowTag, trial));
            std::vector<Row> rows;
            for (std::size_t k = 0; k < traj.times.size(); ++k) {
                const auto spec = decompose(traj.states[k], false);
                rows.push_back({traj.times[k], inner_product(traj.states[k], traj.states[k]),
                                spec.eigenvalues(0), spec.eigenvalues(spec.m() - 1),
                                stieltjes_empirical(spec, z)});
                if (c.snapshots) {
                    auto out = run.open("snapshots/sample_" + padded(trial) + "_t" + padded(k) + ".bin");
                    write_matrix_snapshot(out, traj.states[k].entries());
                }
            }
            return rows;
        });
    auto out = run.open("evolve.csv");
    out << "sample_id,t,inner_norm,lambda_max,lambda_min,s_re,s_im\n";
    for (std::size_t k = 0; k < results.size(); ++k)
        for (const auto& r : results[k])
            out << k << ',' << r.t << ',' << r.norm << ',' << r.top << ',' << r.bottom << ','
                << r.s.real() << ',' << r.s.imag() << '\n';
}

void recipe_gap_test(Run& run) {
    const auto& c = run.config();
    require_samples(c);
    const auto rrg = rrg_spectra(c.n, c.d, c.n_samples, c.seed, run.threads(), run.sampler());
    const auto goe = goe_reference(c.n, c.n_samples, derive_stream_id(c.seed, kGoeTag), run.threads());
    const GapEnsemble a = gap_ensemble(rrg, c.n, c.kappa);
    const GapEnsemble b = gap_ensemble(goe, c.n, c.kappa);
    const KsResult ks = ks_two_sample(a.entries, b.entries);
    {
        auto out = run.open("rrg_gaps.csv");
        write_gaps_csv(out, a);
    }
    {
        auto out = run.open("goe_gaps.csv");
        write_gaps_csv(out, b);
    }
    {
        const auto ha = histogram_density(a.entries, 0.0, 4.0, 80);
        const auto hb = histogram_density(b.entries, 0.0, 4.0, 80);
        auto out = run.open("gap_histogram.csv");
        out << "x,rrg_density,goe_density\n";
        for (std::size_t k = 0; k < ha.size(); ++k)
            out << ha[k].first << ',' << ha[k].second << ',' << hb[k].second << '\n';
    }
    RunningStats sa, sb;
    for (double g : a.entries) sa.add(g);
    for (double g : b.entries) sb.add(g);
    StatisticsReport report;
    report.add({"ks_statistic", ks.statistic, 0.0, a.size() + b.size()});
    report.add({"ks_p_value", ks.p_value, 0.0, a.size() + b.size()});
    report.add(summarize("rrg_gap_mean", sa));
    report.add(summarize("goe_gap_mean", sb));
    report.add({"rrg_degenerate_gaps", static_cast<double>(a.n_degenerate), 0.0, a.size()});
    run.write_report(report);
    run.check(ks.statistic < c.ks_max, "KS(RRG, GOE) < ks_max");
    run.check(std::abs(sa.mean() - sb.mean()) < c.mean_tol, "|mean gap difference| < mean_tol");
}

void recipe_corr_test(Run& run) {
    const auto& c = run.config();
    require_samples(c);
    const auto rrg = rrg_spectra(c.n, c.d, c.n_samples, c.seed, run.threads(), run.sampler());
    const auto goe = goe_reference(c.n, c.n_samples, derive_stream_id(c.seed, kGoeTag), run.threads());
    const double b = std::pow(static_cast<double>(c.n), -1.0 + c.corr_c);
    // unit-mass bump for n = 1, bump times a repulsion-sensitive factor for n = 2
    double mass = 0.0;
    for (int k = 0; k < 20000; ++k) mass += bump(-1.0 + (k + 0.5) / 10000.0) / 10000.0;
    const GapFunction phi1 = [mass](std::span<const double> x) { return bump(x[0]) / mass; };
    const GapFunction phi2 = [](std::span<const double> x) { return bump(x[0]) * bump(0.5 * (x[0] - x[1])); };
    StatisticsReport report;
    auto out = run.open("correlation.csv");
    out << "n,ensemble,value,stderr,n_samples\n";
    for (int order : {1, 2}) {
        const GapFunction& phi = order == 1 ? phi1 : phi2;
        const double radius = order == 1 ? 1.0 : 3.0;
        const Estimate er = correlation_estimator(rrg, c.n, order, c.energy, b, phi, 64, radius);
        const Estimate eg = correlation_estimator(goe, c.n, order, c.energy, b, phi, 64, radius);
        out << order << ",rrg," << er.value << ',' << er.stderr_ << ',' << er.n_samples << '\n';
        out << order << ",goe," << eg.value << ',' << eg.stderr_ << ',' << eg.n_samples << '\n';
        report.add(summarize("rrg_corr_" + std::to_string(order), er));
        report.add(summarize("goe_corr_" + std::to_string(order), eg));
        const double combined = std::hypot(er.stderr_, eg.stderr_);
        run.check(std::abs(er.value - eg.value) <= 3.0 * combined,
                  std::to_string(order) + "-point correlation RRG vs GOE within 3 standard errors");
    }
    run.write_report(report);
}

void recipe_semicircle_scan(Run& run) {
    const auto& c = run.config();
    require_samples(c);
    if (c.z_grid.empty()) throw ParameterError("z_grid must not be empty");
    const auto rrg = rrg_spectra(c.n, c.d, c.n_samples, c.seed, run.threads(), run.sampler());
    auto out = run.open("stieltjes_scan.csv");
    out << "z_re,z_im,s_re,s_im,m_re,m_im\n";
    StatisticsReport report;
    double worst_margin = -1.0;
    for (const Complex z : c.z_grid) {
        if (!(z.imag() > 0.0)) throw ParameterError("z_grid points need Im z > 0");
        Complex mean = 0.0;
        double worst = 0.0;
        for (const auto& lambda : rrg) {
            const Complex s = stieltjes_empirical(lambda, z);
            mean += s;
            worst = std::max(worst, std::abs(s - semicircle_m(z)));
        }
        mean /= static_cast<double>(rrg.size());
        const Complex m = semicircle_m(z);
        out << z.real() << ',' << z.imag() << ',' << mean.real() << ',' << mean.imag() << ',' << m.real()
            << ',' << m.imag() << '\n';
        const double bound = 10.0 * (std::pow(c.sparsity(), -0.25) + std::pow(c.n * z.imag(), -0.25));
        worst_margin = std::max(worst_margin, worst / bound);
        report.add({"max_abs_s_minus_m@" + fmt(z.real()) + ":" + fmt(z.imag()), worst, 0.0, rrg.size()});
    }
    std::vector<double> pooled;
    for (const auto& lambda : rrg) pooled.insert(pooled.end(), lambda.begin(), lambda.end());
    const double cdf_distance = ks_one_sample(pooled, semicircle_cdf);
    report.add({"cdf_sup_distance", cdf_distance, 0.0, pooled.size()});
    run.write_report(report);
    run.check(worst_margin <= 1.0, "|s - m| <= 10 (D^-1/4 + (N eta)^-1/4) at every z and sample");
    run.check(cdf_distance < 0.03, "empirical CDF sup distance to the semicircle < 0.03");
}

void recipe_generator_check(Run& run) {
    const auto& c = run.config();
    const int gn = c.generator_n;
    if (gn < 4) throw ParameterError("generator_n must be at least 4");
    StatisticsReport report;

    RngStream rng = rng_stream(c.seed, kCheckTag);
    const ConstrainedMatrix h = ConstrainedMatrix::adopt(2.0 * sample_constrained_goe(gn, rng).entries());
    const double analytic = 0.5 * gn * (gn - 1) - inner_product(h, h);
    const double numeric = generator_L(*norm_observable(), h).value;
    const double rel = std::abs(numeric - analytic) / std::abs(analytic);
    report.add({"norm_generator_relative_error", rel, 0.0, 1});
    run.check(rel < 1e-4, "finite-difference L<H,H> matches N(N-1)/2 - <H,H>");

    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const ConstrainedMatrix hk = sample_constrained_goe(gn, rng);
        Matrix m = sample_goe_block(gn, gn, rng);
        const auto f = polynomial_observable(rng.normal(), rng.normal(), m);
        const double a = generator_L(*f, hk).value;
        const double b = generator_L_entries(*f, hk);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
    report.add({"generator_forms_max_relative_difference", worst, 0.0, 20});
    run.check(worst < 1e-8, "switch-sum and entry forms of L agree");

    QfLfOptions options;
    options.r = c.seminorm_r;
    options.seminorm_samples = c.seminorm_samples;
    options.seminorm.draws = c.seminorm_draws;
    options.sampler = run.sampler();
    const auto f = stieltjes_observable({c.energy, 0.5});
    const QfLfReport q = qf_lf_compare(*f, c.qf_n, c.d_list, c.qf_samples, c.seed, options);
    auto out = run.open("qf_lf.csv");
    out << "d,D,n_samples,mean_abs,stderr_abs,mean_signed,stderr_signed,seminorm_max,normalized,normalized_stderr\n";
    for (const auto& r : q.rows)
        out << r.d << ',' << r.D << ',' << r.n_samples << ',' << r.mean_abs << ',' << r.stderr_abs << ','
            << r.mean_signed << ',' << r.stderr_signed << ',' << r.seminorm_max << ',' << r.normalized << ','
            << r.normalized_stderr << '\n';
    for (const auto& r : q.rows)
        report.add({"normalized_discrepancy_d" + std::to_string(r.d), r.normalized, r.normalized_stderr,
                    static_cast<std::size_t>(r.n_samples)});
    run.write_report(report);
    run.check(q.monotone, "normalized E|Qf - LF| decreases in d beyond the standard errors");
}

double double_factorial_odd(int k) {
    double r = 1.0;
    for (int x = k; x > 1; x -= 2) r *= x;
    return r;
}

void recipe_emf_check(Run& run) {
    const auto& c = run.config();
    if (c.emf_m < 2 || c.emf_p < 1) throw ParameterError("need emf_m >= 2 and emf_p >= 1");
    if (c.emf_replicas < 2) throw ParameterError("emf_replicas must be at least 2");
    std::vector<double> times = c.emf_times;
    std::sort(times.begin(), times.end());
    if (times.empty() || times.front() < 0.0) throw ParameterError("emf_times must be nonnegative");
    const int m = c.emf_m;
    const int n = m + 1;
    const auto gamma = classical_locations(n);
    const Eigen::VectorXd lambda0 = Eigen::Map<const Eigen::VectorXd>(gamma.data(), m);
    const EigenvaluePath path =
        simulate_separated_eigenvalue_path(lambda0, n, times.back(), c.emf_dt, derive_stream_id(c.seed, kEmfTag));
    if (path.redraws > 0)
        run.warn("eigenvalue path redrawn " + std::to_string(path.redraws) + " time(s) after a near collision");

    RngStream qrng = rng_stream(c.seed, derive_stream_id(kEmfTag, 1));
    Eigen::VectorXd q(m);
    for (int i = 0; i < m; ++i) q(i) = qrng.normal();
    q.normalize();

    const ParticleSpace space(m, c.emf_p);
    auto moment = [&](const Eigen::VectorXd& overlaps, std::size_t config) {
        const auto& eta = space.config(config);
        double v = 1.0;
        for (int i = 0; i < m; ++i) {
            const int k = eta[static_cast<std::size_t>(i)];
            if (k > 0) v *= std::pow(overlaps(i), 2 * k) / double_factorial_odd(2 * k - 1);
        }
        return v;
    };
    const Eigen::VectorXd f0 = [&] {
        Eigen::VectorXd f(static_cast<Eigen::Index>(space.size()));
        for (std::size_t a = 0; a < space.size(); ++a) f(static_cast<Eigen::Index>(a)) = moment(q, a);
        return f;
    }();
    EmfOptions opts;
    opts.record_times = times;
    const EmfResult emf = emf_solve(path, space, f0, times.back(), opts);

    const EigenvectorFlow flow(path, times.back());
    const Eigen::MatrixXd v0 = Eigen::MatrixXd::Identity(m, m);
    const auto runs = parallel_map<std::vector<Eigen::VectorXd>>(
        static_cast<std::size_t>(c.emf_replicas), run.threads(), [&](std::size_t rep) {
            RngStream rng = rng_stream(c.seed, derive_stream_id(kEmfTag + 2, rep));
            std::vector<Eigen::VectorXd> overlaps;
            for (const auto& frame : flow.run_recorded(v0, times, rng)) overlaps.push_back(frame * q);
            return overlaps;
        });

    auto out = run.open("emf.csv");
    out << "time,configuration_id,value\n";
    auto mc_out = run.open("emf_monte_carlo.csv");
    mc_out << "time,configuration_id,mean,stderr,n_samples\n";
    StatisticsReport report;
    double worst_z = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        for (std::size_t a = 0; a < space.size(); ++a) {
            RunningStats s;
            for (const auto& r : runs) s.add(moment(r[k], a));
            const double ode = emf.records[k](static_cast<Eigen::Index>(a));
            out << times[k] << ',' << a << ',' << ode << '\n';
            mc_out << times[k] << ',' << a << ',' << s.mean() << ',' << s.stderr_of_mean() << ',' << s.count()
                   << '\n';
            if (s.stderr_of_mean() > 0.0) worst_z = std::max(worst_z, std::abs(ode - s.mean()) / s.stderr_of_mean());
        }
    }
    report.add({"max_standardized_difference", worst_z, 0.0, static_cast<std::size_t>(c.emf_replicas)});
    report.add({"ode_steps", static_cast<double>(emf.steps), 0.0, 1});
    report.add({"max_norm_growth", emf.max_norm_growth, 0.0, emf.steps});
    run.write_report(report);
    run.check(worst_z <= 4.0, "EMF solution within 4 standard errors of the eigenvector SDE");
    run.check(emf.contraction_held, "L-infinity contraction at every ODE step");
}

void recipe_repulsion_scan(Run& run) {
    const auto& c = run.config();
    require_samples(c);
    const auto rrg = rrg_spectra(c.n, c.d, c.n_samples, c.seed, run.threads(), run.sampler());
    const auto goe = goe_reference(c.n, c.n_samples, derive_stream_id(c.seed, kGoeTag), run.threads());
    const auto [lo, hi] = bulk_window(c.n, c.kappa);
    auto out = run.open("level_repulsion.csv");
    out << "sample_id,index,Q\n";
    std::size_t infinite = 0;
    RunningStats q_stats;
    for (std::size_t s = 0; s < rrg.size(); ++s)
        for (int i = lo; i <= hi; ++i) {
            const double q = level_repulsion_Q(rrg[s], c.n, i - 1);
            out << s << ',' << i << ',' << (std::isfinite(q) ? fmt(q) : std::string("inf")) << '\n';
            if (std::isfinite(q)) q_stats.add(q);
            else ++infinite;
        }
    const GapEnsemble a = gap_ensemble(rrg, c.n, c.kappa);
    const GapEnsemble b = gap_ensemble(goe, c.n, c.kappa);
    const auto [fa, ea] = a.fraction_below(c.small_gap);
    const auto [fb, eb] = b.fraction_below(c.small_gap);
    StatisticsReport report;
    report.add(summarize("bulk_Q_mean", q_stats));
    report.add({"degenerate_Q", static_cast<double>(infinite), 0.0, q_stats.count() + infinite});
    report.add({"rrg_small_gap_fraction", fa, ea, a.size()});
    report.add({"goe_small_gap_fraction", fb, eb, b.size()});
    run.write_report(report);
    run.check(fa < 0.02, "fraction of RRG gaps below small_gap < 2%");
    run.check(std::abs(fa - fb) <= 3.0 * std::hypot(ea, eb), "RRG and GOE small-gap fractions agree");
}

void recipe_verify_small(Run& run) {
    const auto& c = run.config();
    const InvarianceReport r = invariance_check(c.n, c.d, c.observables, c.seed);
    StatisticsReport report;
    report.add({"states", static_cast<double>(r.n_states), 0.0, r.n_states});
    report.add({"transitions", static_cast<double>(r.n_transitions), 0.0, r.n_states});
    report.add({"max_relative_sum", r.max_relative_sum, 0.0, static_cast<std::size_t>(r.n_observables)});
    report.add({"reversible", r.reversible ? 1.0 : 0.0, 0.0, r.n_states});
    run.write_report(report);
    run.check(r.max_relative_sum <= 1e-10, "sum_A Qf(A) = 0 for every observable");
    run.check(r.reversible, "jump kernel reversible");
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, const std::string& recipe) {
    if (config.n < 2 || config.d < 1) throw ParameterError("need N >= 2 and d >= 1");
    if (!(config.kappa > 0.0 && config.kappa < 0.5)) throw ParameterError("kappa must lie in (0, 1/2)");
    using Fn = void (*)(Run&);
    static const std::map<std::string, Fn> table = {
        {"sample", recipe_sample},
        {"evolve", recipe_evolve},
        {"gap-test", recipe_gap_test},
        {"corr-test", recipe_corr_test},
        {"semicircle-scan", recipe_semicircle_scan},
        {"generator-check", recipe_generator_check},
        {"emf-check", recipe_emf_check},
        {"repulsion-scan", recipe_repulsion_scan},
        {"verify-small", recipe_verify_small},
    };
    const auto it = table.find(recipe);
    if (it == table.end()) throw ParameterError("unknown recipe '" + recipe + "'");
    Run run(config, recipe);
    it->second(run);
    return run.finish();
}

}  // namespace rrglab
