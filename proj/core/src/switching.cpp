#include "rrglab/switching.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "rrglab/error.hpp"

namespace rrglab {

int indicator_Iijmn(int i, int j, int m, int n, const RegularGraph& a) {
    return a.entry(i, j) * a.entry(m, n) * (1 - a.entry(i, m)) * (1 - a.entry(i, n)) *
           (1 - a.entry(j, m)) * (1 - a.entry(j, n));
}

namespace {

inline bool switch_if_allowed(RegularGraph& g, int i, int j, int m, int n) {
    if (indicator_Iijmn(i, j, m, n, g) == 0) return false;
    g.replace_edge_pair(i, j, m, n);  // A - xi_ij^mn: ij, mn -> im, jn
    return true;
}

}  // namespace

bool edge_pair_step(RegularGraph& g, RngStream& rng) {
    const auto nv = static_cast<std::uint64_t>(g.n());
    const auto deg = static_cast<std::uint64_t>(g.degree());
    const int i = static_cast<int>(rng.below(nv));
    const int j = g.neighbors(i)[static_cast<std::size_t>(rng.below(deg))];
    const int m = static_cast<int>(rng.below(nv));
    const int n = g.neighbors(m)[static_cast<std::size_t>(rng.below(deg))];
    return switch_if_allowed(g, i, j, m, n);
}

bool jump_step(JumpChainState& state, ProposalKind kind) {
    bool accepted = false;
    if (kind == ProposalKind::UniformTuple) {
        const auto nv = static_cast<std::uint64_t>(state.graph.n());
        const int i = static_cast<int>(state.rng.below(nv));
        const int j = static_cast<int>(state.rng.below(nv));
        const int m = static_cast<int>(state.rng.below(nv));
        const int n = static_cast<int>(state.rng.below(nv));
        accepted = switch_if_allowed(state.graph, i, j, m, n);
    } else {
        accepted = edge_pair_step(state.graph, state.rng);
    }
    ++state.steps_taken;
    if (accepted) ++state.accepted_switches;
    return accepted;
}

RegularGraph run_chain(const RegularGraph& a0, long long n_steps, std::uint64_t seed,
                       ProposalKind kind) {
    if (n_steps < 0) throw ParameterError("run_chain: n_steps must be >= 0");
    JumpChainState state{a0, 0, 0, rng_stream(seed, 0)};
    for (long long s = 0; s < n_steps; ++s) jump_step(state, kind);
    return std::move(state.graph);
}

void for_each_switchable(const RegularGraph& a,
                         const std::function<void(int, int, int, int)>& fn) {
    const int nv = a.n();
    for (int i = 0; i < nv; ++i) {
        for (int j : a.neighbors(i)) {
            for (int m = 0; m < nv; ++m) {
                if (m == i || m == j) continue;
                if (a.has_edge(i, m) || a.has_edge(j, m)) continue;
                for (int n : a.neighbors(m)) {
                    if (n == i || n == j) continue;
                    if (a.has_edge(i, n) || a.has_edge(j, n)) continue;
                    fn(i, j, m, n);
                }
            }
        }
    }
}

double q_apply_increments(const RegularGraph& a,
                          const std::function<double(int, int, int, int)>& delta) {
    double total = 0.0;
    for_each_switchable(a, [&](int i, int j, int m, int n) { total += delta(i, j, m, n); });
    return total / (8.0 * a.n() * a.degree());
}

double q_apply(const GraphObservable& f, const RegularGraph& a) {
    const double base = f(a);
    RegularGraph work = a;
    return q_apply_increments(a, [&](int i, int j, int m, int n) {
        work.replace_edge_pair(i, j, m, n);
        const double value = f(work);
        work.replace_edge_pair(i, m, j, n);  // undo: im, jn -> ij, mn
        return value - base;
    });
}

double q_apply_dense(const GraphObservable& f, const RegularGraph& a) {
    const int nv = a.n();
    const double base = f(a);
    double total = 0.0;
    for (int i = 0; i < nv; ++i)
        for (int j = 0; j < nv; ++j)
            for (int m = 0; m < nv; ++m)
                for (int n = 0; n < nv; ++n) {
                    if (indicator_Iijmn(i, j, m, n, a) == 0) continue;
                    Eigen::MatrixXd adj = a.adjacency_matrix();
                    apply_xi(i, j, m, n, adj, -1.0);
                    const RegularGraph next = RegularGraph::from_adjacency(adj.cast<int>());
                    total += f(next) - base;
                }
    return total / (8.0 * nv * a.degree());
}

std::uint64_t graph_code(const RegularGraph& g) {
    const int nv = g.n();
    if (nv * (nv - 1) / 2 > 64) throw SizeError("graph_code: N too large for a 64-bit code");
    std::uint64_t code = 0;
    int bit = 0;
    for (int u = 0; u < nv; ++u)
        for (int v = u + 1; v < nv; ++v, ++bit)
            if (g.has_edge(u, v)) code |= std::uint64_t{1} << bit;
    return code;
}

namespace {

struct Enumerator {
    int n;
    int d;
    std::size_t max_graphs;
    std::vector<int> remaining;
    std::vector<RegularGraph::Edge> edges;
    std::vector<RegularGraph> out;

    // Fill vertex u's remaining degree with neighbours > start, then move on.
    void fill(int u, int start) {
        if (u == n) {
            if (out.size() >= max_graphs) {
                throw SizeError("enumerate_regular_graphs: more than " +
                                std::to_string(max_graphs) + " graphs");
            }
            out.push_back(RegularGraph::from_edges(n, d, edges));
            return;
        }
        if (remaining[static_cast<std::size_t>(u)] == 0) {
            fill(u + 1, u + 2);
            return;
        }
        int available = 0;
        for (int v = start; v < n; ++v)
            if (remaining[static_cast<std::size_t>(v)] > 0) ++available;
        if (available < remaining[static_cast<std::size_t>(u)]) return;
        for (int v = start; v < n; ++v) {
            if (remaining[static_cast<std::size_t>(v)] == 0) continue;
            --remaining[static_cast<std::size_t>(u)];
            --remaining[static_cast<std::size_t>(v)];
            edges.emplace_back(u, v);
            fill(u, v + 1);
            edges.pop_back();
            ++remaining[static_cast<std::size_t>(u)];
            ++remaining[static_cast<std::size_t>(v)];
        }
    }
};

}  // namespace

std::vector<RegularGraph> enumerate_regular_graphs(int n, int d, std::size_t max_graphs) {
    if (d < 0 || d >= n || (n * d) % 2 != 0) {
        throw ParameterError("enumerate_regular_graphs: invalid N=" + std::to_string(n) +
                             " d=" + std::to_string(d));
    }
    if (n * (n - 1) / 2 > 64) throw SizeError("enumerate_regular_graphs: N too large");
    Enumerator e{n, d, max_graphs, std::vector<int>(static_cast<std::size_t>(n), d), {}, {}};
    e.fill(0, 1);
    return std::move(e.out);
}

std::string InvarianceReport::summary() const {
    std::ostringstream os;
    os << "N=" << n << " d=" << d << " states=" << n_states << " observables=" << n_observables
       << " max|sum Qf|/sum|Qf|=" << max_relative_sum << " transitions=" << n_transitions
       << " reversible=" << (reversible ? "yes" : "no") << " -> " << (passed ? "pass" : "FAIL");
    return os.str();
}

InvarianceReport invariance_check(int n, int d, int n_observables, std::uint64_t seed,
                                  double tolerance) {
    const auto states = enumerate_regular_graphs(n, d);
    std::unordered_map<std::uint64_t, std::size_t> index;
    index.reserve(states.size() * 2);
    for (std::size_t s = 0; s < states.size(); ++s) index.emplace(graph_code(states[s]), s);

    // Transition structure: for each state, the target index of every
    // accepted tuple. Tuple counts per (A, B) are exact integers.
    std::vector<std::vector<std::size_t>> targets(states.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
        RegularGraph work = states[s];
        for_each_switchable(states[s], [&](int i, int j, int m, int nn) {
            work.replace_edge_pair(i, j, m, nn);
            auto it = index.find(graph_code(work));
            if (it == index.end()) throw InvariantError("invariance_check: switch left the state space");
            targets[s].push_back(it->second);
            work.replace_edge_pair(i, m, j, nn);
        });
    }

    InvarianceReport report;
    report.n = n;
    report.d = d;
    report.n_states = states.size();
    report.n_observables = n_observables;

    std::unordered_map<std::uint64_t, long long> counts;
    for (std::size_t s = 0; s < states.size(); ++s) {
        for (std::size_t t : targets[s]) {
            ++counts[(static_cast<std::uint64_t>(s) << 32) | t];
            ++report.n_transitions;
        }
    }
    report.reversible = true;
    for (const auto& [key, c] : counts) {
        const std::uint64_t s = key >> 32;
        const std::uint64_t t = key & 0xFFFFFFFFull;
        auto it = counts.find((t << 32) | s);
        if (it == counts.end() || it->second != c) {
            report.reversible = false;
            break;
        }
    }

    const double rate = 1.0 / (8.0 * n * d);
    double worst = 0.0;
    for (int obs = 0; obs < n_observables; ++obs) {
        RngStream rng = rng_stream(seed, static_cast<std::uint64_t>(obs));
        std::vector<double> f(states.size());
        for (double& v : f) v = 2.0 * rng.uniform() - 1.0;
        double sum = 0.0, scale = 0.0;
        for (std::size_t s = 0; s < states.size(); ++s) {
            double qf = 0.0;
            for (std::size_t t : targets[s]) qf += f[t] - f[s];
            qf *= rate;
            sum += qf;
            scale += std::abs(qf);
        }
        const double relative = scale > 0.0 ? std::abs(sum) / scale : std::abs(sum);
        worst = std::max(worst, relative);
    }
    report.max_relative_sum = worst;
    report.passed = report.reversible && worst <= tolerance;
    return report;
}

}  // namespace rrglab
