#include "rrglab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "rrglab/error.hpp"
#include "rrglab/switching.hpp"

namespace rrglab {

RegularGraph::RegularGraph(int n, int d)
    : n_(n),
      d_(d),
      adjacency_(static_cast<std::size_t>(n)),
      bits_((static_cast<std::size_t>(n) * static_cast<std::size_t>(n) + 63) / 64, 0) {
    for (auto& row : adjacency_) row.reserve(static_cast<std::size_t>(d));
}

void RegularGraph::set_bit(int u, int v, bool value) {
    const std::size_t bit = static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) +
                            static_cast<std::size_t>(v);
    const std::uint64_t mask = std::uint64_t{1} << (bit & 63);
    if (value)
        bits_[bit >> 6] |= mask;
    else
        bits_[bit >> 6] &= ~mask;
}

void RegularGraph::add_edge(int u, int v) {
    auto insert_sorted = [](std::vector<int>& row, int x) {
        row.insert(std::lower_bound(row.begin(), row.end(), x), x);
    };
    insert_sorted(adjacency_[static_cast<std::size_t>(u)], v);
    insert_sorted(adjacency_[static_cast<std::size_t>(v)], u);
    set_bit(u, v, true);
    set_bit(v, u, true);
}

void RegularGraph::remove_edge(int u, int v) {
    auto erase_sorted = [](std::vector<int>& row, int x) {
        row.erase(std::lower_bound(row.begin(), row.end(), x));
    };
    erase_sorted(adjacency_[static_cast<std::size_t>(u)], v);
    erase_sorted(adjacency_[static_cast<std::size_t>(v)], u);
    set_bit(u, v, false);
    set_bit(v, u, false);
}

void RegularGraph::replace_edge_pair(int a, int b, int c, int e) {
    remove_edge(a, b);
    remove_edge(c, e);
    add_edge(a, c);
    add_edge(b, e);
}

RegularGraph RegularGraph::from_edges(int n, int d, std::span<const Edge> edges) {
    if (n < 1 || d < 0 || d >= n) {
        throw ParameterError("graph: need 0 <= d < N, got N=" + std::to_string(n) +
                             " d=" + std::to_string(d));
    }
    RegularGraph g(n, d);
    for (const auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n) throw InvariantError("graph: vertex out of range");
        if (u == v) throw InvariantError("graph: self-loop at vertex " + std::to_string(u + 1));
        if (g.has_edge(u, v)) {
            throw InvariantError("graph: repeated edge " + std::to_string(u + 1) + " " +
                                 std::to_string(v + 1));
        }
        g.add_edge(u, v);
    }
    g.validate();
    return g;
}

RegularGraph RegularGraph::from_adjacency(const Eigen::MatrixXi& adjacency) {
    const int n = static_cast<int>(adjacency.rows());
    if (adjacency.cols() != n || n == 0) throw InvariantError("graph: adjacency must be square");
    if (adjacency != adjacency.transpose()) throw InvariantError("graph: adjacency not symmetric");
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) {
        for (int v = u; v < n; ++v) {
            const int a = adjacency(u, v);
            if (a != 0 && a != 1) throw InvariantError("graph: adjacency entries must be 0/1");
            if (a == 1) edges.emplace_back(u, v);
        }
    }
    const int d = static_cast<int>(adjacency.row(0).sum());
    return from_edges(n, d, edges);
}

std::vector<RegularGraph::Edge> RegularGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(static_cast<std::size_t>(n_) * static_cast<std::size_t>(d_) / 2);
    for (int u = 0; u < n_; ++u)
        for (int v : adjacency_[static_cast<std::size_t>(u)])
            if (u < v) out.emplace_back(u, v);
    return out;
}

Eigen::MatrixXd RegularGraph::adjacency_matrix() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (int u = 0; u < n_; ++u)
        for (int v : adjacency_[static_cast<std::size_t>(u)]) a(u, v) = 1.0;
    return a;
}

void RegularGraph::validate() const {
    for (int u = 0; u < n_; ++u) {
        const auto& row = adjacency_[static_cast<std::size_t>(u)];
        if (static_cast<int>(row.size()) != d_) {
            throw InvariantError("graph: vertex " + std::to_string(u + 1) + " has degree " +
                                 std::to_string(row.size()) + ", expected " + std::to_string(d_));
        }
        if (has_edge(u, u)) throw InvariantError("graph: nonzero diagonal");
        for (int v : row)
            if (!has_edge(v, u)) throw InvariantError("graph: adjacency not symmetric");
    }
}

int indicator_I(const EdgePair& s, const RegularGraph& a) {
    const int v[4] = {s.i, s.j, s.k, s.l};
    for (int x = 0; x < 4; ++x)
        for (int y = x + 1; y < 4; ++y)
            if (v[x] == v[y]) return 0;
    int induced_degree[4] = {0, 0, 0, 0};
    for (int x = 0; x < 4; ++x) {
        for (int y = x + 1; y < 4; ++y) {
            if (a.has_edge(v[x], v[y])) {
                ++induced_degree[x];
                ++induced_degree[y];
            }
        }
    }
    for (int deg : induced_degree)
        if (deg != 1) return 0;
    return 1;
}

int indicator_J(const EdgePair& s, const EdgePair& s2) {
    const int a[4] = {s.i, s.j, s.k, s.l};
    const int b[4] = {s2.i, s2.j, s2.k, s2.l};
    for (int x : a)
        for (int y : b)
            if (x == y) return 0;
    return 1;
}

int apply_t_switch(const EdgePair& s, RegularGraph& a) {
    if (indicator_I(s, a) == 0) return 0;
    if (a.has_edge(s.i, s.j) && a.has_edge(s.k, s.l)) {
        a.replace_edge_pair(s.i, s.j, s.k, s.l);  // A - xi
        return +1;
    }
    if (a.has_edge(s.i, s.k) && a.has_edge(s.j, s.l)) {
        // A + xi: remove ik, jl; add ij, kl.
        a.replace_edge_pair(s.i, s.k, s.j, s.l);
        return -1;
    }
    return 0;
}

RegularGraph t_switch(const EdgePair& s, const RegularGraph& a) {
    RegularGraph out = a;
    apply_t_switch(s, out);
    return out;
}

RegularGraph t_switch_pair(const EdgePair& s, const EdgePair& s2, const RegularGraph& a) {
    if (indicator_J(s, s2) == 0) return a;
    RegularGraph out = a;
    apply_t_switch(s, out);
    apply_t_switch(s2, out);
    return out;
}

namespace {

std::uint64_t edge_key(int u, int v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

// One configuration-model pairing: a uniformly random perfect matching of
// the N*d stubs.
std::vector<RegularGraph::Edge> pair_stubs(int n, int d, RngStream& rng) {
    std::vector<int> stubs;
    stubs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
    for (int v = 0; v < n; ++v)
        for (int c = 0; c < d; ++c) stubs.push_back(v);
    for (std::size_t i = stubs.size(); i > 1; --i) {
        const auto jdx = static_cast<std::size_t>(rng.below(i));
        std::swap(stubs[i - 1], stubs[jdx]);
    }
    std::vector<RegularGraph::Edge> edges;
    edges.reserve(stubs.size() / 2);
    for (std::size_t i = 0; i < stubs.size(); i += 2) edges.emplace_back(stubs[i], stubs[i + 1]);
    return edges;
}

bool is_simple(const std::vector<RegularGraph::Edge>& edges) {
    std::vector<std::uint64_t> keys;
    keys.reserve(edges.size());
    for (const auto& [u, v] : edges) {
        if (u == v) return false;
        keys.push_back(edge_key(u, v));
    }
    std::sort(keys.begin(), keys.end());
    return std::adjacent_find(keys.begin(), keys.end()) == keys.end();
}

// Removes loops and multi-edges by switching each defective edge with a
// random edge whenever both replacement edges are new and non-loops. Each
// accepted move strictly lowers the defect count. Returns false when stuck,
// which happens for dense graphs where no such move exists.
bool repair_pairing(std::vector<RegularGraph::Edge>& edges, RngStream& rng) {
    std::unordered_map<std::uint64_t, int> multiplicity;
    multiplicity.reserve(edges.size() * 2);
    for (const auto& [u, v] : edges) ++multiplicity[edge_key(u, v)];
    auto defective = [&](const RegularGraph::Edge& e) {
        return e.first == e.second || multiplicity[edge_key(e.first, e.second)] > 1;
    };
    auto present = [&](int u, int v) {
        auto it = multiplicity.find(edge_key(u, v));
        return it != multiplicity.end() && it->second > 0;
    };
    const std::size_t m = edges.size();
    long long attempts = 0;
    const long long max_attempts = 200LL * static_cast<long long>(m) + 10000;
    std::vector<std::size_t> bad;
    for (;;) {
        bad.clear();
        for (std::size_t idx = 0; idx < m; ++idx)
            if (defective(edges[idx])) bad.push_back(idx);
        if (bad.empty()) return true;
        for (std::size_t b : bad) {
            if (!defective(edges[b])) continue;
            for (;;) {
                if (++attempts > max_attempts) return false;
                const auto o = static_cast<std::size_t>(rng.below(m));
                if (o == b) continue;
                auto [a1, a2] = edges[b];
                auto [c1, c2] = edges[o];
                if (rng.below(2) == 1) std::swap(c1, c2);
                // {a1,a2},{c1,c2} -> {a1,c1},{a2,c2}
                if (a1 == c1 || a2 == c2) continue;
                if (present(a1, c1) || present(a2, c2)) continue;
                if (edge_key(a1, c1) == edge_key(a2, c2)) continue;
                --multiplicity[edge_key(a1, a2)];
                --multiplicity[edge_key(c1, c2)];
                ++multiplicity[edge_key(a1, c1)];
                ++multiplicity[edge_key(a2, c2)];
                edges[b] = {a1, c1};
                edges[o] = {a2, c2};
                break;
            }
        }
    }
}

void check_parameters(int n, int d) {
    if (d < 2 || d >= n) {
        throw ParameterError("sample_initial: need 2 <= d < N, got N=" + std::to_string(n) +
                             " d=" + std::to_string(d));
    }
    if ((static_cast<long long>(n) * d) % 2 != 0) {
        throw ParameterError("sample_initial: N*d must be even, got N=" + std::to_string(n) +
                             " d=" + std::to_string(d));
    }
}

}  // namespace

RegularGraph sample_initial(int n, int d, RngStream& rng, const SamplerOptions& options) {
    check_parameters(n, d);
    SamplerMethod method = options.method;
    if (method == SamplerMethod::Auto) {
        // P(simple) ~ exp(-(d^2-1)/4) for the pairing model.
        const double expected_attempts = std::exp((static_cast<double>(d) * d - 1.0) / 4.0);
        method = expected_attempts * 20.0 <= static_cast<double>(options.restart_budget)
                     ? SamplerMethod::Restart
                     : SamplerMethod::Repair;
    }

    std::vector<RegularGraph::Edge> edges;
    if (method == SamplerMethod::Restart) {
        bool ok = false;
        for (long long attempt = 0; attempt < options.restart_budget; ++attempt) {
            edges = pair_stubs(n, d, rng);
            if (is_simple(edges)) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw SamplingError("sample_initial: restart budget of " +
                                std::to_string(options.restart_budget) + " exhausted for N=" +
                                std::to_string(n) + " d=" + std::to_string(d));
        }
    } else {
        bool ok = false;
        for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
            edges = pair_stubs(n, d, rng);
            ok = repair_pairing(edges, rng);
        }
        if (!ok)
            throw SamplingError("sample_initial: repair stalled for N=" + std::to_string(n) + " d=" +
                                std::to_string(d));
    }

    RegularGraph g = RegularGraph::from_edges(n, d, edges);
    const long long burn_in = options.burn_in_steps >= 0
                                  ? options.burn_in_steps
                                  : 20LL * static_cast<long long>(n) * static_cast<long long>(d);
    for (long long step = 0; step < burn_in; ++step) edge_pair_step(g, rng);
    return g;
}

RegularGraph sample_initial(int n, int d, std::uint64_t seed, const SamplerOptions& options) {
    RngStream rng = rng_stream(seed, 0);
    return sample_initial(n, d, rng, options);
}

void write_graph(std::ostream& out, const RegularGraph& g) {
    out << g.n() << ' ' << g.degree() << '\n';
    for (const auto& [u, v] : g.edges()) out << (u + 1) << ' ' << (v + 1) << '\n';
}

RegularGraph read_graph(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("graph file: missing header");
    std::istringstream header(line);
    int n = 0, d = 0;
    if (!(header >> n >> d)) throw IoError("graph file: malformed header '" + line + "'");
    std::vector<RegularGraph::Edge> edges;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        int u = 0, v = 0;
        if (!(row >> u >> v) || u < 1 || v < 1 || u > n || v > n || u >= v) {
            throw IoError("graph file: bad edge on line " + std::to_string(lineno));
        }
        edges.emplace_back(u - 1, v - 1);
    }
    return RegularGraph::from_edges(n, d, edges);
}

}  // namespace rrglab
