#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rrglab/rng.hpp"

namespace rrglab {

/// Two directed edges i->j and k->l of the complete graph. Indices are
/// 0-based; they need not be distinct (switchability is decided by
/// indicator_I).
struct EdgePair {
    int i = 0;
    int j = 0;
    int k = 0;
    int l = 0;

    friend bool operator==(const EdgePair&, const EdgePair&) = default;
};

/// Simple d-regular graph on N vertices.
///
/// Stored as sorted neighbour lists plus an N*N membership bitset so that
/// has_edge is O(1) and a switching touches O(d) memory. The public surface
/// is read-only; the only mutation is apply_switch / the switching chain,
/// which operate on a value the caller owns.
class RegularGraph {
public:
    using Edge = std::pair<int, int>;

    /// Validates symmetry, simplicity and constant degree.
    static RegularGraph from_edges(int n, int d, std::span<const Edge> edges);
    /// Builds from a dense 0/1 adjacency matrix (validated).
    static RegularGraph from_adjacency(const Eigen::MatrixXi& adjacency);

    int n() const { return n_; }
    int degree() const { return d_; }

    bool has_edge(int u, int v) const {
        const std::size_t bit = static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) +
                                static_cast<std::size_t>(v);
        return (bits_[bit >> 6] >> (bit & 63)) & 1u;
    }
    int entry(int u, int v) const { return has_edge(u, v) ? 1 : 0; }

    std::span<const int> neighbors(int u) const { return adjacency_[static_cast<std::size_t>(u)]; }

    /// All undirected edges as (u, v) with u < v, lexicographically sorted.
    std::vector<Edge> edges() const;

    Eigen::MatrixXd adjacency_matrix() const;

    /// Re-checks all invariants; throws InvariantError on violation.
    void validate() const;

    friend bool operator==(const RegularGraph& a, const RegularGraph& b) {
        return a.n_ == b.n_ && a.d_ == b.d_ && a.adjacency_ == b.adjacency_;
    }

    // Replace edges {a,b},{c,e} by {a,c},{b,e}. The caller guarantees the
    // move keeps the graph simple; used by switchings and the chain.
    void replace_edge_pair(int a, int b, int c, int e);

private:
    RegularGraph(int n, int d);
    void add_edge(int u, int v);
    void remove_edge(int u, int v);
    void set_bit(int u, int v, bool value);

    int n_ = 0;
    int d_ = 0;
    std::vector<std::vector<int>> adjacency_;
    std::vector<std::uint64_t> bits_;
};

/// 1 iff the four vertices of S are distinct and the graph induced on them is
/// 1-regular (exactly two disjoint edges).
int indicator_I(const EdgePair& s, const RegularGraph& a);

/// 1 iff the vertex sets of S and S2 are disjoint.
int indicator_J(const EdgePair& s, const EdgePair& s2);

/// The switching T_S: removes ij, kl and adds ik, jl when I(S)=1 and both ij
/// and kl are edges; performs the reverse move when ik and jl are edges;
/// otherwise returns A unchanged. T_S is an involution.
RegularGraph t_switch(const EdgePair& s, const RegularGraph& a);

/// In-place form of t_switch. Returns +1 if A - xi was applied, -1 if A + xi
/// was applied, 0 for the identity.
int apply_t_switch(const EdgePair& s, RegularGraph& a);

/// T_{S,S2}: both switchings when J(S,S2)=1, identity otherwise.
RegularGraph t_switch_pair(const EdgePair& s, const EdgePair& s2, const RegularGraph& a);

/// Adds sign * xi_ij^kl = sign * (D_ij + D_kl - D_ik - D_jl) to a dense
/// matrix, where (D_ij)_pq = d_ip d_jq + d_iq d_jp. Coinciding indices are
/// handled by the formula itself (e.g. i == j adds twice to the diagonal).
template <typename Derived>
void apply_xi(int i, int j, int k, int l, Eigen::MatrixBase<Derived>& m,
              typename Derived::Scalar sign) {
    m(i, j) += sign;
    m(j, i) += sign;
    m(k, l) += sign;
    m(l, k) += sign;
    m(i, k) -= sign;
    m(k, i) -= sign;
    m(j, l) -= sign;
    m(l, j) -= sign;
}

enum class SamplerMethod {
    Restart,  ///< configuration model, full restart on any loop or multi-edge
    Repair,   ///< configuration model, defects removed by random switchings
    Auto,     ///< Restart when the expected number of attempts is small
};

struct SamplerOptions {
    SamplerMethod method = SamplerMethod::Auto;
    /// Switching-chain burn-in in accepted-or-rejected edge-pair proposals;
    /// negative selects the default 20 * N * d.
    long long burn_in_steps = -1;
    long long restart_budget = 100000;
};

/// Uniform-ish d-regular graph: configuration model, then a burn-in of the
/// switching chain. Throws ParameterError for invalid (N, d) and
/// SamplingError when the restart budget runs out.
RegularGraph sample_initial(int n, int d, std::uint64_t seed, const SamplerOptions& options = {});
RegularGraph sample_initial(int n, int d, RngStream& rng, const SamplerOptions& options = {});

/// Graph file: "N d" then one "i j" line per edge, i < j, 1-based, sorted.
void write_graph(std::ostream& out, const RegularGraph& g);
RegularGraph read_graph(std::istream& in);

}  // namespace rrglab
