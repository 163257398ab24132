#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rrglab/graph.hpp"
#include "rrglab/rng.hpp"

namespace rrglab {

/// A_ij A_mn (1-A_im)(1-A_in)(1-A_jm)(1-A_jn), evaluated literally.
int indicator_Iijmn(int i, int j, int m, int n, const RegularGraph& a);

enum class ProposalKind {
    /// (i, j, m, n) uniform on [N]^4: the embedded chain of the Q process.
    UniformTuple,
    /// (i -> j), (m -> n) uniform directed edges: the same chain with the
    /// rejected tuples (A_ij A_mn = 0) skipped. Same stationary law, far
    /// fewer wasted proposals for sparse graphs.
    EdgePair,
};

struct JumpChainState {
    RegularGraph graph;
    std::uint64_t steps_taken = 0;
    std::uint64_t accepted_switches = 0;
    RngStream rng;
};

/// One step of the discrete jump chain: draws a tuple and, when
/// I_ij^mn(A) = 1, replaces A by A - xi_ij^mn. Returns true on a switch.
bool jump_step(JumpChainState& state, ProposalKind kind = ProposalKind::UniformTuple);

/// Single edge-pair proposal applied in place (used by the sampler burn-in).
bool edge_pair_step(RegularGraph& g, RngStream& rng);

/// Iterates jump_step n_steps times from A0 with stream (seed, 0).
RegularGraph run_chain(const RegularGraph& a0, long long n_steps, std::uint64_t seed,
                       ProposalKind kind = ProposalKind::UniformTuple);

/// Calls fn(i, j, m, n) for every tuple with I_ij^mn(A) = 1, iterating over
/// ordered pairs of directed edges (O((N d)^2)).
void for_each_switchable(const RegularGraph& a,
                         const std::function<void(int, int, int, int)>& fn);

using GraphObservable = std::function<double(const RegularGraph&)>;

/// Qf(A) = (1/8Nd) sum_{ijmn} I_ij^mn(A) (f(A - xi_ij^mn) - f(A)) as a full
/// O(N^4) tuple sum. Oracle for q_apply.
double q_apply_dense(const GraphObservable& f, const RegularGraph& a);

/// Same sum restricted to pairs of existing directed edges.
double q_apply(const GraphObservable& f, const RegularGraph& a);

/// Variant taking the increment directly: delta(i,j,m,n) must return
/// f(A - xi_ij^mn) - f(A). Lets callers avoid materialising neighbours.
double q_apply_increments(const RegularGraph& a,
                          const std::function<double(int, int, int, int)>& delta);

/// All labeled simple d-regular graphs on N vertices by backtracking, in a
/// deterministic order. Requires N(N-1)/2 <= 64 and at most max_graphs
/// results, else SizeError.
std::vector<RegularGraph> enumerate_regular_graphs(int n, int d, std::size_t max_graphs = 2000000);

/// Upper-triangle bitmask of a graph with N(N-1)/2 <= 64.
std::uint64_t graph_code(const RegularGraph& g);

struct InvarianceReport {
    int n = 0;
    int d = 0;
    std::size_t n_states = 0;
    int n_observables = 0;
    /// max over observables of |sum_A Qf(A)| / sum_A |Qf(A)|.
    double max_relative_sum = 0.0;
    /// Transition counts C(A->B) == C(B->A) for every pair.
    bool reversible = false;
    std::size_t n_transitions = 0;
    bool passed = false;
    std::string summary() const;
};

/// Exhaustive check that the uniform measure is Q-invariant and the jump
/// kernel is reversible. Observables are i.i.d. uniform values per state.
InvarianceReport invariance_check(int n, int d, int n_observables = 10, std::uint64_t seed = 1,
                                  double tolerance = 1e-10);

}  // namespace rrglab
