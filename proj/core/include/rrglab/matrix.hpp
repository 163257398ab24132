#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rrglab/graph.hpp"
#include "rrglab/rng.hpp"

namespace rrglab {

using Matrix = Eigen::MatrixXd;

/// Real symmetric N x N matrix with H e = 0, i.e. an element of the space of
/// symmetric maps that annihilate the uniform vector.
class ConstrainedMatrix {
public:
    ConstrainedMatrix() = default;

    /// Validates symmetry and zero row sums (tolerance 1e-10 * N * max|H|).
    static ConstrainedMatrix from_matrix(Matrix entries);
    /// Skips validation; for values that hold the invariants by construction.
    static ConstrainedMatrix adopt(Matrix entries);
    static ConstrainedMatrix zero(int n);

    int n() const { return static_cast<int>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    double operator()(int i, int j) const { return entries_(i, j); }
    double max_abs() const { return entries_.cwiseAbs().maxCoeff(); }

    /// H + c * xi_ij^kl. Stays in the space for every real c.
    ConstrainedMatrix plus_switch(int i, int j, int k, int l, double c) const;

    /// Largest |row sum| and largest |H_ij - H_ji|.
    double max_row_sum() const;
    double max_asymmetry() const;

private:
    explicit ConstrainedMatrix(Matrix entries) : entries_(std::move(entries)) {}
    Matrix entries_;
};

/// Implicit xi_ij^kl.
struct SwitchDirection {
    int i = 0;
    int j = 0;
    int k = 0;
    int l = 0;

    Matrix dense(int n) const;
};

/// H = (A - (d/N) J) / sqrt(d - 1). Throws ParameterError for d < 2.
ConstrainedMatrix center_rescale(const RegularGraph& a);

/// <X, Y> = (N/2) tr(XY).
double inner_product(const Matrix& x, const Matrix& y);
double inner_product(const ConstrainedMatrix& x, const ConstrainedMatrix& y);

/// tr(xi_ij^kl H) = 2 (H_ij + H_kl - H_ik - H_jl).
double h_switch_component(const Matrix& h, int i, int j, int k, int l);
inline double h_switch_component(const ConstrainedMatrix& h, int i, int j, int k, int l) {
    return h_switch_component(h.entries(), i, j, k, l);
}

/// Unit vector of the Householder reflection I - 2 u u^T exchanging e_N and
/// e = N^{-1/2}(1, ..., 1).
Eigen::VectorXd householder_unit(int n);

/// R (X (+) 0) R^T for the Householder R above, in O(N^2).
Matrix embed_householder(const Matrix& inner);

/// Symmetric (N-1) x (N-1) Gaussian with off-diagonal variance 1/N and
/// diagonal variance 2/N (the normalisation of the GOE used throughout).
Matrix sample_goe_block(int m, int n_normalisation, RngStream& rng);

/// Constrained GOE: R (Hhat (+) 0) R^T with the Householder R.
ConstrainedMatrix sample_constrained_goe(int n, RngStream& rng);
ConstrainedMatrix sample_constrained_goe(int n, std::uint64_t seed);
/// Same law with a caller-supplied orthogonal R satisfying R e_N = e.
ConstrainedMatrix sample_constrained_goe(int n, RngStream& rng, const Matrix& rotation);

using MatrixFunction = std::function<double(const Matrix&)>;

/// Default finite-difference step for a derivative of the given order.
double default_fd_step(const Matrix& h, int order);

/// Mixed central difference of order n = directions.size() (1..4):
/// sum over s in {+-1}^n of prod(s) F(H + h sum s_a X_a) / (2h)^n. Exact for
/// polynomials of degree <= n + 1, error O(h^2) otherwise. A non-positive
/// step selects default_fd_step. Throws NumericError on non-finite values.
double directional_derivative(const MatrixFunction& f, const Matrix& h,
                              std::span<const Matrix> directions, double step = -1.0);
double directional_derivative(const MatrixFunction& f, const Matrix& h,
                              std::span<const SwitchDirection> directions, double step = -1.0);

/// Binary snapshot: 8-byte magic "RRGMAT01", uint64 N (little endian), then
/// N*N row-major float64.
void write_matrix_snapshot(std::ostream& out, const Matrix& m);
Matrix read_matrix_snapshot(std::istream& in);
/// Debug CSV: one row per matrix row, no header.
void write_matrix_csv(std::ostream& out, const Matrix& m);

}  // namespace rrglab
