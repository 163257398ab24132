#include "rrglab/matrix.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "rrglab/error.hpp"

namespace rrglab {

ConstrainedMatrix ConstrainedMatrix::from_matrix(Matrix entries) {
    if (entries.rows() != entries.cols()) throw InvariantError("constrained matrix: not square");
    ConstrainedMatrix h(std::move(entries));
    const double scale = std::max(h.max_abs(), std::numeric_limits<double>::min());
    const double tol = 1e-10 * h.n() * scale;
    if (h.max_asymmetry() > tol) throw InvariantError("constrained matrix: not symmetric");
    if (h.max_row_sum() > tol) throw InvariantError("constrained matrix: H e != 0");
    return h;
}

ConstrainedMatrix ConstrainedMatrix::adopt(Matrix entries) {
    return ConstrainedMatrix(std::move(entries));
}

ConstrainedMatrix ConstrainedMatrix::zero(int n) {
    return ConstrainedMatrix(Matrix::Zero(n, n));
}

ConstrainedMatrix ConstrainedMatrix::plus_switch(int i, int j, int k, int l, double c) const {
    Matrix out = entries_;
    apply_xi(i, j, k, l, out, c);
    return ConstrainedMatrix(std::move(out));
}

double ConstrainedMatrix::max_row_sum() const {
    return n() == 0 ? 0.0 : entries_.rowwise().sum().cwiseAbs().maxCoeff();
}

double ConstrainedMatrix::max_asymmetry() const {
    return n() == 0 ? 0.0 : (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
}

Matrix SwitchDirection::dense(int n) const {
    Matrix x = Matrix::Zero(n, n);
    apply_xi(i, j, k, l, x, 1.0);
    return x;
}

ConstrainedMatrix center_rescale(const RegularGraph& a) {
    const int d = a.degree();
    if (d < 2) throw ParameterError("center_rescale: need d >= 2");
    const int n = a.n();
    const double shift = static_cast<double>(d) / n;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d - 1));
    Matrix h = Matrix::Constant(n, n, -shift * scale);
    for (int u = 0; u < n; ++u)
        for (int v : a.neighbors(u)) h(u, v) += scale;
    return ConstrainedMatrix::adopt(std::move(h));
}

double inner_product(const Matrix& x, const Matrix& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols())
        throw ParameterError("inner_product: dimension mismatch");
    // tr(XY) = sum_ij X_ij Y_ji
    return 0.5 * static_cast<double>(x.rows()) * x.cwiseProduct(y.transpose()).sum();
}

double inner_product(const ConstrainedMatrix& x, const ConstrainedMatrix& y) {
    return inner_product(x.entries(), y.entries());
}

double h_switch_component(const Matrix& h, int i, int j, int k, int l) {
    return 2.0 * (h(i, j) + h(k, l) - h(i, k) - h(j, l));
}

Eigen::VectorXd householder_unit(int n) {
    Eigen::VectorXd u = Eigen::VectorXd::Constant(n, -1.0 / std::sqrt(static_cast<double>(n)));
    u(n - 1) += 1.0;
    const double norm = u.norm();
    if (norm == 0.0) return Eigen::VectorXd::Zero(n);  // N == 1: R = I
    return u / norm;
}

Matrix embed_householder(const Matrix& inner) {
    const int n = static_cast<int>(inner.rows()) + 1;
    Matrix x = Matrix::Zero(n, n);
    x.topLeftCorner(n - 1, n - 1) = inner;
    const Eigen::VectorXd u = householder_unit(n);
    // (I - 2uu^T) X (I - 2uu^T) = X - 2 u w^T - 2 w u^T + 4 (u^T X u) u u^T, w = X u
    const Eigen::VectorXd w = x * u;
    const double uxu = u.dot(w);
    x.noalias() -= 2.0 * u * w.transpose();
    x.noalias() -= 2.0 * w * u.transpose();
    x.noalias() += 4.0 * uxu * u * u.transpose();
    return x;
}

Matrix sample_goe_block(int m, int n_normalisation, RngStream& rng) {
    const double off = 1.0 / std::sqrt(static_cast<double>(n_normalisation));
    const double diag = std::sqrt(2.0) * off;
    Matrix g(m, m);
    for (int c = 0; c < m; ++c) {
        g(c, c) = diag * rng.normal();
        for (int r = c + 1; r < m; ++r) {
            const double v = off * rng.normal();
            g(r, c) = v;
            g(c, r) = v;
        }
    }
    return g;
}

ConstrainedMatrix sample_constrained_goe(int n, RngStream& rng) {
    if (n < 2) throw ParameterError("sample_constrained_goe: need N >= 2");
    Matrix w = embed_householder(sample_goe_block(n - 1, n, rng));
    // Restore exact symmetry lost to rounding in the rank-2 update.
    w = 0.5 * (w + w.transpose()).eval();
    return ConstrainedMatrix::adopt(std::move(w));
}

ConstrainedMatrix sample_constrained_goe(int n, std::uint64_t seed) {
    RngStream rng = rng_stream(seed, 0);
    return sample_constrained_goe(n, rng);
}

ConstrainedMatrix sample_constrained_goe(int n, RngStream& rng, const Matrix& rotation) {
    if (n < 2) throw ParameterError("sample_constrained_goe: need N >= 2");
    if (rotation.rows() != n || rotation.cols() != n)
        throw ParameterError("sample_constrained_goe: rotation must be N x N");
    Matrix x = Matrix::Zero(n, n);
    x.topLeftCorner(n - 1, n - 1) = sample_goe_block(n - 1, n, rng);
    Matrix w = rotation * x * rotation.transpose();
    w = 0.5 * (w + w.transpose()).eval();
    return ConstrainedMatrix::adopt(std::move(w));
}

double default_fd_step(const Matrix& h, int order) {
    const double scale = 1.0 + (h.size() > 0 ? h.cwiseAbs().maxCoeff() : 0.0);
    return (order <= 2 ? 1e-5 : 1e-3) * scale;
}

double directional_derivative(const MatrixFunction& f, const Matrix& h,
                              std::span<const Matrix> directions, double step) {
    const int order = static_cast<int>(directions.size());
    if (order < 1 || order > 4) throw ParameterError("directional_derivative: order must be 1..4");
    if (step <= 0.0) step = default_fd_step(h, order);
    double total = 0.0;
    Matrix point(h.rows(), h.cols());
    for (unsigned mask = 0; mask < (1u << order); ++mask) {
        point = h;
        int sign = 1;
        for (int a = 0; a < order; ++a) {
            const bool minus = (mask >> a) & 1u;
            point += (minus ? -step : step) * directions[static_cast<std::size_t>(a)];
            if (minus) sign = -sign;
        }
        const double value = f(point);
        if (!std::isfinite(value)) throw NumericError("directional_derivative: non-finite F value");
        total += sign * value;
    }
    return total / std::pow(2.0 * step, order);
}

double directional_derivative(const MatrixFunction& f, const Matrix& h,
                              std::span<const SwitchDirection> directions, double step) {
    std::vector<Matrix> dense;
    dense.reserve(directions.size());
    for (const auto& x : directions) dense.push_back(x.dense(static_cast<int>(h.rows())));
    return directional_derivative(f, h, std::span<const Matrix>(dense), step);
}

namespace {
constexpr std::array<char, 8> kSnapshotMagic = {'R', 'R', 'G', 'M', 'A', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");
}  // namespace

void write_matrix_snapshot(std::ostream& out, const Matrix& m) {
    if (m.rows() != m.cols()) throw ParameterError("snapshot: matrix must be square");
    const auto n = static_cast<std::uint64_t>(m.rows());
    out.write(kSnapshotMagic.data(), kSnapshotMagic.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
    if (!out) throw IoError("snapshot: write failed");
}

Matrix read_matrix_snapshot(std::istream& in) {
    std::array<char, 8> magic{};
    std::uint64_t n = 0;
    in.read(magic.data(), magic.size());
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || magic != kSnapshotMagic) throw IoError("snapshot: bad header");
    if (n > (1u << 16)) throw IoError("snapshot: implausible dimension " + std::to_string(n));
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            double v = 0.0;
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            m(r, c) = v;
        }
    if (!in) throw IoError("snapshot: truncated payload");
    return m;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    out.precision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) out << ',';
            out << m(r, c);
        }
        out << '\n';
    }
}

}  // namespace rrglab
