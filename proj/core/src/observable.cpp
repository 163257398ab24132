#include "rrglab/observable.hpp"

#include <array>
#include <cmath>
#include <utility>

#include <Eigen/LU>

#include "rrglab/error.hpp"

namespace rrglab {

namespace {

class FiniteDifferenceProbe final : public SwitchProbe {
public:
    FiniteDifferenceProbe(const MatrixObservable& f, Matrix h)
        : f_(f), h_(std::move(h)), value_(f.value(h_)) {}

    double value() const override { return value_; }

    double shifted(const SwitchDirection& x, double c) const override {
        Matrix p = h_;
        apply_xi(x.i, x.j, x.k, x.l, p, c);
        return f_.value(p);
    }

    double d1(const SwitchDirection& x) const override {
        const std::array<SwitchDirection, 1> dirs{x};
        return directional_derivative(fn(), h_, std::span<const SwitchDirection>(dirs));
    }

    double d2(const SwitchDirection& x) const override {
        const std::array<SwitchDirection, 2> dirs{x, x};
        return directional_derivative(fn(), h_, std::span<const SwitchDirection>(dirs));
    }

    double gradient(const Matrix& x) const override {
        const std::array<Matrix, 1> dirs{x};
        return directional_derivative(fn(), h_, std::span<const Matrix>(dirs));
    }

    double hessian(const Matrix& x, const Matrix& y) const override {
        const std::array<Matrix, 2> dirs{x, y};
        return directional_derivative(fn(), h_, std::span<const Matrix>(dirs));
    }

private:
    MatrixFunction fn() const {
        return [this](const Matrix& m) { return f_.value(m); };
    }

    const MatrixObservable& f_;
    Matrix h_;
    double value_;
};

class ConstantObservable final : public MatrixObservable {
public:
    explicit ConstantObservable(double c) : c_(c) {}
    std::string name() const override { return "constant"; }
    double value(const Matrix&) const override { return c_; }

private:
    double c_;
};

class NormObservable final : public MatrixObservable {
public:
    std::string name() const override { return "norm"; }
    double value(const Matrix& h) const override { return inner_product(h, h); }
};

class FunctionObservable final : public MatrixObservable {
public:
    FunctionObservable(std::string name, std::function<double(const Matrix&)> f)
        : name_(std::move(name)), f_(std::move(f)) {}
    std::string name() const override { return name_; }
    double value(const Matrix& h) const override { return f_(h); }

private:
    std::string name_;
    std::function<double(const Matrix&)> f_;
};

double trace_product(const Matrix& x, const Matrix& y) {
    return x.cwiseProduct(y.transpose()).sum();
}

class PolynomialObservable final : public MatrixObservable {
public:
    PolynomialObservable(double a, double b, Matrix m, std::string name = "polynomial")
        : a_(a), b_(b), m_(std::move(m)), name_(std::move(name)) {}

    std::string name() const override { return name_; }

    double value(const Matrix& h) const override {
        const Matrix h2 = h * h;
        double v = a_ * h2.trace() + b_ * trace_product(h2, h);
        if (m_.size() > 0) v += trace_product(m_, h);
        return v;
    }

    std::unique_ptr<SwitchProbe> probe(const Matrix& h) const override;

    double a_;
    double b_;
    Matrix m_;
    std::string name_;
};

class PolynomialProbe final : public SwitchProbe {
public:
    PolynomialProbe(const PolynomialObservable& f, Matrix h)
        : f_(f), h_(std::move(h)), h2_(h_ * h_), value_(f.value(h_)),
          grad_(2.0 * f.a_ * h_ + 3.0 * f.b_ * h2_) {
        if (f.m_.size() > 0) grad_ += f.m_;
    }

    double value() const override { return value_; }

    double shifted(const SwitchDirection& x, double c) const override {
        Matrix p = h_;
        apply_xi(x.i, x.j, x.k, x.l, p, c);
        return f_.value(p);
    }

    // xi = u v^T + v u^T with u = e_i - e_l, v = e_j - e_k.
    double d1(const SwitchDirection& x) const override {
        const Matrix& g = grad_;
        return form(g, x.i, x.l, x.j, x.k) + form(g, x.j, x.k, x.i, x.l);
    }

    double d2(const SwitchDirection& x) const override {
        const double p = norm2(x.i, x.l);
        const double q = norm2(x.j, x.k);
        const double alpha = dot(x.i, x.l, x.j, x.k);
        double v = 2.0 * f_.a_ * (2.0 * alpha * alpha + 2.0 * p * q);
        if (f_.b_ != 0.0) {
            const double h_uv = form(h_, x.i, x.l, x.j, x.k) + form(h_, x.j, x.k, x.i, x.l);
            const double huu = form(h_, x.i, x.l, x.i, x.l);
            const double hvv = form(h_, x.j, x.k, x.j, x.k);
            v += 6.0 * f_.b_ * (alpha * h_uv + q * huu + p * hvv);
        }
        return v;
    }

    double gradient(const Matrix& x) const override {
        double g = 2.0 * f_.a_ * trace_product(h_, x) + 3.0 * f_.b_ * trace_product(h2_, x);
        if (f_.m_.size() > 0) g += trace_product(f_.m_, x);
        return g;
    }

    double hessian(const Matrix& x, const Matrix& y) const override {
        const Matrix hx = h_ * x;
        const Matrix hy = h_ * y;
        return 2.0 * f_.a_ * trace_product(x, y) +
               3.0 * f_.b_ * (trace_product(hx, y) + trace_product(hy, x));
    }

private:
    // (e_a - e_b)^T m (e_c - e_e)
    static double form(const Matrix& m, int a, int b, int c, int e) {
        return m(a, c) - m(a, e) - m(b, c) + m(b, e);
    }
    static double dot(int a, int b, int c, int e) {
        return (a == c) - (a == e) - (b == c) + (b == e);
    }
    static double norm2(int a, int b) { return dot(a, b, a, b); }


    const PolynomialObservable& f_;
    Matrix h_;
    Matrix h2_;
    double value_;
    Matrix grad_;
};

std::unique_ptr<SwitchProbe> PolynomialObservable::probe(const Matrix& h) const {
    return std::make_unique<PolynomialProbe>(*this, h);
}

double take(Complex v, ComplexPart part) {
    return part == ComplexPart::Imag ? v.imag() : v.real();
}

class StieltjesObservable final : public MatrixObservable {
public:
    StieltjesObservable(Complex z, ComplexPart part) : z_(z), part_(part) {
        if (z.imag() == 0.0) throw ParameterError("stieltjes observable: Im z must be nonzero");
    }

    std::string name() const override {
        return std::string(part_ == ComplexPart::Imag ? "im" : "re") + "_stieltjes";
    }

    double value(const Matrix& h) const override { return take(stieltjes(h), part_); }

    Complex stieltjes(const Matrix& h) const {
        const int n = static_cast<int>(h.rows());
        ComplexMatrix a = h.cast<Complex>();
        a.diagonal().array() -= z_;
        const Complex full = Eigen::PartialPivLU<ComplexMatrix>(a).inverse().trace();
        // H e = 0 contributes 1/(0 - z) along e
        return (full + 1.0 / z_) / static_cast<double>(n - 1);
    }

    std::unique_ptr<SwitchProbe> probe(const Matrix& h) const override;

    Complex z_;
    ComplexPart part_;
};

// xi_ij^kl = a b^T + b a^T with a = e_i - e_l, b = e_j - e_k.
struct RankTwo {
    int i, j, k, l;

    Complex ab(const ComplexMatrix& x) const { return x(i, j) - x(i, k) - x(l, j) + x(l, k); }
    Complex aa(const ComplexMatrix& x) const { return x(i, i) - 2.0 * x(i, l) + x(l, l); }
    Complex bb(const ComplexMatrix& x) const { return x(j, j) - 2.0 * x(j, k) + x(k, k); }
    bool zero() const { return i == l || j == k; }
};

class StieltjesProbe final : public SwitchProbe {
public:
    StieltjesProbe(const StieltjesObservable& f, const Matrix& h)
        : f_(f), h_(h), spec_(decompose(ConstrainedMatrix::adopt(h), true)) {
        g_ = green_matrix(spec_, f.z_);
        g2_ = green_matrix_squared(spec_, f.z_);
        inv_m_ = 1.0 / static_cast<double>(spec_.m());
        s_ = g_.trace() * inv_m_;
    }

    double value() const override { return take(s_, f_.part_); }

    double shifted(const SwitchDirection& x, double c) const override {
        const RankTwo u{x.i, x.j, x.k, x.l};
        if (c == 0.0 || u.zero()) return value();
        const Complex gab = u.ab(g_);
        const Complex gaa = u.aa(g_);
        const Complex gbb = u.bb(g_);
        const Complex off = 1.0 / c + gab;
        const Complex det = gaa * gbb - off * off;
        const double scale = std::abs(gaa * gbb) + std::abs(off * off);
        if (!(std::abs(det) > 1e-10 * scale)) {
            Matrix p = h_;
            apply_xi(x.i, x.j, x.k, x.l, p, c);
            return f_.value(p);
        }
        const Complex correction = (gbb * u.aa(g2_) - 2.0 * off * u.ab(g2_) + gaa * u.bb(g2_)) / det;
        return take(s_ - correction * inv_m_, f_.part_);
    }

    double d1(const SwitchDirection& x) const override {
        const RankTwo u{x.i, x.j, x.k, x.l};
        return take(-2.0 * inv_m_ * u.ab(g2_), f_.part_);
    }

    double d2(const SwitchDirection& x) const override {
        const RankTwo u{x.i, x.j, x.k, x.l};
        const Complex t = 2.0 * u.ab(g_) * u.ab(g2_) + u.bb(g_) * u.aa(g2_) + u.aa(g_) * u.bb(g2_);
        return take(2.0 * inv_m_ * t, f_.part_);
    }

    double gradient(const Matrix& x) const override {
        const ComplexMatrix xc = x.cast<Complex>();
        return take(-inv_m_ * (xc * g2_).trace(), f_.part_);
    }

    double hessian(const Matrix& x, const Matrix& y) const override {
        const ComplexMatrix xc = x.cast<Complex>();
        const ComplexMatrix yc = y.cast<Complex>();
        const Complex t = (xc * g_ * yc * g2_).trace() + (yc * g_ * xc * g2_).trace();
        return take(inv_m_ * t, f_.part_);
    }

    const ComplexMatrix& green() const { return g_; }
    const ComplexMatrix& green_squared() const { return g2_; }

private:
    const StieltjesObservable& f_;
    Matrix h_;
    SpectralDecomposition spec_;
    ComplexMatrix g_;
    ComplexMatrix g2_;
    double inv_m_ = 0.0;
    Complex s_;
};

std::unique_ptr<SwitchProbe> StieltjesObservable::probe(const Matrix& h) const {
    return std::make_unique<StieltjesProbe>(*this, h);
}

}  // namespace

std::unique_ptr<SwitchProbe> MatrixObservable::probe(const Matrix& h) const {
    return std::make_unique<FiniteDifferenceProbe>(*this, h);
}

ObservablePtr constant_observable(double c) {
    return std::make_shared<ConstantObservable>(c);
}

ObservablePtr norm_observable() {
    return std::make_shared<NormObservable>();
}

ObservablePtr linear_observable(Matrix m) {
    return std::make_shared<PolynomialObservable>(0.0, 0.0, std::move(m), "linear");
}

ObservablePtr polynomial_observable(double a, double b, Matrix m) {
    return std::make_shared<PolynomialObservable>(a, b, std::move(m));
}

ObservablePtr function_observable(std::string name, std::function<double(const Matrix&)> f) {
    return std::make_shared<FunctionObservable>(std::move(name), std::move(f));
}

ObservablePtr stieltjes_observable(Complex z, ComplexPart part) {
    return std::make_shared<StieltjesObservable>(z, part);
}

}  // namespace rrglab
