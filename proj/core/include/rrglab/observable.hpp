#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>

#include "rrglab/matrix.hpp"
#include "rrglab/spectral.hpp"

namespace rrglab {

/// Local view of an observable F around a fixed H: values along switch
/// directions and derivatives up to second order. Implementations may be
/// analytic or finite-difference based.
class SwitchProbe {
public:
    virtual ~SwitchProbe() = default;

    virtual double value() const = 0;
    /// F(H + c xi).
    virtual double shifted(const SwitchDirection& x, double c) const = 0;
    /// d/dc F(H + c xi) at c = 0.
    virtual double d1(const SwitchDirection& x) const = 0;
    /// d^2/dc^2 F(H + c xi) at c = 0.
    virtual double d2(const SwitchDirection& x) const = 0;
    /// DF[X] and D^2F[X, Y] along general directions X, Y in the space.
    virtual double gradient(const Matrix& x) const = 0;
    virtual double hessian(const Matrix& x, const Matrix& y) const = 0;
};

/// Smooth observable F on constrained matrices.
class MatrixObservable {
public:
    virtual ~MatrixObservable() = default;

    virtual std::string name() const = 0;
    virtual double value(const Matrix& h) const = 0;
    double operator()(const Matrix& h) const { return value(h); }

    /// Default: central finite differences of value() (see directional_derivative).
    virtual std::unique_ptr<SwitchProbe> probe(const Matrix& h) const;
};

using ObservablePtr = std::shared_ptr<const MatrixObservable>;

/// F(H) = c.
ObservablePtr constant_observable(double c);
/// F(H) = <H, H> = (N/2) tr H^2.
ObservablePtr norm_observable();
/// F(H) = tr(M H).
ObservablePtr linear_observable(Matrix m);
/// F(H) = a tr H^2 + b tr H^3 + tr(M H), with exact derivatives. M may be
/// empty (treated as zero).
ObservablePtr polynomial_observable(double a, double b, Matrix m = {});
/// Wraps a plain function; derivatives by finite differences.
ObservablePtr function_observable(std::string name, std::function<double(const Matrix&)> f);

enum class ComplexPart { Real, Imag };

/// F(H) = Re or Im of s(H; z) = (1/M) tr G(H; z) on e-perp. Values use a
/// complex LU solve; the probe uses the eigendecomposition of H and a
/// rank-two resolvent update, so switch shifts and derivatives cost O(1)
/// after an O(N^3) setup.
ObservablePtr stieltjes_observable(std::complex<double> z, ComplexPart part = ComplexPart::Imag);

}  // namespace rrglab
