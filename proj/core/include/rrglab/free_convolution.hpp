#pragma once

#include <complex>
#include <span>

namespace rrglab {

struct FreeConvOptions {
    double damping = 0.5;
    double tolerance = 1e-12;
    int max_iterations = 10000;
};

struct FreeConvResult {
    std::complex<double> m;
    double residual = 0.0;
    int iterations = 0;
};

/// Solves s = (1/M) sum_i 1 / (e^{-t/2} lambda_i - z - (1 - e^{-t}) s) by
/// damped iteration from the empirical Stieltjes transform at z. The damping
/// halves whenever the residual grows. Throws ConvergenceError when the
/// residual stays above tolerance.
FreeConvResult free_conv_stieltjes(std::span<const double> spectrum, double t, std::complex<double> z,
                                   const FreeConvOptions& options = {});

/// | m(z) - e^{t/2} m(e^{t/2} (z + (1 - e^{-t}) m(z))) | for the semicircle m.
double semicircle_semigroup_residual(std::complex<double> z, double t);

}  // namespace rrglab
