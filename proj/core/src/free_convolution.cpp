#include "rrglab/free_convolution.hpp"

#include <cmath>

#include "rrglab/error.hpp"
#include "rrglab/spectral.hpp"

namespace rrglab {

FreeConvResult free_conv_stieltjes(std::span<const double> spectrum, double t, std::complex<double> z,
                                   const FreeConvOptions& options) {
    if (spectrum.empty()) throw ParameterError("free_conv_stieltjes: empty spectrum");
    if (!(z.imag() > 0.0)) throw ParameterError("free_conv_stieltjes: need Im z > 0");
    if (!(t >= 0.0)) throw ParameterError("free_conv_stieltjes: need t >= 0");
    const double decay = std::exp(-0.5 * t);
    const double theta = -std::expm1(-t);
    const double inv_m = 1.0 / static_cast<double>(spectrum.size());

    auto rhs = [&](std::complex<double> s) {
        const std::complex<double> shift = z + theta * s;
        std::complex<double> acc = 0.0;
        for (double l : spectrum) acc += 1.0 / (decay * l - shift);
        return acc * inv_m;
    };

    FreeConvResult out;
    std::complex<double> s = stieltjes_empirical(spectrum, z);
    std::complex<double> next = rhs(s);
    out.residual = std::abs(next - s);
    double omega = options.damping;
    while (out.residual >= options.tolerance) {
        if (out.iterations >= options.max_iterations)
            throw ConvergenceError("free_conv_stieltjes: no convergence, residual " +
                                   std::to_string(out.residual));
        ++out.iterations;
        const std::complex<double> trial = (1.0 - omega) * s + omega * next;
        const std::complex<double> trial_next = rhs(trial);
        const double trial_residual = std::abs(trial_next - trial);
        if (trial_residual > out.residual && omega > 1e-6) {
            omega *= 0.5;  // oscillating: retry the step with less weight
            continue;
        }
        s = trial;
        next = trial_next;
        out.residual = trial_residual;
    }
    out.m = s;
    return out;
}

double semicircle_semigroup_residual(std::complex<double> z, double t) {
    const std::complex<double> m = semicircle_m(z);
    const double grow = std::exp(0.5 * t);
    const std::complex<double> inner = grow * (z + (-std::expm1(-t)) * m);
    return std::abs(m - grow * semicircle_m(inner));
}

}  // namespace rrglab
