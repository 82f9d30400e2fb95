// Spherical transform of radial functions and of sampled measures,
// Plancherel inversion with a calibrated constant, and the vector-valued
// Fourier transform F(mu)(lambda) = xi_lambda(mu) chi_0.
#pragma once

#include <cmath>
#include <algorithm>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gelfand/spherical.hpp"
#include "gelfand/stats.hpp"

namespace gelfand {

/// K-bi-invariant function given by its profile in the geodesic radius.
struct RadialFunction {
    std::function<double(double)> f;
    double r_cutoff = 0.0;

    double operator()(double r) const { return r <= r_cutoff ? f(r) : 0.0; }
};

/// e^{-r^2 / width^2} truncated at r_cutoff.
inline RadialFunction gaussian_bump(double width = 1.0, double r_cutoff = 7.0, double amplitude = 1.0) {
    return {[=](double r) { return amplitude * std::exp(-r * r / (width * width)); }, r_cutoff};
}

/// Function on the tempered spectrum, sampled at increasing lambda >= 0.
struct SpectralGrid {
    std::vector<double> lambdas;
    std::vector<cplx> values;
};

struct PlancherelCalibration {
    double C = 0.0;
};

struct TransformOptions {
    QuadratureSpec q{512, true};
    double lambda_step = 0.05;
    double block_width = 1.0; ///< the grid grows block by block
    double tail_tol = 1e-6;   ///< stop when a block adds less than this fraction
    double lambda_max = 40.0;
    unsigned threads = 1;
};

/// lambda tanh(pi lambda), the shape of the Plancherel density on lambda >= 0.
inline double plancherel_density(double lambda) { return lambda * std::tanh(std::numbers::pi * lambda); }

namespace detail {

template <typename F>
double adaptive_integral(F&& fn, double lo, double hi) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, lo, hi, 20, 1e-13);
}

/// Composite Simpson on a uniform grid (trapezoid when the interval count is odd
/// or the grid is not uniform).
template <typename T>
T grid_integral(std::span<const double> x, std::span<const T> y) {
    const std::size_t n = x.size();
    if (n < 2) return T{};
    const double h = x[1] - x[0];
    bool uniform = true;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs((x[i] - x[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) uniform = false;
    }
    if (uniform && (n - 1) % 2 == 0 && n >= 3) {
        T s = y[0] + y[n - 1];
        for (std::size_t i = 1; i + 1 < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * y[i];
        return s * (h / 3.0);
    }
    T s{};
    for (std::size_t i = 1; i < n; ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

} // namespace detail

/// f^(lambda) = int_0^{r_cutoff} f(r) omega_lambda(exp(r P1)^{-1}) 2 pi sinh(r) dr.
inline cplx spherical_transform_radial(const RadialFunction& f, double lambda, const QuadratureSpec& q = {512, true}) {
    if (!(f.r_cutoff > 0.0)) throw std::invalid_argument("spherical_transform_radial: r_cutoff must be positive");
    // omega_lambda is real on the tempered spectrum; only the real part is integrated.
    const auto integrand = [&](double r) {
        const double fr = f(r);
        if (fr == 0.0) return 0.0;
        return fr * spherical_function(lambda, inverse(radial_element(r)), q).real() * 2.0 * std::numbers::pi *
               std::sinh(r);
    };
    return detail::adaptive_integral(integrand, 0.0, f.r_cutoff);
}

/// f^ on lambda = 0, h, 2h, ... grown until the last block contributes less
/// than tail_tol of the accumulated int |f^| lambda tanh(pi lambda) dlambda.
inline SpectralGrid spectral_grid(const RadialFunction& f, const TransformOptions& opt = {}) {
    SpectralGrid grid;
    const int per_block = std::max(2, static_cast<int>(std::lround(opt.block_width / opt.lambda_step)));
    double accumulated = 0.0;
    int next = 0;
    while (true) {
        const int count = next == 0 ? per_block + 1 : per_block;
        std::vector<double> block(count);
        for (int i = 0; i < count; ++i) block[i] = (next + i) * opt.lambda_step;
        const auto vals = parallel_map<cplx>(count, opt.threads, [&](std::size_t i) {
            return spherical_transform_radial(f, block[i], opt.q);
        });
        double block_mass = 0.0;
        for (int i = 0; i < count; ++i) {
            block_mass += std::abs(vals[i]) * plancherel_density(block[i]) * opt.lambda_step;
            grid.lambdas.push_back(block[i]);
            grid.values.push_back(vals[i]);
        }
        accumulated += block_mass;
        next += count;
        const bool converged = accumulated > 0.0 && block_mass < opt.tail_tol * accumulated;
        if (converged || grid.lambdas.back() >= opt.lambda_max) break;
        if (accumulated == 0.0 && grid.lambdas.back() >= opt.block_width * 4) break;
    }
    // Simpson needs an even interval count.
    if ((grid.lambdas.size() - 1) % 2 == 1) {
        const double l = grid.lambdas.back() + opt.lambda_step;
        grid.lambdas.push_back(l);
        grid.values.push_back(spherical_transform_radial(f, l, opt.q));
    }
    return grid;
}

/// int f^(lambda) g(lambda) lambda tanh(pi lambda) dlambda over the grid.
template <typename Weight>
cplx spectral_integral(const SpectralGrid& grid, Weight&& weight) {
    std::vector<cplx> y(grid.lambdas.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = grid.values[i] * weight(i) * plancherel_density(grid.lambdas[i]);
    }
    return detail::grid_integral<cplx>(grid.lambdas, y);
}

struct CalibrationResult {
    PlancherelCalibration calibration;
    SpectralGrid grid;
};

/// C with C * int f^(lambda) lambda tanh(pi lambda) dlambda = f(0).
inline CalibrationResult calibrate_plancherel(const RadialFunction& reference, const TransformOptions& opt = {}) {
    const double f0 = reference(0.0);
    if (f0 == 0.0) throw std::invalid_argument("calibrate_plancherel: reference must not vanish at the origin");
    SpectralGrid grid = spectral_grid(reference, opt);
    const double integral = spectral_integral(grid, [](std::size_t) { return 1.0; }).real();
    if (std::abs(integral) < 1e-12) throw std::runtime_error("calibrate_plancherel: degenerate reference");
    return {{f0 / integral}, std::move(grid)};
}

struct InversionResult {
    double value = 0.0;
    double tail_estimate = 0.0; ///< |contribution of the last unit block| relative to |value|
    bool tail_ok = true;
};

/// C * int f^(lambda) omega_lambda(exp(r P1)) lambda tanh(pi lambda) dlambda.
inline InversionResult inverse_transform_at_radius(const SpectralGrid& spec, double r, const PlancherelCalibration& cal,
                                                   const QuadratureSpec& q = {512, true}, double tol = 1e-4) {
    if (!(cal.C > 0.0)) throw std::invalid_argument("inverse_transform_at_radius: missing calibration");
    if (spec.lambdas.size() < 3) throw std::invalid_argument("inverse_transform_at_radius: grid too small");
    const std::vector<cplx> omega = spherical_function_grid(spec.lambdas, radial_element(r), q);
    const cplx total = spectral_integral(spec, [&](std::size_t i) { return omega[i]; });

    // Tail: what the last unit-length block of the grid contributes.
    const double l_end = spec.lambdas.back();
    double tail = 0.0;
    for (std::size_t i = 1; i < spec.lambdas.size(); ++i) {
        if (spec.lambdas[i] <= l_end - 1.0) continue;
        const double dl = spec.lambdas[i] - spec.lambdas[i - 1];
        tail += std::abs(spec.values[i] * omega[i]) * plancherel_density(spec.lambdas[i]) * dl;
    }
    InversionResult res;
    res.value = cal.C * total.real();
    res.tail_estimate = cal.C * tail / std::max(std::abs(res.value), 1e-300);
    res.tail_ok = res.tail_estimate <= tol;
    return res;
}

struct PlancherelNorms {
    double spatial = 0.0;  ///< int |f|^2 2 pi sinh r dr
    double spectral = 0.0; ///< C int |f^|^2 lambda tanh(pi lambda) dlambda
};

inline PlancherelNorms plancherel_norms(const RadialFunction& f, const SpectralGrid& grid,
                                       const PlancherelCalibration& cal) {
    PlancherelNorms n;
    n.spatial = detail::adaptive_integral(
        [&](double r) { return f(r) * f(r) * 2.0 * std::numbers::pi * std::sinh(r); }, 0.0, f.r_cutoff);
    std::vector<double> y(grid.lambdas.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::norm(grid.values[i]) * plancherel_density(grid.lambdas[i]);
    n.spectral = cal.C * detail::grid_integral<double>(grid.lambdas, y);
    return n;
}

/// Sample mean and standard error of omega_lambda(g_i^{-1}).
inline ComplexMeanSE empirical_spherical_transform(std::span<const GroupElement> samples, double lambda,
                                                   const QuadratureSpec& q = {}, unsigned threads = 1) {
    if (samples.size() < 2) throw std::invalid_argument("empirical_spherical_transform: need at least 2 samples");
    const auto vals = parallel_map<cplx>(samples.size(), threads, [&](std::size_t i) {
        return spherical_function(lambda, inverse(samples[i]), q);
    });
    return mean_se(std::span<const cplx>(vals));
}

/// One row per lambda; each sample's nodes are shared across the lambda list.
inline std::vector<ComplexMeanSE> empirical_spherical_transform_grid(std::span<const GroupElement> samples,
                                                                     std::span<const double> lambdas,
                                                                     const QuadratureSpec& q = {},
                                                                     unsigned threads = 1) {
    if (samples.size() < 2) throw std::invalid_argument("empirical_spherical_transform: need at least 2 samples");
    const auto per_sample = parallel_map<std::vector<cplx>>(samples.size(), threads, [&](std::size_t i) {
        return spherical_function_grid(lambdas, inverse(samples[i]), q);
    });
    std::vector<ComplexMeanSE> out;
    std::vector<cplx> col(samples.size());
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        for (std::size_t i = 0; i < samples.size(); ++i) col[i] = per_sample[i][l];
        out.push_back(mean_se(std::span<const cplx>(col)));
    }
    return out;
}

/// Monte Carlo estimate of a mode vector, with per-component standard errors.
struct ModeEstimate {
    FourierModeVector mean;
    std::vector<double> se_re;
    std::vector<double> se_im;

    double std_err(int n) const { return std::hypot(se_re[n + mean.n_max], se_im[n + mean.n_max]); }
};

namespace detail {

inline ModeEstimate summarize_modes(const std::vector<FourierModeVector>& vs, int n_max) {
    ModeEstimate est{FourierModeVector(n_max), std::vector<double>(2 * n_max + 1),
                     std::vector<double>(2 * n_max + 1)};
    std::vector<cplx> col(vs.size());
    for (int m = 0; m < 2 * n_max + 1; ++m) {
        for (std::size_t i = 0; i < vs.size(); ++i) col[i] = vs[i].coeffs[m];
        const ComplexMeanSE s = mean_se(std::span<const cplx>(col));
        est.mean.coeffs[m] = s.mean;
        est.se_re[m] = s.std_err_re;
        est.se_im[m] = s.std_err_im;
    }
    return est;
}

} // namespace detail

/// F(mu)(lambda) = E[xi_lambda(g) chi_0], truncated to |m| <= n_max.
inline ModeEstimate vector_fourier_transform(std::span<const GroupElement> samples, double lambda, int n_max,
                                             const QuadratureSpec& q = {}, unsigned threads = 1) {
    if (samples.size() < 2) throw std::invalid_argument("vector_fourier_transform: need at least 2 samples");
    const FourierModeVector u0 = FourierModeVector::unit(0);
    const auto vs = parallel_map<FourierModeVector>(samples.size(), threads, [&](std::size_t i) {
        return principal_series_apply(lambda, samples[i], u0, n_max, q);
    });
    return detail::summarize_modes(vs, n_max);
}

struct ConvolutionCheck {
    ModeEstimate lhs;          ///< F(mu1 * mu2) from paired products g_i h_i
    ModeEstimate rhs;          ///< xi_lambda(mu1) F(mu2)
    double max_z = 0.0;        ///< over real and imaginary parts of every mode
    double max_abs_diff = 0.0; ///< max |lhs - rhs| over modes
};

/// Compares F(mu1 * mu2) with xi_lambda(mu1) F(mu2). The inner vector F(mu2)
/// is kept to n_inner modes before xi_lambda(mu1) is applied; only modes
/// |m| <= n_max are compared. rhs standard errors add the variance of the
/// mu1 average to a bound (trace of the covariance of F(mu2)) for the
/// propagated error of F(mu2), since xi_lambda(mu1) is a contraction.
inline ConvolutionCheck check_convolution_identity(std::span<const GroupElement> samples1,
                                                   std::span<const GroupElement> samples2, double lambda, int n_max,
                                                   const QuadratureSpec& q = {}, unsigned threads = 1,
                                                   int n_inner = -1) {
    if (samples1.size() != samples2.size()) {
        throw std::invalid_argument("check_convolution_identity: sample arrays must have equal length");
    }
    if (samples1.size() < 2) throw std::invalid_argument("check_convolution_identity: need at least 2 samples");
    if (n_inner < 0) n_inner = 4 * n_max + 32;
    QuadratureSpec qi = q;
    qi.n_points = std::max(q.n_points, 8 * n_inner);

    const std::size_t n = samples1.size();
    std::vector<GroupElement> products(n);
    for (std::size_t i = 0; i < n; ++i) products[i] = multiply(samples1[i], samples2[i]);

    ConvolutionCheck out;
    out.lhs = vector_fourier_transform(products, lambda, n_max, qi, threads);
    const ModeEstimate inner = vector_fourier_transform(samples2, lambda, n_inner, qi, threads);
    const auto applied = parallel_map<FourierModeVector>(n, threads, [&](std::size_t i) {
        return principal_series_apply(lambda, samples1[i], inner.mean, n_max, qi);
    });
    out.rhs = detail::summarize_modes(applied, n_max);
    double inner_var_re = 0.0, inner_var_im = 0.0;
    for (int m = 0; m < inner.mean.size(); ++m) {
        inner_var_re += inner.se_re[m] * inner.se_re[m] + inner.se_im[m] * inner.se_im[m];
    }
    inner_var_im = inner_var_re;
    for (int m = 0; m < out.rhs.mean.size(); ++m) {
        out.rhs.se_re[m] = std::sqrt(out.rhs.se_re[m] * out.rhs.se_re[m] + inner_var_re);
        out.rhs.se_im[m] = std::sqrt(out.rhs.se_im[m] * out.rhs.se_im[m] + inner_var_im);
    }

    // Modes that vanish by parity carry rounding noise only; standard errors
    // are floored at 1e-12 so that noise does not register as signal.
    const auto z_of = [](double diff, double se) { return std::abs(diff) / std::max(se, 1e-12); };
    for (int m = 0; m < out.lhs.mean.size(); ++m) {
        const cplx d = out.lhs.mean.coeffs[m] - out.rhs.mean.coeffs[m];
        out.max_abs_diff = std::max(out.max_abs_diff, std::abs(d));
        out.max_z = std::max(out.max_z, z_of(d.real(), std::hypot(out.lhs.se_re[m], out.rhs.se_re[m])));
        out.max_z = std::max(out.max_z, z_of(d.imag(), std::hypot(out.lhs.se_im[m], out.rhs.se_im[m])));
    }
    return out;
}

} // namespace gelfand
