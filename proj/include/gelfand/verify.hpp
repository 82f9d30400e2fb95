// Verification engine: Gangolli exponent, Monte Carlo checks of the
// Levy-Khintchine formula, the Hunt generator, the T_t semigroup, the
// derivative of the generalized spherical transform, and a two-sample test
// for K-bi-invariance of a sampled law.
//
// Transforms of sampled laws use omega_lambda(g^{-1}) (the reversed measure).
// Generator checks use M(t), the left process the Marcus scheme builds,
// whose generator is the displayed sum b X + a X X + jump integral.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gelfand/levy.hpp"
#include "gelfand/spherical.hpp"
#include "gelfand/stats.hpp"
#include "gelfand/transform.hpp"

namespace gelfand {

/// Bi-invariant configuration for the scalar Levy-Khintchine formula.
struct ExponentSpec {
    double a_scalar = 0.0; ///< the diffusion part is a_scalar times the horizontal Laplacian
    LevyModel model;       ///< drift must vanish, diffusion must equal a_scalar * I

    static ExponentSpec from_model(const LevyModel& m) { return {m.a[0], m}; }

    void validate() const {
        model.validate();
        if (!(a_scalar >= 0.0)) throw std::invalid_argument("ExponentSpec: a_scalar must be >= 0");
        if (model.has_drift()) throw std::invalid_argument("ExponentSpec: drift breaks K-bi-invariance");
        if (model.a[0] != a_scalar || model.a[3] != a_scalar || model.a[1] != 0.0 || model.a[2] != 0.0) {
            throw std::invalid_argument("ExponentSpec: diffusion matrix must be a_scalar * I");
        }
        if (model.has_jumps() && !is_rotation_invariant(model.jump_law)) {
            throw std::invalid_argument("ExponentSpec: jump law is not rotation invariant");
        }
    }
};

/// psi(lambda) = a (lambda^2 + 1/4) + intensity * E_eta[1 - omega_lambda(exp W)],
/// so that the spherical transform of mu_t is e^{-t psi} with psi >= 0.
inline double gangolli_exponent(const ExponentSpec& spec, double lambda, const QuadratureSpec& q = {}) {
    spec.validate();
    double psi = spec.a_scalar * laplace_eigenvalue(lambda);
    if (spec.model.has_jumps()) {
        double radius = 0.0;
        if (const auto* sh = std::get_if<IsotropicShellJump>(&spec.model.jump_law)) radius = sh->radius;
        // A rotation-invariant point mass or mixture sits at the identity.
        if (radius != 0.0) {
            psi += spec.model.jump_intensity * (1.0 - spherical_function_radial(lambda, radius, q).real());
        }
    }
    return psi;
}

struct ReportRow {
    double lambda = 0.0;
    double t = 0.0;
    cplx empirical;
    double std_err = 0.0;
    double predicted = 0.0;
    double z_score = 0.0;
};

struct ReportMetadata {
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    double dt = 0.0;
    std::string transform_convention = "omega_lambda(g^-1), g = L(t)";
};

struct VerificationReport {
    std::vector<ReportRow> rows;
    ReportMetadata metadata;

    std::size_t failed_rows() const {
        return std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return !(std::abs(r.z_score) <= 3.0); });
    }
    std::size_t passed_rows() const { return rows.size() - failed_rows(); }
    double max_abs_z() const {
        double m = 0.0;
        for (const auto& r : rows) m = std::max(m, std::abs(r.z_score));
        return m;
    }
    /// At most 5% of rows beyond |z| = 3 and none beyond 6.
    bool passed() const {
        if (rows.empty()) return true;
        return failed_rows() <= 0.05 * static_cast<double>(rows.size()) && max_abs_z() <= 6.0;
    }
};

namespace detail {

inline double z_score(double diff, double se, double floor = 1e-12) {
    if (se > 0.0) return diff / se;
    return std::abs(diff) <= floor ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

} // namespace detail

/// L(t) for path i of a run, using the cheapest exact simulator for the model.
inline GroupElement sample_endpoint(const LevyModel& model, double t, double dt, const RngHandle& rng) {
    if (t == 0.0) return GroupElement::identity();
    if (!model.has_drift() && !model.has_diffusion() && model.has_jumps()) {
        return simulate_compound_poisson(model, t, rng).elements.back();
    }
    return levy_endpoint(model, t, dt, rng);
}

inline std::vector<GroupElement> sample_endpoints(const LevyModel& model, double t, double dt, std::size_t n_paths,
                                                  std::uint64_t seed, unsigned threads = 1,
                                                  std::uint64_t stream_offset = 0) {
    model.validate();
    return parallel_map<GroupElement>(n_paths, threads, [&](std::size_t i) {
        return sample_endpoint(model, t, dt, RngHandle{seed, stream_offset + i});
    });
}

/// Empirical spherical transform of L(t) against e^{-t psi(lambda)}. The
/// z-score uses the real part (omega_lambda is real for real lambda).
inline VerificationReport verify_lk_mc(const ExponentSpec& spec, std::span<const double> lambdas, double t,
                                       std::size_t n_paths, double dt, std::uint64_t seed,
                                       const QuadratureSpec& q = {}, unsigned threads = 1) {
    spec.validate();
    if (t < 0.0) throw std::invalid_argument("verify_lk_mc: t must be >= 0");
    if (n_paths < 2) throw std::invalid_argument("verify_lk_mc: need at least 2 paths");
    VerificationReport rep;
    rep.metadata = {seed, n_paths, dt};
    if (lambdas.empty()) return rep;
    const auto samples = sample_endpoints(spec.model, t, dt, n_paths, seed, threads);
    const auto est = empirical_spherical_transform_grid(samples, lambdas, q, threads);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const double pred = std::exp(-t * gangolli_exponent(spec, lambdas[i], q));
        rep.rows.push_back({lambdas[i], t, est[i].mean, est[i].std_err_re, pred,
                            detail::z_score(est[i].mean.real() - pred, est[i].std_err_re)});
    }
    return rep;
}

/// E omega_lambda(exp Z) for one step Z ~ N(0, 2 a dt I) of the scheme:
/// int_0^inf omega_lambda(exp(sqrt(2 a dt) rho P1)) rho e^{-rho^2/2} drho.
inline double diffusion_step_factor(double a_scalar, double lambda, double dt, const QuadratureSpec& q = {}) {
    const double s = std::sqrt(2.0 * a_scalar * dt);
    const auto integrand = [&](double rho) {
        return spherical_function_radial(lambda, s * rho, q).real() * rho * std::exp(-0.5 * rho * rho);
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 12.0, 15, 1e-14);
}

struct BiasRow {
    double dt = 0.0;
    double bias = 0.0;       ///< Monte Carlo estimate of E omega(M_dt) - e^{-t psi}
    double std_err = 0.0;
    double exact_bias = 0.0; ///< diffusion_step_factor^{t/dt} - e^{-t psi}
};

struct BiasStudy {
    std::vector<BiasRow> rows; ///< in the order of dts
    double ratio = 0.0;        ///< bias(dts[0]) / bias(dts[1])
    double ratio_se = 0.0;     ///< delta-method standard error of the ratio
    double exact_ratio = 0.0;
};

/// Weak-error study for pure isotropic diffusion at lambda. All levels are
/// driven by the same Brownian path, sampled on the dt_ref grid; coarse
/// increments are sums of fine ones. The estimator of the bias at level dt is
///   mean(omega(M_dt) - omega(M_ref)) + exact(dt_ref) - e^{-t psi},
/// where exact(dt_ref) is the law of the scheme at dt_ref, so only the small
/// level difference carries Monte Carlo noise.
inline BiasStudy diffusion_bias_study(double a_scalar, double lambda, double t, std::span<const double> dts,
                                      double dt_ref, std::size_t n_paths, std::uint64_t seed,
                                      const QuadratureSpec& q = {}, unsigned threads = 1) {
    if (!(a_scalar > 0.0)) throw std::invalid_argument("diffusion_bias_study: a_scalar must be > 0");
    if (dts.size() != 2) throw std::invalid_argument("diffusion_bias_study: need exactly two step sizes");
    const long n_ref = std::lround(t / dt_ref);
    if (n_ref < 1 || std::abs(n_ref * dt_ref - t) > 1e-9 * t) {
        throw std::invalid_argument("diffusion_bias_study: t must be a multiple of dt_ref");
    }
    std::vector<long> ratios;
    for (double dt : dts) {
        const long r = std::lround(dt / dt_ref);
        if (r < 1 || std::abs(r * dt_ref - dt) > 1e-9 * dt || n_ref % r != 0) {
            throw std::invalid_argument("diffusion_bias_study: each dt must be a multiple of dt_ref dividing t");
        }
        ratios.push_back(r);
    }
    const double s = std::numbers::sqrt2 * std::sqrt(a_scalar);
    const std::size_t L = dts.size();
    // Per path: omega at each coarse level minus omega at the reference level.
    const auto diffs = parallel_map<std::array<double, 2>>(n_paths, threads, [&](std::size_t i) {
        auto eng = RngHandle{seed, i}.engine(0);
        std::normal_distribution<double> normal(0.0, 1.0);
        GroupElement M_ref = GroupElement::identity();
        std::array<GroupElement, 2> M{GroupElement::identity(), GroupElement::identity()};
        std::array<double, 2> acc_x{0.0, 0.0}, acc_y{0.0, 0.0};
        const double sd = std::sqrt(dt_ref);
        for (long k = 1; k <= n_ref; ++k) {
            const double bx = sd * normal(eng);
            const double by = sd * normal(eng);
            M_ref = multiply(M_ref, exp_alg({s * bx, s * by, 0.0}));
            for (std::size_t l = 0; l < L; ++l) {
                acc_x[l] += bx;
                acc_y[l] += by;
                if (k % ratios[l] == 0) {
                    M[l] = multiply(M[l], exp_alg({s * acc_x[l], s * acc_y[l], 0.0}));
                    acc_x[l] = acc_y[l] = 0.0;
                }
            }
        }
        const double w_ref = spherical_function(lambda, M_ref, q).real();
        return std::array<double, 2>{spherical_function(lambda, M[0], q).real() - w_ref,
                                     spherical_function(lambda, M[1], q).real() - w_ref};
    });
    const double target = std::exp(-t * a_scalar * laplace_eigenvalue(lambda));
    const double exact_ref = std::pow(diffusion_step_factor(a_scalar, lambda, dt_ref, q), static_cast<double>(n_ref));

    BiasStudy out;
    std::vector<double> col(n_paths);
    std::array<double, 2> mean{}, se{};
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t i = 0; i < n_paths; ++i) col[i] = diffs[i][l];
        const MeanSE m = mean_se(std::span<const double>(col));
        mean[l] = m.mean;
        se[l] = m.std_err;
        const double exact = std::pow(diffusion_step_factor(a_scalar, lambda, dts[l], q), t / dts[l]);
        out.rows.push_back({dts[l], m.mean + exact_ref - target, m.std_err, exact - target});
    }
    // Covariance of the two level means for the ratio's standard error.
    std::vector<double> prod(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) prod[i] = (diffs[i][0] - mean[0]) * (diffs[i][1] - mean[1]);
    const double cov = pairwise_sum(std::span<const double>(prod)) / (n_paths - 1.0) / n_paths;
    const double b0 = out.rows[0].bias, b1 = out.rows[1].bias;
    out.ratio = b0 / b1;
    out.ratio_se = std::abs(out.ratio) *
                   std::sqrt(std::max(0.0, se[0] * se[0] / (b0 * b0) + se[1] * se[1] / (b1 * b1) - 2.0 * cov / (b0 * b1)));
    out.exact_ratio = out.rows[0].exact_bias / out.rows[1].exact_bias;
    return out;
}

/// Right-K-invariant test function f(g) = (1 - (d(g.o, z0)/R)^2)^4 for
/// d < R, else 0. Smooth enough (C^3) for second-order differences.
struct PlaneBump {
    PlanePoint center{0.3, 1.2};
    double radius = 2.0;

    double operator()(const GroupElement& g) const {
        const double d = hyperbolic_distance(project_to_plane(g), center);
        if (d >= radius) return 0.0;
        const double u = 1.0 - (d / radius) * (d / radius);
        return u * u * u * u;
    }
};

/// Pieces of the generator at e, with derivatives along exp(s X_i) by
/// central differences.
template <typename T>
struct GeneratorTerms {
    std::array<T, 2> grad{};    ///< (X_i f)(e)
    std::array<T, 3> hess{};    ///< (X_1^2 f, X_2^2 f, (X_1 X_2 + X_2 X_1) f / 2) at e
    T drift{}, diffusion{}, jump{};
    T total() const { return drift + diffusion + jump; }
};

/// E_eta[f(exp W)] - f(e), by trapezoid rule in the angle for the isotropic shell.
template <typename T, typename F>
T jump_expectation(const JumpLaw& law, F&& f, int angle_nodes = 512) {
    const T f0 = f(GroupElement::identity());
    if (const auto* pm = std::get_if<PointMassJump>(&law)) return f(exp_alg(pm->W)) - f0;
    if (const auto* sh = std::get_if<IsotropicShellJump>(&law)) {
        T s{};
        for (int j = 0; j < angle_nodes; ++j) {
            s += f(exp_alg(p_vector(sh->radius, 2.0 * std::numbers::pi * j / angle_nodes)));
        }
        return s / static_cast<double>(angle_nodes) - f0;
    }
    const auto& mix = std::get<AngularMixtureJump>(law);
    double wsum = 0.0;
    for (double w : mix.weights) wsum += w;
    T s{};
    for (std::size_t j = 0; j < mix.angles.size(); ++j) {
        s += (mix.weights[j] / wsum) * f(exp_alg(p_vector(mix.radius, mix.angles[j])));
    }
    return s - f0;
}

/// E_{eta x eta}[f(exp W1 exp W2) - f(exp W1) - f(exp W2) + f(e)], the
/// coefficient of (intensity t)^2 / 2 in the Poisson expansion of P_t f(e).
template <typename T, typename F>
T jump_pair_expectation(const JumpLaw& law, F&& f, int angle_nodes = 128) {
    std::vector<AlgebraVector> ws;
    std::vector<double> wt;
    if (const auto* pm = std::get_if<PointMassJump>(&law)) {
        ws.push_back(pm->W);
        wt.push_back(1.0);
    } else if (const auto* sh = std::get_if<IsotropicShellJump>(&law)) {
        for (int j = 0; j < angle_nodes; ++j) {
            ws.push_back(p_vector(sh->radius, 2.0 * std::numbers::pi * j / angle_nodes));
            wt.push_back(1.0 / angle_nodes);
        }
    } else {
        const auto& mix = std::get<AngularMixtureJump>(law);
        double wsum = 0.0;
        for (double w : mix.weights) wsum += w;
        for (std::size_t j = 0; j < mix.angles.size(); ++j) {
            ws.push_back(p_vector(mix.radius, mix.angles[j]));
            wt.push_back(mix.weights[j] / wsum);
        }
    }
    const T f0 = f(GroupElement::identity());
    std::vector<GroupElement> es;
    std::vector<T> fs;
    for (const auto& w : ws) {
        es.push_back(exp_alg(w));
        fs.push_back(f(es.back()));
    }
    T s{};
    for (std::size_t i = 0; i < es.size(); ++i) {
        T row{};
        for (std::size_t j = 0; j < es.size(); ++j) row += wt[j] * (f(product(es[i], es[j])) - fs[i] - fs[j] + f0);
        s += wt[i] * row;
    }
    return s;
}

template <typename T, typename F>
GeneratorTerms<T> generator_at_identity(const LevyModel& model, F&& f, double h = 1e-4) {
    const T f0 = f(GroupElement::identity());
    const auto along = [&](double u1, double u2, double s) { return f(exp_alg({s * u1, s * u2, 0.0})); };
    const auto second = [&](double u1, double u2) {
        return (along(u1, u2, h) - 2.0 * f0 + along(u1, u2, -h)) / (h * h);
    };
    GeneratorTerms<T> g;
    g.grad[0] = (along(1, 0, h) - along(1, 0, -h)) / (2.0 * h);
    g.grad[1] = (along(0, 1, h) - along(0, 1, -h)) / (2.0 * h);
    g.hess[0] = second(1, 0);
    g.hess[1] = second(0, 1);
    // (X_1 + X_2)^2 = X_1^2 + X_2^2 + (X_1 X_2 + X_2 X_1).
    g.hess[2] = 0.5 * (second(1, 1) - g.hess[0] - g.hess[1]);
    g.drift = model.b[0] * g.grad[0] + model.b[1] * g.grad[1];
    g.diffusion = model.a[0] * g.hess[0] + model.a[3] * g.hess[1] + (model.a[1] + model.a[2]) * g.hess[2];
    if (model.has_jumps()) g.jump = model.jump_intensity * jump_expectation<T>(model.jump_law, f);
    return g;
}

template <typename T>
struct GeneratorRow {
    double t = 0.0;
    T raw{};               ///< mean(f(M_t) - f(e)) / t
    double raw_se = 0.0;
    T estimate{};          ///< the same quantity with control variates
    double std_err = 0.0;
    T predicted{};         ///< L f(e)
    double abs_error = 0.0; ///< |estimate - predicted|
};

template <typename T>
struct GeneratorReport {
    std::vector<GeneratorRow<T>> rows;
    GeneratorTerms<T> terms;
    std::vector<double> error_ratios; ///< abs_error(t_k) / abs_error(t_{k+1})
    T extrapolated{};                 ///< polynomial extrapolation of the estimates to t = 0
    double extrapolated_se = 0.0;
};

namespace detail {

template <typename T>
double se_of(std::span<const T> xs, T& mean) {
    if constexpr (std::is_same_v<T, double>) {
        const MeanSE m = mean_se(xs);
        mean = m.mean;
        return m.std_err;
    } else {
        const ComplexMeanSE m = mean_se(xs);
        mean = m.mean;
        return m.std_err();
    }
}

/// Monte Carlo of (E F(M_t) - F(e)) / t on a common grid dt = min(t)/steps.
/// Every t in the list must be a multiple of that dt; all t share each path
/// (common random numbers). Control variates, each with known mean:
///   sum_{jumps <= t} (F(exp W_j) - F(e))                  mean t * jump term
///   sum_{pairs i < j} (F(exp W_i exp W_j) - ... + F(e))   mean (c t)^2 / 2 * J2
///   second-order expansion of F(exp z), z the summed continuous increment,
///                                                          mean t (drift + diffusion) + t^2/2 b^T H b.
/// They are unbiased whatever the model, so the estimates stay estimates of
/// (P_t F(e) - F(e)) / t; they only remove noise.
template <typename T, typename F>
GeneratorReport<T> generator_monte_carlo(const LevyModel& model, F&& f, std::vector<double> t_list,
                                         std::size_t n_paths, std::uint64_t seed, int steps, unsigned threads) {
    model.validate();
    if (t_list.empty()) throw std::invalid_argument("generator check: empty t list");
    for (double t : t_list) {
        if (!(t > 0.0)) throw std::invalid_argument("generator check: every t must be > 0");
    }
    if (n_paths < 2) throw std::invalid_argument("generator check: need at least 2 paths");
    std::sort(t_list.begin(), t_list.end(), std::greater<>());
    const double t_max = t_list.front();
    const double dt = t_list.back() / steps;
    std::vector<long> marks;
    for (double t : t_list) {
        const long k = std::lround(t / dt);
        if (std::abs(k * dt - t) > 1e-9 * t) throw std::invalid_argument("generator check: t values must share a grid");
        marks.push_back(k);
    }

    GeneratorReport<T> rep;
    rep.terms = generator_at_identity<T>(model, f);
    const auto& tm = rep.terms;
    const T f0 = f(GroupElement::identity());
    const std::size_t nt = t_list.size();
    const T pair_mean = model.has_jumps() ? jump_pair_expectation<T>(model.jump_law, f) : T{};

    struct PerPath {
        std::vector<T> raw, cv;
    };
    const auto per_path = parallel_map<PerPath>(n_paths, threads, [&](std::size_t i) {
        PerPath out{std::vector<T>(nt), std::vector<T>(nt)};
        T jump_sum{}, pair_sum{};
        std::vector<GroupElement> jumps;
        std::vector<T> jump_vals;
        AlgebraVector z{};
        const auto record = [&](double time, const GroupElement& M) {
            const long k = std::lround(time / dt);
            if (std::abs(k * dt - time) > 1e-9 * dt) return;
            for (std::size_t j = 0; j < nt; ++j) {
                if (marks[j] != k) continue;
                const T v = f(M) - f0;
                const T quad = tm.hess[0] * (z.x1 * z.x1) + tm.hess[1] * (z.x2 * z.x2) + tm.hess[2] * (2.0 * z.x1 * z.x2);
                const T cont = tm.grad[0] * z.x1 + tm.grad[1] * z.x2 + 0.5 * quad;
                out.raw[j] = v;
                out.cv[j] = v - jump_sum - pair_sum - cont;
            }
        };
        detail::run_marcus(
            model, t_max, std::min(dt, t_max), RngHandle{seed, i}, record,
            [&](double, const AlgebraVector& W) {
                const GroupElement e = exp_alg(W);
                const T fe = f(e);
                for (std::size_t k = 0; k < jumps.size(); ++k) {
                    pair_sum += f(product(jumps[k], e)) - jump_vals[k] - fe + f0;
                }
                jumps.push_back(e);
                jump_vals.push_back(fe);
                jump_sum += fe - f0;
            },
            [&](const AlgebraVector& dz) { z = z + dz; });
        return out;
    });

    std::vector<T> col(n_paths);
    std::vector<T> cv_cols;
    for (std::size_t j = 0; j < nt; ++j) {
        const double t = t_list[j];
        GeneratorRow<T> row;
        row.t = t;
        row.predicted = tm.total();
        T m{};
        for (std::size_t i = 0; i < n_paths; ++i) col[i] = per_path[i].raw[j];
        row.raw_se = se_of<T>(col, m) / t;
        row.raw = m / t;
        for (std::size_t i = 0; i < n_paths; ++i) col[i] = per_path[i].cv[j];
        row.std_err = se_of<T>(col, m) / t;
        const T bHb = tm.hess[0] * (model.b[0] * model.b[0]) + tm.hess[1] * (model.b[1] * model.b[1]) +
                      tm.hess[2] * (2.0 * model.b[0] * model.b[1]);
        const double ct = model.jump_intensity * t;
        row.estimate = tm.total() + m / t + 0.5 * t * bHb + (0.5 * ct * ct / t) * pair_mean;
        row.abs_error = std::abs(row.estimate - row.predicted);
        rep.rows.push_back(row);
    }
    for (std::size_t j = 0; j + 1 < nt; ++j) {
        rep.error_ratios.push_back(rep.rows[j].abs_error / rep.rows[j + 1].abs_error);
    }
    // Lagrange extrapolation to t = 0 through all levels, applied path by path
    // so that its standard error accounts for the common random numbers.
    if (nt >= 2) {
        std::vector<double> w(nt, 1.0);
        for (std::size_t k = 0; k < nt; ++k) {
            for (std::size_t j = 0; j < nt; ++j) {
                if (j != k) w[k] *= t_list[j] / (t_list[j] - t_list[k]);
            }
        }
        T shift{};
        for (std::size_t k = 0; k < nt; ++k) {
            const double t = t_list[k];
            const double ct = model.jump_intensity * t;
            const T bHb = tm.hess[0] * (model.b[0] * model.b[0]) + tm.hess[1] * (model.b[1] * model.b[1]) +
                          tm.hess[2] * (2.0 * model.b[0] * model.b[1]);
            shift += w[k] * (0.5 * t * bHb + (0.5 * ct * ct / t) * pair_mean);
        }
        for (std::size_t i = 0; i < n_paths; ++i) {
            T acc{};
            for (std::size_t k = 0; k < nt; ++k) acc += w[k] * per_path[i].cv[k] / t_list[k];
            col[i] = acc;
        }
        T m{};
        rep.extrapolated_se = se_of<T>(col, m);
        rep.extrapolated = tm.total() + m + shift;
    }
    return rep;
}

} // namespace detail

struct HuntOptions {
    std::size_t n_paths = 100000;
    std::uint64_t seed = 1;
    int steps = 8; ///< Marcus steps per smallest t
    unsigned threads = 1;
};

/// (P_t f(e) - f(e)) / t against L f(e) for each t in t_list.
template <typename F>
GeneratorReport<double> hunt_generator_check(const LevyModel& model, F&& f, const std::vector<double>& t_list,
                                             const HuntOptions& opt = {}) {
    return detail::generator_monte_carlo<double>(model, std::forward<F>(f), t_list, opt.n_paths, opt.seed, opt.steps,
                                                 opt.threads);
}

/// Exact (P_t f(e) - f(e)) / t for a compound Poisson process with eta = delta_W:
/// sum_n e^{-c t} (c t)^n / n! f(exp(n W)), summed until the Poisson tail is negligible.
template <typename F>
double poisson_series_difference_quotient(double intensity, const AlgebraVector& W, F&& f, double t) {
    const double m = intensity * t;
    double weight = std::exp(-m);
    double s = 0.0;
    for (int n = 0; n < 200; ++n) {
        s += weight * f(exp_alg(static_cast<double>(n) * W));
        weight *= m / (n + 1);
        if (n > m && weight < 1e-18) break;
    }
    return (s - f(GroupElement::identity())) / t;
}

/// Derivative at t = 0 of E Phi_{lambda,n1,n2}(M_t), against the generator
/// applied to the matrix coefficient g -> <xi_lambda(g) chi_n1, chi_n2>.
inline GeneratorReport<cplx> generalized_transform_derivative(const LevyModel& model, double lambda, int n1, int n2,
                                                             const std::vector<double>& t_small,
                                                             const HuntOptions& opt = {},
                                                             const QuadratureSpec& q = {}) {
    if (std::abs(n1) > 4 || std::abs(n2) > 4) throw std::invalid_argument("generalized_transform_derivative: |n| <= 4");
    const auto phi = [&](const GroupElement& g) { return generalized_spherical_function(lambda, n1, n2, g, q); };
    return detail::generator_monte_carlo<cplx>(model, phi, t_small, opt.n_paths, opt.seed, opt.steps, opt.threads);
}

struct SemigroupCheck {
    double lhs = 0.0; ///< T_s(T_t f)(e)
    double rhs = 0.0; ///< T_{s+t} f(e)
    double std_err = 0.0;
    double z_score = 0.0;
    double abs_diff = 0.0;
};

/// T_t f(g) = int_K int_G f(g k h) mu_t(dh) dk with mu_t the law of L(t).
/// Deterministic models (no diffusion, no jumps) are evaluated by the K
/// trapezoid rule of q in each K integral; otherwise by Monte Carlo with
/// uniform k draws, independent sample sets for the two sides.
template <typename F>
SemigroupCheck t_semigroup_check(const LevyModel& model, F&& f, double s, double t, std::size_t n_paths,
                                 std::uint64_t seed, const QuadratureSpec& q = {}, double dt = 0.01,
                                 unsigned threads = 1) {
    model.validate();
    if (s < 0.0 || t < 0.0) throw std::invalid_argument("t_semigroup_check: times must be >= 0");
    SemigroupCheck out;
    if (!model.has_diffusion() && !model.has_jumps()) {
        const AlgebraVector Y{model.b[0], model.b[1], 0.0};
        const GroupElement hs = exp_alg(s * Y), ht = exp_alg(t * Y), hst = exp_alg((s + t) * Y);
        const int N = q.n_points;
        std::vector<double> outer(N), single(N);
        for (int i = 0; i < N; ++i) {
            const GroupElement ki = rotation(2.0 * std::numbers::pi * i / N);
            double acc = 0.0;
            for (int j = 0; j < N; ++j) {
                acc += f(product(product(product(ki, hs), rotation(2.0 * std::numbers::pi * j / N)), ht));
            }
            outer[i] = acc / N;
            single[i] = f(product(ki, hst));
        }
        out.lhs = pairwise_sum(std::span<const double>(outer)) / N;
        out.rhs = pairwise_sum(std::span<const double>(single)) / N;
        out.abs_diff = std::abs(out.lhs - out.rhs);
        out.z_score = detail::z_score(out.lhs - out.rhs, 0.0, 1e-10);
        return out;
    }
    if (n_paths < 2) throw std::invalid_argument("t_semigroup_check: need at least 2 paths");
    const double two_pi = 2.0 * std::numbers::pi;
    // Streams: [0, n) for mu_s, [n, 2n) for mu_t, [2n, 3n) for mu_{s+t}.
    const auto lhs_vals = parallel_map<double>(n_paths, threads, [&](std::size_t i) {
        auto aux = RngHandle{seed, i}.engine(4);
        std::uniform_real_distribution<double> angle(0.0, two_pi);
        const GroupElement h = sample_endpoint(model, s, std::min(dt, s > 0 ? s : dt), RngHandle{seed, i});
        const GroupElement h2 =
            sample_endpoint(model, t, std::min(dt, t > 0 ? t : dt), RngHandle{seed, n_paths + i});
        const GroupElement k1 = rotation(angle(aux)), k2 = rotation(angle(aux));
        return f(product(product(product(k1, h), k2), h2));
    });
    const auto rhs_vals = parallel_map<double>(n_paths, threads, [&](std::size_t i) {
        auto aux = RngHandle{seed, 2 * n_paths + i}.engine(4);
        std::uniform_real_distribution<double> angle(0.0, two_pi);
        const GroupElement h = sample_endpoint(model, s + t, std::min(dt, s + t > 0 ? s + t : dt),
                                               RngHandle{seed, 2 * n_paths + i});
        return f(product(rotation(angle(aux)), h));
    });
    const MeanSE l = mean_se(std::span<const double>(lhs_vals));
    const MeanSE r = mean_se(std::span<const double>(rhs_vals));
    out.lhs = l.mean;
    out.rhs = r.mean;
    out.std_err = std::hypot(l.std_err, r.std_err);
    out.abs_diff = std::abs(l.mean - r.mean);
    out.z_score = detail::z_score(l.mean - r.mean, out.std_err);
    return out;
}

struct BiInvarianceResult {
    double statistic = 0.0; ///< Kuiper V = D+ + D-
    double p_value = 1.0;
    bool invariant = true;  ///< false when p_value < alpha
    std::size_t used = 0;   ///< samples with a well-defined angle
};

namespace detail {

/// Asymptotic Kuiper tail probability Q(x) = 2 sum (4 j^2 x^2 - 1) e^{-2 j^2 x^2}.
inline double kuiper_q(double x) {
    if (x < 0.4) return 1.0;
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = (4.0 * j * j * x * x - 1.0) * std::exp(-2.0 * j * j * x * x);
        s += term;
        if (std::abs(term) < 1e-16 * std::abs(s)) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

inline double kuiper_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double dplus = 0.0, dminus = 0.0;
    std::size_t i = 0, j = 0;
    const double na = a.size(), nb = b.size();
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        const double d = i / na - j / nb;
        dplus = std::max(dplus, d);
        dminus = std::max(dminus, -d);
    }
    return dplus + dminus;
}

} // namespace detail

/// Two-sample Kuiper test comparing the angle of the Cartan p-part of the
/// samples with that of left-K-randomized copies k g (k uniform). A
/// K-bi-invariant law gives identical distributions. Samples within 1e-9 of
/// K carry no angle and are skipped. alpha defaults to the two-sided
/// 3-sigma level.
inline BiInvarianceResult bi_invariance_test(std::span<const GroupElement> samples, const RngHandle& rng,
                                             double alpha = 0.0027) {
    if (samples.size() < 1000) throw std::invalid_argument("bi_invariance_test: need at least 1000 samples");
    auto eng = rng.engine(4);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<double> orig, rand;
    for (const GroupElement& g : samples) {
        const double th = angle(eng);
        const AlgebraVector X = cartan_decompose(g).X;
        if (p_norm(X) < 1e-9) continue;
        orig.push_back(std::atan2(X.x2, X.x1));
        const AlgebraVector Y = cartan_decompose(product(rotation(th), g)).X;
        rand.push_back(std::atan2(Y.x2, Y.x1));
    }
    BiInvarianceResult res;
    res.used = orig.size();
    if (orig.size() < 2) return res;
    res.statistic = detail::kuiper_two_sample(orig, rand);
    const double ne = std::sqrt(0.5 * static_cast<double>(orig.size()));
    res.p_value = detail::kuiper_q((ne + 0.155 + 0.24 / ne) * res.statistic);
    res.invariant = res.p_value >= alpha;
    return res;
}

} // namespace gelfand
