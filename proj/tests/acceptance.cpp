// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gelfand/cli.hpp"
#include "gelfand/gelfand.hpp"

using namespace gelfand;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s  C%-2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GroupElement random_element(std::mt19937_64& eng, double max_radius) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return multiply(exp_alg(p_vector(max_radius * u(eng), 2 * std::numbers::pi * u(eng))),
                    rotation(2 * std::numbers::pi * u(eng)));
}

// Laplace's integral for the conical function, independent of the K quadrature.
double conical_legendre(double lambda, double r) {
    const auto f = [&](double phi) {
        const double base = std::cosh(r) + std::sinh(r) * std::cos(phi);
        return std::pow(base, -0.5) * std::cos(lambda * std::log(base));
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi, 15, 1e-13) /
           std::numbers::pi;
}

const double lambdas5[] = {0.0, 0.5, 1.0, 2.0, 5.0};

void decompositions() {
    std::mt19937_64 eng(101);
    const int n = 10000;
    std::vector<GroupElement> gs;
    for (int i = 0; i < n; ++i) gs.push_back(random_element(eng, 3.0));
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const auto& g : gs) {
        const CartanDecomposition cd = cartan_decompose(g);
        worst = std::max(worst, iwasawa_reconstruct(iwasawa_decompose(g)).frobenius_distance(g));
        worst = std::max(worst, product(exp_alg(cd.X), cd.k).frobenius_distance(g));
    }
    const double wall = seconds_since(t0);
    report(1, "decompositions", worst < 1e-10 && wall < 2.0, fmt("max err %.2e, %.3f s for %d", worst, wall, n));
}

void functional_equation() {
    std::mt19937_64 eng(202);
    double worst = 0.0;
    bool converges = true;
    for (int trial = 0; trial < 5; ++trial) {
        const GroupElement g = random_element(eng, 2.0), h = random_element(eng, 2.0);
        for (double l : lambdas5) {
            worst = std::max(worst, check_functional_equation(l, g, h, {256, true}));
            // 16 nodes is pre-asymptotic at lambda = 5 and radius 4; the
            // doubling sequence starts at 32.
            double prev = check_functional_equation(l, g, h, {32, true});
            for (int nodes = 64; nodes <= 256 && prev > 1e-12; nodes *= 2) {
                const double cur = check_functional_equation(l, g, h, {nodes, true});
                if (!(cur < 1e-12 || prev / cur >= 100.0)) converges = false;
                prev = cur;
            }
        }
    }
    report(2, "functional equation", worst < 1e-8 && converges,
           fmt("max residual %.2e at 256 nodes, each doubling from 32 gains >= 100x: %s", worst, converges ? "yes" : "no"));
}

void legendre() {
    double worst = 0.0;
    for (double l : lambdas5) {
        for (double r : {0.1, 1.0, 3.0}) {
            worst = std::max(worst, std::abs(spherical_function_radial(l, r) - conical_legendre(l, r)));
        }
    }
    report(3, "conical Legendre oracle", worst < 1e-8, fmt("max |diff| %.2e", worst));
}

void eigenvalue() {
    double min_order = 1e9;
    for (double l : {0.0, 1.0, 2.0}) {
        for (double r : {0.7, 1.5}) {
            std::vector<double> errs;
            for (double h : {0.04, 0.02, 0.01}) {
                const auto w = [&](double x) { return spherical_function_radial(l, x).real(); };
                const double d2 = (w(r + h) - 2 * w(r) + w(r - h)) / (h * h);
                const double d1 = (w(r + h) - w(r - h)) / (2 * h);
                errs.push_back(std::abs(d2 + d1 / std::tanh(r) + laplace_eigenvalue(l) * w(r)));
            }
            min_order = std::min({min_order, std::log2(errs[0] / errs[1]), std::log2(errs[1] / errs[2])});
        }
    }
    report(4, "Laplace eigenvalue", min_order >= 1.9, fmt("min observed order %.3f", min_order));
}

void keystruct() {
    std::mt19937_64 eng(303);
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const GroupElement g = random_element(eng, 1.5);
        for (double l : {0.5, 1.0, 2.0}) {
            for (int n1 = -4; n1 <= 4; ++n1) {
                for (int n2 = -4; n2 <= 4; ++n2) worst = std::max(worst, check_keystruct(l, n1, n2, g, 8));
            }
        }
    }
    report(5, "matrix coefficient pairing", worst < 1e-8, fmt("max residual %.2e", worst));
}

void convolution() {
    const std::vector<GroupElement> a(3, exp_alg({0.7, 0.2, 0.0})), b(3, exp_alg({-0.3, 0.9, 0.0}));
    const double exact = check_convolution_identity(a, b, 1.0, 4).max_abs_diff;
    const auto m = LevyModel::compound_poisson(1.0, default_anisotropic_law());
    const std::size_t n = 10000;
    const auto s1 = sample_endpoints(m, 0.5, 0.01, n, 404, 4);
    const auto s2 = sample_endpoints(m, 0.5, 0.01, n, 404, 4, n);
    const ConvolutionCheck c = check_convolution_identity(s1, s2, 1.0, 4, {}, 4);
    report(6, "convolution identity", exact < 1e-10 && c.max_z <= 3.0,
           fmt("point masses %.2e, Monte Carlo max |z| %.2f (n = %zu)", exact, c.max_z, n));
}

void levy_khintchine() {
    const std::vector<double> ls{0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0};
    const ExponentSpec spec = ExponentSpec::from_model(LevyModel::compound_poisson(1.0, IsotropicShellJump{1.0}));
    const auto t0 = std::chrono::steady_clock::now();
    const VerificationReport rep = verify_lk_mc(spec, ls, 1.0, 100000, 0.01, 505, {}, 4);
    const double wall = seconds_since(t0);
    report(7, "Levy-Khintchine", rep.passed() && wall < 60.0,
           fmt("%zu/%zu rows within 3 SE, max |z| %.2f, %.1f s", rep.passed_rows(), rep.rows.size(), rep.max_abs_z(),
               wall));
}

void diffusion_bias() {
    const std::vector<double> dts{0.02, 0.01};
    const BiasStudy b = diffusion_bias_study(1.0, 1.0, 1.0, dts, 0.00125, 100000, 606, {}, 4);
    const bool ok = b.ratio >= 1.5 && b.ratio <= 2.5;
    report(8, "diffusion weak order", ok,
           fmt("bias ratio %.3f +- %.3f (scheme law %.3f), biases %.3e / %.3e", b.ratio, b.ratio_se, b.exact_ratio,
               b.rows[0].bias, b.rows[1].bias));
}

void hunt() {
    const PlaneBump f;
    const std::vector<double> ts{0.1, 0.05, 0.025};
    bool ok = true;
    std::string detail;
    const auto ratios_ok = [](const GeneratorReport<double>& r) {
        for (double q : r.error_ratios) {
            if (!(q >= 1.5 && q <= 2.5)) return false;
        }
        return true;
    };
    const auto ratios_text = [](const GeneratorReport<double>& r) {
        std::string s;
        for (double q : r.error_ratios) s += fmt("%s%.2f", s.empty() ? "" : "/", q);
        return s;
    };

    HuntOptions opt;
    opt.threads = 4;
    opt.seed = 707;

    HuntOptions det = opt;
    det.n_paths = 16;
    const auto drift = hunt_generator_check(LevyModel::drift({0.8, -0.5, 0.0}), f, ts, det);
    ok = ok && ratios_ok(drift);
    detail += "drift " + ratios_text(drift);

    const AlgebraVector W{0.7, 0.2, 0.0};
    const auto jump = hunt_generator_check(LevyModel::compound_poisson(1.0, PointMassJump{W}), f, ts, opt);
    const double Lf = jump.terms.total();
    const bool extrap_ok = std::abs(jump.extrapolated - Lf) <= 3.0 * jump.extrapolated_se;
    bool series_ok = true;
    for (const auto& row : jump.rows) {
        if (!(std::abs(row.raw - poisson_series_difference_quotient(1.0, W, f, row.t)) <= 3.0 * row.raw_se)) {
            series_ok = false;
        }
    }
    ok = ok && ratios_ok(jump) && extrap_ok && series_ok;
    detail += "; jump " + ratios_text(jump) +
              fmt(" (t->0 %.5f vs Lf %.5f, %.1f SE; raw vs series %s)", jump.extrapolated, Lf,
                  std::abs(jump.extrapolated - Lf) / jump.extrapolated_se, series_ok ? "ok" : "off");

    LevyModel mixed = LevyModel::brownian(0.5);
    mixed.b = {0.4, 0.3};
    mixed.jump_intensity = 1.0;
    mixed.jump_law = IsotropicShellJump{0.6};
    const auto mix = hunt_generator_check(mixed, f, ts, opt);
    ok = ok && ratios_ok(mix);
    detail += "; mixed " + ratios_text(mix);
    report(9, "generator at identity", ok, detail);
}

void semigroup() {
    const PlaneBump f;
    const auto cpp = t_semigroup_check(LevyModel::compound_poisson(1.0, IsotropicShellJump{1.0}), f, 0.5, 0.5, 100000,
                                       808, {}, 0.01, 4);
    const auto geo = t_semigroup_check(LevyModel::drift({1.0, 0.0, 0.0}), f, 0.5, 0.5, 0, 808, {256, true});
    const bool ok = std::abs(cpp.z_score) <= 3.0 && std::abs(geo.z_score) <= 3.0;
    report(10, "T-semigroup", ok,
           fmt("compound Poisson z %.2f; geodesic |T_s T_t f - T_{s+t} f| = %.3e (%.6f vs %.6f)", cpp.z_score,
               geo.abs_diff, geo.lhs, geo.rhs));
}

void plancherel() {
    const auto cal = calibrate_plancherel(gaussian_bump());
    const double c2pi = cal.calibration.C * 2.0 * std::numbers::pi;
    const RadialFunction g{[](double r) { return std::exp(-r * r / 0.64) * (1.0 + 0.5 * r * r); }, 6.0};
    const SpectralGrid grid = spectral_grid(g);
    const InversionResult inv = inverse_transform_at_radius(grid, 0.0, cal.calibration);
    const double rel = std::abs(inv.value - g(0.0)) / std::abs(g(0.0));
    const PlancherelNorms n = plancherel_norms(g, grid, cal.calibration);
    const double nrel = std::abs(n.spectral - n.spatial) / n.spatial;
    report(11, "Plancherel", std::abs(c2pi - 1.0) < 1e-6 && rel < 1e-3 && nrel < 1e-3,
           fmt("C*2pi - 1 = %.1e, held-out inversion rel err %.1e, norm identity rel err %.1e", c2pi - 1.0, rel, nrel));
}

void bi_invariance() {
    const std::size_t n = 10000;
    const auto iso = sample_endpoints(LevyModel::compound_poisson(1.0, IsotropicShellJump{1.0}), 1.0, 0.01, n, 909, 4);
    const auto an = sample_endpoints(LevyModel::compound_poisson(1.0, default_anisotropic_law()), 1.0, 0.01, n, 909, 4);
    const auto ri = bi_invariance_test(iso, {909, n});
    const auto ra = bi_invariance_test(an, {909, n});
    report(12, "bi-invariance test", ri.invariant && !ra.invariant,
           fmt("isotropic p = %.3f (accepted: %s), anisotropic p = %.1e (rejected: %s)", ri.p_value,
               ri.invariant ? "yes" : "no", ra.p_value, ra.invariant ? "no" : "yes"));
}

void no_jump_atom() {
    const LevyModel m = LevyModel::compound_poisson(1.0, IsotropicShellJump{1.0});
    const std::size_t n = 100000;
    const auto z = parallel_map<double>(n, 4, [&](std::size_t i) {
        return simulate_compound_poisson(m, 1.0, {1010, i}).jump_count == 0 ? 1.0 : 0.0;
    });
    const MeanSE s = mean_se(std::span<const double>(z));
    const double zs = (s.mean - std::exp(-1.0)) / s.std_err;
    report(13, "no-jump probability", std::abs(zs) <= 3.0, fmt("fraction %.5f vs e^-1 = %.5f, z %.2f", s.mean, std::exp(-1.0), zs));
}

void cli_determinism() {
    const auto cfg = cli::ExperimentConfig::resolve({{"command", "verify-lk"},
                                                     {"seed", "1111"},
                                                     {"n_paths", "20000"},
                                                     {"lambdas", "0.25,0.5,1,2"},
                                                     {"model.a11", "0.3"},
                                                     {"model.a22", "0.3"},
                                                     {"model.jump_law", "isotropic"},
                                                     {"model.jump_intensity", "1"}});
    const std::string one = cli::render_csv(cli::run_experiment(cfg, 1).table, cfg);
    const std::string four = cli::render_csv(cli::run_experiment(cfg, 4).table, cfg);
    report(14, "CLI determinism", one == four, fmt("%zu bytes, identical for 1 and 4 threads: %s", one.size(),
                                                   one == four ? "yes" : "no"));
}

} // namespace

int main() {
    decompositions();
    functional_equation();
    legendre();
    eigenvalue();
    keystruct();
    convolution();
    levy_khintchine();
    diffusion_bias();
    hunt();
    semigroup();
    plancherel();
    bi_invariance();
    no_jump_atom();
    cli_determinism();
    std::printf("%d of 14 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
