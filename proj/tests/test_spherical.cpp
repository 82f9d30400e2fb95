#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "gelfand/spherical.hpp"

using namespace gelfand;

namespace {

// Oracle: Laplace's integral for the conical function,
//   P_{-1/2 + i l}(cosh r) = (1/pi) int_0^pi (cosh r + sinh r cos phi)^{-1/2 + i l} dphi.
double conical_legendre(double lambda, double r) {
    const auto f = [&](double phi) {
        const double base = std::cosh(r) + std::sinh(r) * std::cos(phi);
        return std::pow(base, -0.5) * std::cos(lambda * std::log(base));
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi, 15, 1e-13) /
           std::numbers::pi;
}

const double lambdas[] = {0.0, 0.5, 1.0, 2.0, 5.0};

GroupElement random_element(std::mt19937_64& eng, double max_radius) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return multiply(exp_alg(p_vector(max_radius * u(eng), 2 * std::numbers::pi * u(eng))),
                    rotation(2 * std::numbers::pi * u(eng)));
}

} // namespace

TEST(SphericalFunction, IdentityAndK) {
    for (double l : lambdas) {
        EXPECT_NEAR(std::abs(spherical_function(l, GroupElement::identity()) - 1.0), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(spherical_function(l, rotation(0.8)) - 1.0), 0.0, 1e-14);
    }
}

TEST(SphericalFunction, MatchesLaplaceIntegral) {
    for (double l : lambdas) {
        for (double r : {0.1, 1.0, 3.0}) {
            const cplx w = spherical_function_radial(l, r);
            EXPECT_NEAR(w.real(), conical_legendre(l, r), 1e-8) << "lambda " << l << " r " << r;
            EXPECT_NEAR(w.imag(), 0.0, 1e-8);
        }
    }
}

TEST(SphericalFunction, MatchesTabulatedConicalValues) {
    // Reference values of P_{-1/2+i}(cosh r) from an arbitrary-precision library.
    EXPECT_NEAR(spherical_function_radial(1.0, 0.1).real(), 0.996878740419765, 1e-13);
    EXPECT_NEAR(spherical_function_radial(1.0, 1.0).real(), 0.722075228279375, 1e-13);
    EXPECT_NEAR(spherical_function_radial(1.0, 3.0).real(), -0.123577995537099, 1e-13);
}

TEST(SphericalFunction, BiInvariant) {
    std::mt19937_64 eng(5);
    const GroupElement g = random_element(eng, 2.5);
    for (double l : {0.5, 2.0}) {
        const cplx w = spherical_function(l, g);
        EXPECT_LT(std::abs(spherical_function(l, multiply(rotation(0.4), multiply(g, rotation(-1.3)))) - w), 1e-12);
        EXPECT_LT(std::abs(spherical_function_radial(l, cartan_radius(g)) - w), 1e-7);
    }
}

TEST(SphericalFunction, BalancedAgreesWithDensePlainRule) {
    // Oracle: the plain trapezoid rule with many nodes.
    for (double l : lambdas) {
        for (double r : {0.5, 2.0, 4.0}) {
            const cplx dense = spherical_function_radial(l, r, {8192, false});
            EXPECT_LT(std::abs(spherical_function_radial(l, r, {256, true}) - dense), 1e-10) << l << " " << r;
        }
    }
}

TEST(SphericalFunction, GridMatchesPointwise) {
    const std::vector<double> ls(std::begin(lambdas), std::end(lambdas));
    const GroupElement g = exp_alg({1.2, -0.4, 0.3});
    const auto grid = spherical_function_grid(ls, g);
    for (std::size_t i = 0; i < ls.size(); ++i) EXPECT_EQ(grid[i], spherical_function(ls[i], g));
}

TEST(SphericalFunction, FunctionalEquation) {
    std::mt19937_64 eng(23);
    for (int trial = 0; trial < 5; ++trial) {
        const GroupElement g = random_element(eng, 2.0), h = random_element(eng, 2.0);
        for (double l : lambdas) {
            const double res = check_functional_equation(l, g, h, {256, true});
            EXPECT_LT(res, 1e-8) << "lambda " << l;
        }
    }
}

TEST(SphericalFunction, FunctionalEquationConvergesWithNodes) {
    const GroupElement g = exp_alg(p_vector(2.0, 0.3)), h = exp_alg(p_vector(2.0, 1.9));
    double prev = check_functional_equation(2.0, g, h, {16, true});
    for (int n : {32, 64}) {
        const double cur = check_functional_equation(2.0, g, h, {n, true});
        if (prev > 1e-12) {
            EXPECT_TRUE(cur < 1e-12 || prev / cur >= 100.0) << n << ": " << prev << " -> " << cur;
        }
        prev = cur;
    }
}

TEST(SphericalFunction, LaplaceEigenvalueByFiniteDifferences) {
    // Radial Laplacian f'' + coth(r) f'; second-order differences.
    for (double l : {0.0, 1.0, 2.0}) {
        for (double r : {0.7, 1.5}) {
            std::vector<double> errs;
            for (double h : {0.04, 0.02, 0.01}) {
                const auto w = [&](double x) { return spherical_function_radial(l, x).real(); };
                const double d2 = (w(r + h) - 2 * w(r) + w(r - h)) / (h * h);
                const double d1 = (w(r + h) - w(r - h)) / (2 * h);
                errs.push_back(std::abs(d2 + d1 / std::tanh(r) + laplace_eigenvalue(l) * w(r)));
            }
            EXPECT_GE(std::log2(errs[0] / errs[1]), 1.9);
            EXPECT_GE(std::log2(errs[1] / errs[2]), 1.9);
        }
    }
}

TEST(QuadratureSpec, Validation) {
    EXPECT_THROW((QuadratureSpec{15, true}.validate()), std::invalid_argument);
    EXPECT_THROW((QuadratureSpec{8, true}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((QuadratureSpec{16, false}.validate()));
}

TEST(PrincipalSeries, ZeroModeIsSphericalFunction) {
    const GroupElement g = exp_alg({0.9, 0.5, -0.7});
    for (double l : {0.0, 1.0, 3.0}) {
        const ModeMatrix M = principal_series_matrix(l, g, 6);
        EXPECT_LT(std::abs(M(0, 0) - spherical_function(l, g)), 1e-12);
        EXPECT_LT(std::abs(generalized_spherical_function(l, 0, 0, g) - spherical_function(l, g)), 1e-12);
    }
}

TEST(PrincipalSeries, RotationsAreDiagonal) {
    const double phi = 0.9;
    const ModeMatrix M = principal_series_matrix(1.0, rotation(phi), 5);
    for (int m = -5; m <= 5; ++m) {
        for (int n = -5; n <= 5; ++n) {
            const cplx expected = m == n ? std::polar(1.0, n * phi) : cplx{};
            EXPECT_LT(std::abs(M(m, n) - expected), 1e-13);
        }
    }
}

TEST(PrincipalSeries, OddCouplingsVanish) {
    // -I acts trivially on the spherical principal series, so modes of
    // different parity never couple.
    const ModeMatrix M = principal_series_matrix(1.0, exp_alg({1.1, -0.6, 0.2}), 4);
    EXPECT_LT(std::abs(M(1, 0)), 1e-14);
    EXPECT_LT(std::abs(M(0, 3)), 1e-14);
    EXPECT_GT(std::abs(M(2, 0)), 1e-2);
}

TEST(PrincipalSeries, IsHomomorphismOnTruncatedModes) {
    // <xi(gh) chi_n, chi_m> = sum_k <xi(g) chi_k, chi_m><xi(h) chi_n, chi_k>, with
    // the inner sum carried far enough for the neglected modes to be tiny.
    const GroupElement g = exp_alg(p_vector(0.8, 0.4)), h = exp_alg(p_vector(0.6, 2.0));
    const int big = 40;
    const QuadratureSpec q{512, true};
    const ModeMatrix Mg = principal_series_matrix(1.0, g, big, q), Mh = principal_series_matrix(1.0, h, big, q);
    const ModeMatrix Mgh = principal_series_matrix(1.0, multiply(g, h), 4, q);
    for (int m = -4; m <= 4; ++m) {
        for (int n = -4; n <= 4; ++n) {
            cplx s{};
            for (int k = -big; k <= big; ++k) s += Mg(m, k) * Mh(k, n);
            EXPECT_LT(std::abs(s - Mgh(m, n)), 1e-10) << m << "," << n;
        }
    }
}

TEST(PrincipalSeries, ApplyMatchesMatrix) {
    const GroupElement g = exp_alg({0.5, 0.7, 0.0});
    const ModeMatrix M = principal_series_matrix(0.5, g, 6);
    FourierModeVector v(6);
    v[0] = 1.0;
    v[2] = cplx(0.3, -0.2);
    v[-4] = 0.5;
    const FourierModeVector out = principal_series_apply(0.5, g, v, 6);
    for (int m = -6; m <= 6; ++m) {
        cplx s{};
        for (int n = -6; n <= 6; ++n) s += M(m, n) * v[n];
        EXPECT_LT(std::abs(out[m] - s), 1e-13);
    }
}

TEST(PrincipalSeries, KeystructPairing) {
    std::mt19937_64 eng(31);
    for (int trial = 0; trial < 3; ++trial) {
        const GroupElement g = random_element(eng, 1.5);
        for (int n1 = -4; n1 <= 4; ++n1) {
            for (int n2 = -4; n2 <= 4; ++n2) EXPECT_LT(check_keystruct(1.0, n1, n2, g, 8), 1e-8);
        }
    }
    EXPECT_THROW(check_keystruct(1.0, 4, 0, exp_alg({1, 0, 0}), 6), std::invalid_argument);
}

TEST(PrincipalSeries, GeneralizedSphericalAgreesWithDenseRule) {
    const GroupElement g = exp_alg({1.0, 0.0, 0.0});
    for (auto [n1, n2] : {std::pair{1, 1}, std::pair{2, 0}, std::pair{-3, 1}}) {
        const cplx dense = generalized_spherical_function(1.0, n1, n2, g, {8192, false});
        EXPECT_LT(std::abs(generalized_spherical_function(1.0, n1, n2, g) - dense), 1e-10);
    }
}
