// Harish-Chandra spherical functions, spherical principal series on
// truncated Fourier modes of K, and generalized spherical functions.
//
// All integrals over K use the trapezoid rule with Haar measure dtheta/2pi.
// In balanced mode the circle is reparametrized through the boundary action
// of h = exp(-X/2), where g = exp(X) k0 is the Cartan decomposition:
//
//   int_K F(k) dk = int_K F(u(k h)) e^{2 rho A(k h)} dk,
//
// and the cocycle A(k h g) = A(k h) + A(u(k h) g) gives the integrand in
// terms of two Iwasawa decompositions per node. The reparametrized integrand
// behaves like that of an element of half the radius, which keeps the rule
// accurate for radii where the plain rule is not.
#pragma once

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <span>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gelfand/lie.hpp"

namespace gelfand {

using cplx = std::complex<double>;

/// Half-sum of positive roots in the curvature -1 normalization.
inline constexpr double rho_half = 0.5;

/// Eigenvalue of -Delta on omega_lambda: lambda^2 + 1/4.
constexpr double laplace_eigenvalue(double lambda) { return lambda * lambda + rho_half * rho_half; }

struct QuadratureSpec {
    int n_points = 256;
    bool balanced = true;

    void validate() const {
        if (n_points < 16 || n_points % 2 != 0) {
            throw std::invalid_argument("QuadratureSpec: n_points must be even and >= 16");
        }
    }
};

/// Quadrature node for int_K F(k) dk ~ sum weight * F(k_theta), with the
/// Iwasawa data of k_theta g precomputed.
struct KNode {
    double weight;
    double theta;   ///< angle of the K element the integrand is evaluated at
    double A;       ///< A(k_theta g)
    double theta_u; ///< angle of u(k_theta g)
};

inline std::vector<KNode> k_nodes(const GroupElement& g, const QuadratureSpec& q) {
    q.validate();
    const int N = q.n_points;
    std::vector<KNode> nodes;
    nodes.reserve(N);
    if (!q.balanced) {
        for (int j = 0; j < N; ++j) {
            const double th = 2.0 * std::numbers::pi * j / N;
            const IwasawaCoords w = iwasawa_decompose(product(rotation(th), g));
            nodes.push_back({1.0 / N, th, w.A, w.theta_u});
        }
        return nodes;
    }
    const CartanDecomposition cd = cartan_decompose(g);
    const GroupElement h = exp_alg(-0.5 * cd.X);
    const GroupElement hg = product(h, g);
    for (int j = 0; j < N; ++j) {
        const GroupElement k = rotation(2.0 * std::numbers::pi * j / N);
        const IwasawaCoords wh = iwasawa_decompose(product(k, h));
        const IwasawaCoords whg = iwasawa_decompose(product(k, hg));
        nodes.push_back({std::exp(2.0 * rho_half * wh.A) / N, wh.theta_u, whg.A - wh.A, whg.theta_u});
    }
    return nodes;
}

namespace detail {

struct WeightedA {
    double weight;
    double A;
};

/// Same nodes as k_nodes, without the angles (enough for omega_lambda).
inline std::vector<WeightedA> a_nodes(const GroupElement& g, const QuadratureSpec& q) {
    q.validate();
    const int N = q.n_points;
    std::vector<WeightedA> nodes(N);
    const auto a_coord = [](const GroupElement& x) { return -std::log(x.c * x.c + x.d * x.d); };
    if (!q.balanced) {
        for (int j = 0; j < N; ++j) {
            nodes[j] = {1.0 / N, a_coord(product(rotation(2.0 * std::numbers::pi * j / N), g))};
        }
        return nodes;
    }
    const CartanDecomposition cd = cartan_decompose(g);
    const GroupElement h = exp_alg(-0.5 * cd.X);
    const GroupElement hg = product(h, g);
    for (int j = 0; j < N; ++j) {
        const GroupElement k = rotation(2.0 * std::numbers::pi * j / N);
        const double ah = a_coord(product(k, h));
        nodes[j] = {std::exp(2.0 * rho_half * ah) / N, a_coord(product(k, hg)) - ah};
    }
    return nodes;
}

} // namespace detail

/// omega_lambda(g) = int_K e^{(i lambda + rho) A(k g)} dk.
inline cplx spherical_function(double lambda, const GroupElement& g, const QuadratureSpec& q = {}) {
    cplx s{};
    for (const auto& n : detail::a_nodes(g, q)) s += n.weight * std::exp(cplx(rho_half, lambda) * n.A);
    return s;
}

/// omega_lambda(g) for every lambda in the list, sharing one set of nodes.
inline std::vector<cplx> spherical_function_grid(std::span<const double> lambdas, const GroupElement& g,
                                                 const QuadratureSpec& q = {}) {
    const auto nodes = detail::a_nodes(g, q);
    std::vector<cplx> out(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        cplx s{};
        for (const auto& n : nodes) s += n.weight * std::exp(cplx(rho_half, lambdas[i]) * n.A);
        out[i] = s;
    }
    return out;
}

inline GroupElement radial_element(double r) { return exp_alg({r, 0.0, 0.0}); }

/// omega_lambda(exp(r P1)).
inline cplx spherical_function_radial(double lambda, double r, const QuadratureSpec& q = {}) {
    return spherical_function(lambda, radial_element(r), q);
}

/// |int_K omega(g k h) dk - omega(g) omega(h)| with an outer trapezoid
/// rule over k (n_points nodes) and the inner omega by q.
inline double check_functional_equation(double lambda, const GroupElement& g, const GroupElement& h,
                                        const QuadratureSpec& q = {}) {
    q.validate();
    cplx outer{};
    for (int j = 0; j < q.n_points; ++j) {
        const GroupElement k = rotation(2.0 * std::numbers::pi * j / q.n_points);
        outer += spherical_function(lambda, product(product(g, k), h), q);
    }
    outer /= static_cast<double>(q.n_points);
    return std::abs(outer - spherical_function(lambda, g, q) * spherical_function(lambda, h, q));
}

/// Coefficients against chi_n(theta) = e^{i n theta}, n in [-n_max, n_max].
struct FourierModeVector {
    int n_max = 0;
    std::vector<cplx> coeffs;

    FourierModeVector() = default;
    explicit FourierModeVector(int nmax) : n_max(nmax), coeffs(2 * nmax + 1) {}

    static FourierModeVector unit(int nmax, int mode = 0) {
        FourierModeVector v(nmax);
        v[mode] = 1.0;
        return v;
    }

    int size() const { return 2 * n_max + 1; }
    cplx& operator[](int n) { return coeffs[n + n_max]; }
    const cplx& operator[](int n) const { return coeffs[n + n_max]; }

    double norm() const {
        double s = 0.0;
        for (const cplx& c : coeffs) s += std::norm(c);
        return std::sqrt(s);
    }
};

/// Square matrix indexed by modes (m, n) in [-n_max, n_max]^2.
struct ModeMatrix {
    int n_max = 0;
    std::vector<cplx> data;

    ModeMatrix() = default;
    explicit ModeMatrix(int nmax) : n_max(nmax), data((2 * nmax + 1) * (2 * nmax + 1)) {}

    int size() const { return 2 * n_max + 1; }
    cplx& operator()(int m, int n) { return data[(m + n_max) * size() + (n + n_max)]; }
    const cplx& operator()(int m, int n) const { return data[(m + n_max) * size() + (n + n_max)]; }

    FourierModeVector column(int n) const {
        FourierModeVector v(n_max);
        for (int m = -n_max; m <= n_max; ++m) v[m] = (*this)(m, n);
        return v;
    }
};

namespace detail {

/// e^{i n theta} for n in [-n_max, n_max].
inline void fill_characters(double theta, int n_max, std::vector<cplx>& out) {
    out.assign(2 * n_max + 1, cplx{});
    const cplx z = std::polar(1.0, theta);
    cplx p = 1.0;
    out[n_max] = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        p *= z;
        out[n_max + n] = p;
        out[n_max - n] = std::conj(p);
    }
}

/// e^{-(i lambda - rho) A}, the multiplier of the principal series.
inline cplx principal_multiplier(double lambda, double A) { return std::exp(cplx(rho_half, -lambda) * A); }

} // namespace detail

/// M_{m,n} = <xi_lambda(g) chi_n, chi_m>, where
/// (xi_lambda(g) f)(l) = e^{-(i lambda - rho) A(l g)} f(u(l g)).
inline ModeMatrix principal_series_matrix(double lambda, const GroupElement& g, int n_max,
                                          const QuadratureSpec& q = {}) {
    if (n_max < 0) throw std::invalid_argument("principal_series_matrix: n_max < 0");
    ModeMatrix M(n_max);
    std::vector<cplx> eu, ek;
    const int S = M.size();
    for (const KNode& node : k_nodes(g, q)) {
        const cplx base = node.weight * detail::principal_multiplier(lambda, node.A);
        detail::fill_characters(node.theta_u, n_max, eu);
        detail::fill_characters(-node.theta, n_max, ek);
        for (int m = 0; m < S; ++m) {
            const cplx bm = base * ek[m];
            cplx* row = &M.data[m * S];
            for (int n = 0; n < S; ++n) row[n] += bm * eu[n];
        }
    }
    return M;
}

/// Rows |m| <= n_out of xi_lambda(g) applied to the truncated vector v.
inline FourierModeVector principal_series_apply(double lambda, const GroupElement& g, const FourierModeVector& v,
                                                int n_out, const QuadratureSpec& q = {}) {
    FourierModeVector out(n_out);
    std::vector<cplx> eu, ek;
    for (const KNode& node : k_nodes(g, q)) {
        detail::fill_characters(node.theta_u, v.n_max, eu);
        cplx s{};
        for (int n = 0; n < v.size(); ++n) s += v.coeffs[n] * eu[n];
        const cplx base = node.weight * detail::principal_multiplier(lambda, node.A) * s;
        detail::fill_characters(-node.theta, n_out, ek);
        for (int m = 0; m < out.size(); ++m) out.coeffs[m] += base * ek[m];
    }
    return out;
}

/// Phi_{lambda, chi_n1, chi_n2}(g)
///   = int_K e^{-(i lambda - rho) A(k g)} chi_n1(u(k g)) conj(chi_n2(k)) dk.
inline cplx generalized_spherical_function(double lambda, int n1, int n2, const GroupElement& g,
                                           const QuadratureSpec& q = {}) {
    cplx s{};
    for (const KNode& node : k_nodes(g, q)) {
        s += node.weight * detail::principal_multiplier(lambda, node.A) *
             std::polar(1.0, n1 * node.theta_u - n2 * node.theta);
    }
    return s;
}

/// |Phi_{lambda,n1,n2}(g) - <xi_lambda(g) chi_n1, chi_n2>|, the right side
/// read off principal_series_matrix.
inline double check_keystruct(double lambda, int n1, int n2, const GroupElement& g, int n_max,
                              const QuadratureSpec& q = {}) {
    if (n_max < std::max(std::abs(n1), std::abs(n2)) + 4) {
        throw std::invalid_argument("check_keystruct: n_max must be >= max(|n1|, |n2|) + 4");
    }
    const ModeMatrix M = principal_series_matrix(lambda, g, n_max, q);
    return std::abs(generalized_spherical_function(lambda, n1, n2, g, q) - M(n2, n1));
}

} // namespace gelfand
