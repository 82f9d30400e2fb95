// Primitives for the Gelfand pair (SL(2,R), SO(2)).
//
// Conventions used throughout the library:
//
//   P1    = diag(1/2, -1/2)          spans the abelian part a of p
//   P2    = [[0, 1/2], [1/2, 0]]
//   Theta = [[0, 1/2], [-1/2, 0]]    spans k
//
// An AlgebraVector (x1, x2, x3) represents x1*P1 + x2*P2 + x3*Theta. The
// inner product B_theta is scaled so that {P1, P2, Theta} is orthonormal,
// which makes G/K the curvature -1 hyperbolic plane with unit-speed
// geodesics t -> exp(t*X).o for |X| = 1.
//
// K is parametrized by k_theta = exp(theta * 2 Theta)
//                              = [[cos theta, sin theta], [-sin theta, cos theta]].
//
// The Iwasawa decomposition is taken in the order g = n(g) exp(A(g)P1) u(g)
// with n(g) unit upper triangular and u(g) in K. In the upper half-plane
// model this is g.i = n_x + i e^{A}.
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gelfand {

struct AlgebraVector {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;

    constexpr AlgebraVector operator+(const AlgebraVector& o) const { return {x1 + o.x1, x2 + o.x2, x3 + o.x3}; }
    constexpr AlgebraVector operator-(const AlgebraVector& o) const { return {x1 - o.x1, x2 - o.x2, x3 - o.x3}; }
    constexpr AlgebraVector operator-() const { return {-x1, -x2, -x3}; }
    constexpr AlgebraVector operator*(double s) const { return {s * x1, s * x2, s * x3}; }
    friend constexpr AlgebraVector operator*(double s, const AlgebraVector& v) { return v * s; }

    /// True when the vector lies in p (no k component).
    constexpr bool in_p() const { return x3 == 0.0; }
};

/// Vector of p with polar coordinates (radius, angle) in the (x1, x2) plane.
inline AlgebraVector p_vector(double radius, double angle) {
    return {radius * std::cos(angle), radius * std::sin(angle), 0.0};
}

/// Element of SL(2,R), stored row-major as [[a, b], [c, d]].
struct GroupElement {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 1.0;

    static constexpr GroupElement identity() { return {}; }

    constexpr double det() const { return a * d - b * c; }

    constexpr GroupElement transpose() const { return {a, c, b, d}; }

    /// Divide by sqrt(det) so that det = 1 exactly up to rounding.
    GroupElement normalized() const {
        const double dt = det();
        if (!(dt > 0.0)) {
            throw std::domain_error("GroupElement: non-positive determinant " + std::to_string(dt));
        }
        const double s = 1.0 / std::sqrt(dt);
        return {a * s, b * s, c * s, d * s};
    }

    double frobenius_distance(const GroupElement& o) const {
        return std::sqrt((a - o.a) * (a - o.a) + (b - o.b) * (b - o.b) + (c - o.c) * (c - o.c) +
                         (d - o.d) * (d - o.d));
    }
};

/// Raw matrix product, without renormalization.
constexpr GroupElement product(const GroupElement& g, const GroupElement& h) {
    return {g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d, g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d};
}

/// Group law; the result is renormalized so det = 1.
inline GroupElement multiply(const GroupElement& g, const GroupElement& h) { return product(g, h).normalized(); }

inline GroupElement operator*(const GroupElement& g, const GroupElement& h) { return multiply(g, h); }

constexpr GroupElement inverse(const GroupElement& g) { return {g.d, -g.b, -g.c, g.a}; }

/// k_theta = [[cos, sin], [-sin, cos]].
inline GroupElement rotation(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c, s, -s, c};
}

/// Angle of a rotation matrix in (-pi, pi].
inline double rotation_angle(const GroupElement& k) { return std::atan2(k.b, k.a); }

/// Matrix represented by X (traceless).
constexpr GroupElement algebra_matrix(const AlgebraVector& X) {
    return {0.5 * X.x1, 0.5 * (X.x2 + X.x3), 0.5 * (X.x2 - X.x3), -0.5 * X.x1};
}

/// Closed-form exponential exp(M) = C(q) I + S(q) M with q = -det(M),
/// C = cosh sqrt(q), S = sinh sqrt(q)/sqrt(q) (cos/sin continuation for q < 0).
inline GroupElement exp_alg(const AlgebraVector& X) {
    const GroupElement M = algebra_matrix(X);
    const double q = 0.25 * (X.x1 * X.x1 + X.x2 * X.x2 - X.x3 * X.x3);
    double C, S;
    if (std::abs(q) < 1e-6) {
        // Taylor series of cosh(sqrt q) and sinh(sqrt q)/sqrt q.
        C = 1.0 + q / 2.0 + q * q / 24.0 + q * q * q / 720.0;
        S = 1.0 + q / 6.0 + q * q / 120.0 + q * q * q / 5040.0;
    } else if (q > 0.0) {
        const double s = std::sqrt(q);
        C = std::cosh(s);
        S = std::sinh(s) / s;
    } else {
        const double s = std::sqrt(-q);
        C = std::cos(s);
        S = std::sin(s) / s;
    }
    return GroupElement{C + S * M.a, S * M.b, S * M.c, C + S * M.d}.normalized();
}

/// Logarithm of a symmetric positive-definite element of SL(2,R): the
/// unique X in p with exp_alg(X) = p.
inline AlgebraVector log_psd(const GroupElement& p, double tol = 1e-9) {
    const double scale = std::max({std::abs(p.a), std::abs(p.b), std::abs(p.c), std::abs(p.d), 1.0});
    if (std::abs(p.b - p.c) > tol * scale) {
        throw std::invalid_argument("log_psd: matrix is not symmetric");
    }
    if (!(p.a > 0.0 && p.d > 0.0 && p.det() > 0.0)) {
        throw std::invalid_argument("log_psd: matrix is not positive definite");
    }
    const double beta = 0.5 * (p.b + p.c);
    const double half_gap = 0.5 * (p.a - p.d);
    // Eigenvalues of p are e^{+-rho}; the traceless part has eigenvalues +-sinh(rho).
    const double tau = std::hypot(half_gap, beta);
    const double ratio = tau < 1e-300 ? 1.0 : std::asinh(tau) / tau;
    return {2.0 * ratio * half_gap, 2.0 * ratio * beta, 0.0};
}

struct IwasawaCoords {
    double theta_u = 0.0; ///< angle of u(g) in (-pi, pi]
    double A = 0.0;       ///< exp(A(g)) = diag(e^{A/2}, e^{-A/2})
    double n_x = 0.0;     ///< n(g) = [[1, n_x], [0, 1]]
};

/// g = n(g) exp(A P1) u(g). Uses only the bottom row of g for u and A:
/// u is the normalized second row, A = -log(c^2 + d^2).
inline IwasawaCoords iwasawa_decompose(const GroupElement& g) {
    const double s = g.c * g.c + g.d * g.d;
    return {std::atan2(-g.c, g.d), -std::log(s), (g.a * g.c + g.b * g.d) / s};
}

inline GroupElement iwasawa_reconstruct(const IwasawaCoords& w) {
    const double e = std::exp(0.5 * w.A);
    const GroupElement n{1.0, w.n_x, 0.0, 1.0};
    const GroupElement a{e, 0.0, 0.0, 1.0 / e};
    return product(product(n, a), rotation(w.theta_u));
}

struct CartanDecomposition {
    AlgebraVector X; ///< in p, exp_alg(X) = (g g^T)^{1/2}
    GroupElement k;  ///< in SO(2)
};

/// g = exp_alg(X) k with X in p and k in SO(2).
inline CartanDecomposition cartan_decompose(const GroupElement& g) {
    const GroupElement s = product(g, g.transpose());
    // (g g^T) = exp(2X); symmetrize against rounding before taking the log.
    const double off = 0.5 * (s.b + s.c);
    const AlgebraVector X = log_psd({s.a, off, off, s.d}) * 0.5;
    const GroupElement k = product(exp_alg(-X), g);
    // Project onto SO(2) (removes rounding drift).
    const double theta = std::atan2(k.b - k.c, k.a + k.d);
    return {X, rotation(theta)};
}

/// Radius |X| of the Cartan p-part, i.e. d(o, g.o).
inline double cartan_radius(const GroupElement& g) {
    const double t = g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d; // = 2 cosh r
    return std::acosh(std::max(1.0, 0.5 * t));
}

/// -B(X, theta Y) normalized so that {P1, P2, Theta} is orthonormal.
constexpr double killing_theta_inner(const AlgebraVector& X, const AlgebraVector& Y) {
    return X.x1 * Y.x1 + X.x2 * Y.x2 + X.x3 * Y.x3;
}

inline double p_norm(const AlgebraVector& X) { return std::sqrt(killing_theta_inner(X, X)); }

/// Point of the upper half-plane; o = (0, 1) is the base point.
struct PlanePoint {
    double x = 0.0;
    double y = 1.0;
};

/// Mobius action of g on i.
inline PlanePoint project_to_plane(const GroupElement& g) {
    const double s = g.c * g.c + g.d * g.d;
    return {(g.a * g.c + g.b * g.d) / s, g.det() / s};
}

inline double hyperbolic_distance(const PlanePoint& z, const PlanePoint& w) {
    const double chord = std::hypot(z.x - w.x, z.y - w.y);
    return 2.0 * std::asinh(chord / (2.0 * std::sqrt(z.y * w.y)));
}

} // namespace gelfand
