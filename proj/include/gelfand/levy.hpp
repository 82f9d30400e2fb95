// Simulation of Levy processes on SL(2,R) driven by a Levy process in p:
// geodesics, compound Poisson processes with geodesic jumps, and the
// exponential-Euler scheme for the Marcus equation dM = M(t-) <> dZ(t)
// (Brownian part interlaced with jumps). The right process is L = M^{-1}.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gelfand/lie.hpp"

namespace gelfand {

/// eta = delta_W.
struct PointMassJump {
    AlgebraVector W;
};

/// W = radius * (cos phi P1 + sin phi P2), phi uniform.
struct IsotropicShellJump {
    double radius = 1.0;
};

/// W = radius * (cos phi_i P1 + sin phi_i P2) with probability weight_i.
struct AngularMixtureJump {
    double radius = 1.0;
    std::vector<double> angles;
    std::vector<double> weights;
};

using JumpLaw = std::variant<PointMassJump, IsotropicShellJump, AngularMixtureJump>;

/// Unit jumps along angle 0 (weight 3/4) and angle pi/2 (weight 1/4).
inline AngularMixtureJump default_anisotropic_law(double radius = 1.0) {
    return {radius, {0.0, std::numbers::pi / 2.0}, {0.75, 0.25}};
}

/// Invariance of eta under Ad(K), which acts on p by rotations.
inline bool is_rotation_invariant(const JumpLaw& law) {
    if (const auto* pm = std::get_if<PointMassJump>(&law)) return pm->W.x1 == 0.0 && pm->W.x2 == 0.0;
    if (std::holds_alternative<IsotropicShellJump>(law)) return true;
    return std::get<AngularMixtureJump>(law).radius == 0.0;
}

template <typename Engine>
AlgebraVector sample_jump(const JumpLaw& law, Engine& eng) {
    if (const auto* pm = std::get_if<PointMassJump>(&law)) return pm->W;
    if (const auto* sh = std::get_if<IsotropicShellJump>(&law)) {
        std::uniform_real_distribution<double> phi(0.0, 2.0 * std::numbers::pi);
        return p_vector(sh->radius, phi(eng));
    }
    const auto& mix = std::get<AngularMixtureJump>(law);
    std::discrete_distribution<std::size_t> pick(mix.weights.begin(), mix.weights.end());
    return p_vector(mix.radius, mix.angles[pick(eng)]);
}

/// Levy characteristics (b, a, nu) of the driving process in p, with
/// nu = jump_intensity * eta of finite mass. The generator is
///   sum b^i X_i + sum a^{ij} X_i X_j + jump_intensity * int (f(. exp W) - f) eta(dW),
/// without a factor 1/2 on the second-order part.
struct LevyModel {
    std::array<double, 2> b{0.0, 0.0};
    std::array<double, 4> a{0.0, 0.0, 0.0, 0.0}; ///< row-major [[a11, a12], [a21, a22]]
    double jump_intensity = 0.0;
    JumpLaw jump_law = PointMassJump{};

    static LevyModel brownian(double a_scalar) {
        LevyModel m;
        m.a = {a_scalar, 0.0, 0.0, a_scalar};
        return m;
    }
    static LevyModel compound_poisson(double intensity, JumpLaw law) {
        LevyModel m;
        m.jump_intensity = intensity;
        m.jump_law = std::move(law);
        return m;
    }
    static LevyModel drift(const AlgebraVector& Y) {
        LevyModel m;
        m.b = {Y.x1, Y.x2};
        return m;
    }

    bool has_diffusion() const { return a[0] != 0.0 || a[1] != 0.0 || a[2] != 0.0 || a[3] != 0.0; }
    bool has_drift() const { return b[0] != 0.0 || b[1] != 0.0; }
    bool has_jumps() const { return jump_intensity > 0.0; }

    /// Throws std::invalid_argument naming the offending entry.
    void validate() const {
        const auto fail = [](const std::string& msg) { throw std::invalid_argument("LevyModel: " + msg); };
        for (int i = 0; i < 4; ++i) {
            if (!std::isfinite(a[i])) fail("diffusion entry a" + std::to_string(11 + 10 * (i / 2) + i % 2) + " is not finite");
        }
        if (std::abs(a[1] - a[2]) > 1e-12 * std::max(1.0, std::abs(a[1]))) {
            std::ostringstream os;
            os << "diffusion matrix is not symmetric: a12=" << a[1] << " a21=" << a[2];
            fail(os.str());
        }
        const double tr = a[0] + a[3];
        const double det = a[0] * a[3] - a[1] * a[2];
        const double lmin = 0.5 * tr - std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
        if (lmin < -1e-12) {
            std::ostringstream os;
            os << "diffusion matrix is not positive semidefinite (min eigenvalue " << lmin << "): ";
            if (a[0] < 0.0) os << "entry a11=" << a[0] << " is negative";
            else if (a[3] < 0.0) os << "entry a22=" << a[3] << " is negative";
            else os << "entry a12=" << a[1] << " exceeds sqrt(a11*a22)=" << std::sqrt(a[0] * a[3]);
            fail(os.str());
        }
        if (!(jump_intensity >= 0.0) || !std::isfinite(jump_intensity)) fail("jump_intensity must be >= 0");
        if (const auto* pm = std::get_if<PointMassJump>(&jump_law); pm && pm->W.x3 != 0.0) {
            fail("jump vector must lie in p (x3 = 0)");
        }
        if (const auto* mix = std::get_if<AngularMixtureJump>(&jump_law)) {
            if (mix->angles.empty() || mix->angles.size() != mix->weights.size()) {
                fail("jump mixture needs matching, nonempty angles and weights");
            }
            for (double w : mix->weights) {
                if (!(w >= 0.0)) fail("jump mixture weights must be >= 0");
            }
        }
    }

    /// Symmetric square root of a (eigenvalues below zero clipped).
    std::array<double, 4> sqrt_diffusion() const {
        const double p = a[0], q = 0.5 * (a[1] + a[2]), r = a[3];
        const double mean = 0.5 * (p + r);
        const double rad = std::hypot(0.5 * (p - r), q);
        const double l1 = std::max(0.0, mean + rad);
        const double l2 = std::max(0.0, mean - rad);
        const double s1 = std::sqrt(l1), s2 = std::sqrt(l2);
        if (rad < 1e-300) return {s1, 0.0, 0.0, s1};
        // Unit eigenvector of l1.
        const double ang = 0.5 * std::atan2(2.0 * q, p - r);
        const double c = std::cos(ang), s = std::sin(ang);
        return {s1 * c * c + s2 * s * s, (s1 - s2) * c * s, (s1 - s2) * c * s, s1 * s * s + s2 * c * c};
    }
};

/// Reproducible random streams: (seed, stream_id) determines every draw.
struct RngHandle {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    /// Independent engine per purpose (0: diffusion, 1: jump epochs, 2: jump
    /// vectors, 3: bridge draws, 4+: auxiliary).
    std::mt19937_64 engine(std::uint32_t purpose) const {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                          purpose};
        return std::mt19937_64(seq);
    }
};

struct PathSample {
    std::vector<double> times;
    std::vector<GroupElement> elements; ///< L(t) = M(t)^{-1}
    std::vector<GroupElement> marcus;   ///< M(t), the left process solving the Marcus equation
    int jump_count = 0;
};

/// L(t) = exp(t Y), Y in p.
inline GroupElement simulate_geodesic(const AlgebraVector& Y, double t) {
    if (!Y.in_p()) throw std::invalid_argument("simulate_geodesic: Y must lie in p");
    if (t < 0.0) throw std::invalid_argument("simulate_geodesic: t must be >= 0");
    return exp_alg(t * Y);
}

/// Jump epochs in (0, t] from exponential spacings.
template <typename Engine>
std::vector<double> poisson_epochs(double intensity, double t, Engine& eng) {
    std::vector<double> epochs;
    if (!(intensity > 0.0)) return epochs;
    std::exponential_distribution<double> gap(intensity);
    double s = gap(eng);
    while (s <= t) {
        epochs.push_back(s);
        s += gap(eng);
    }
    return epochs;
}

/// L(t) = exp(W_N) ... exp(W_1) with N a Poisson process.
inline PathSample simulate_compound_poisson(const LevyModel& model, double t, const RngHandle& rng) {
    model.validate();
    if (model.has_drift() || model.has_diffusion()) {
        throw std::invalid_argument("simulate_compound_poisson: model must have b = 0 and a = 0");
    }
    if (!(model.jump_intensity > 0.0)) throw std::invalid_argument("simulate_compound_poisson: jump_intensity must be > 0");
    if (t < 0.0) throw std::invalid_argument("simulate_compound_poisson: t must be >= 0");
    auto epoch_eng = rng.engine(1);
    auto mark_eng = rng.engine(2);
    const std::vector<double> epochs = poisson_epochs(model.jump_intensity, t, epoch_eng);
    PathSample p;
    GroupElement L = GroupElement::identity();
    p.times.push_back(0.0);
    p.elements.push_back(L);
    p.marcus.push_back(L);
    for (double s : epochs) {
        L = multiply(exp_alg(sample_jump(model.jump_law, mark_eng)), L);
        p.times.push_back(s);
        p.elements.push_back(L);
        p.marcus.push_back(inverse(L));
    }
    if (p.times.back() < t) {
        p.times.push_back(t);
        p.elements.push_back(L);
        p.marcus.push_back(inverse(L));
    }
    p.jump_count = static_cast<int>(epochs.size());
    return p;
}

namespace detail {

/// Exponential-Euler Marcus scheme. Calls on_point(time, M) at every step end
/// and jump epoch, on_jump(time, W) for each jump and on_continuous(Z) for
/// each continuous increment. Per step one Gaussian pair is drawn from the
/// diffusion stream; steps containing jumps are split by a Brownian bridge
/// with its own stream. Epochs, jump vectors and bridge draws each have a
/// stream too, so for a fixed dt the path up to s < t is a prefix of the
/// path up to t.
template <typename OnPoint, typename OnJump, typename OnContinuous>
GroupElement run_marcus(const LevyModel& model, double t, double dt, const RngHandle& rng, OnPoint&& on_point,
                        OnJump&& on_jump, OnContinuous&& on_continuous) {
    if (!(dt > 0.0)) throw std::invalid_argument("simulate_marcus: dt must be > 0");
    if (!(dt <= t)) throw std::invalid_argument("simulate_marcus: dt must be <= t");
    auto diff_eng = rng.engine(0);
    auto epoch_eng = rng.engine(1);
    auto mark_eng = rng.engine(2);
    auto bridge_eng = rng.engine(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::vector<double> epochs = poisson_epochs(model.jump_intensity, t, epoch_eng);
    const std::array<double, 4> sa = model.sqrt_diffusion();
    const bool diffusive = model.has_diffusion();
    const bool continuous = diffusive || model.has_drift();

    const auto increment = [&](double len, double b1, double b2) {
        // b dt + sqrt(2) a^{1/2} dB, so that E[dZ dZ^T] = 2 a dt.
        const double s = std::numbers::sqrt2;
        return AlgebraVector{model.b[0] * len + s * (sa[0] * b1 + sa[1] * b2),
                             model.b[1] * len + s * (sa[2] * b1 + sa[3] * b2), 0.0};
    };

    GroupElement M = GroupElement::identity();
    on_point(0.0, M);
    const long steps = std::max(1L, static_cast<long>(std::ceil(t / dt - 1e-9)));
    std::size_t next_jump = 0;
    for (long k = 0; k < steps; ++k) {
        const double t0 = k * dt;
        const double t1 = (k + 1 == steps) ? t : (k + 1) * dt;
        double bx = 0.0, by = 0.0;
        if (diffusive) {
            const double sd = std::sqrt(t1 - t0);
            bx = sd * normal(diff_eng);
            by = sd * normal(diff_eng);
        }
        double cur = t0;
        double remaining = t1 - t0;
        while (next_jump < epochs.size() && epochs[next_jump] <= t1) {
            const double tau = epochs[next_jump++];
            const double len = tau - cur;
            if (continuous && len > 0.0) {
                double px = 0.0, py = 0.0;
                if (diffusive) {
                    // Brownian bridge split of the remaining increment.
                    const double frac = len / remaining;
                    const double sd = std::sqrt(len * (remaining - len) / remaining);
                    px = frac * bx + sd * normal(bridge_eng);
                    py = frac * by + sd * normal(bridge_eng);
                    bx -= px;
                    by -= py;
                }
                const AlgebraVector Z = increment(len, px, py);
                M = multiply(M, exp_alg(Z));
                on_continuous(Z);
            }
            remaining -= len;
            cur = tau;
            const AlgebraVector W = sample_jump(model.jump_law, mark_eng);
            M = multiply(M, exp_alg(W));
            on_jump(tau, W);
            on_point(tau, M);
        }
        const double len = t1 - cur;
        if (continuous && len > 0.0) {
            const AlgebraVector Z = increment(len, bx, by);
            M = multiply(M, exp_alg(Z));
            on_continuous(Z);
        }
        if (cur < t1) on_point(t1, M);
    }
    return M;
}

} // namespace detail

/// Marcus path; elements hold L = M^{-1} on the step grid plus jump epochs.
inline PathSample simulate_marcus(const LevyModel& model, double t, double dt, const RngHandle& rng) {
    model.validate();
    PathSample p;
    detail::run_marcus(
        model, t, dt, rng,
        [&](double s, const GroupElement& M) {
            p.times.push_back(s);
            p.marcus.push_back(M);
            p.elements.push_back(inverse(M));
        },
        [&](double, const AlgebraVector&) { ++p.jump_count; }, [](const AlgebraVector&) {});
    return p;
}

/// Same scheme as simulate_marcus; diffusion and jumps interlace by construction.
inline PathSample simulate_interlaced(const LevyModel& model, double t, double dt, const RngHandle& rng) {
    return simulate_marcus(model, t, dt, rng);
}

/// M(t) only, without recording the path.
inline GroupElement marcus_endpoint(const LevyModel& model, double t, double dt, const RngHandle& rng) {
    return detail::run_marcus(model, t, dt, rng, [](double, const GroupElement&) {},
                              [](double, const AlgebraVector&) {}, [](const AlgebraVector&) {});
}

/// L(t) = M(t)^{-1}. For t = 0 the identity.
inline GroupElement levy_endpoint(const LevyModel& model, double t, double dt, const RngHandle& rng) {
    if (t == 0.0) return GroupElement::identity();
    return inverse(marcus_endpoint(model, t, std::min(dt, t), rng));
}

inline std::vector<PlanePoint> project_path(const PathSample& p) {
    std::vector<PlanePoint> out;
    out.reserve(p.elements.size());
    for (const GroupElement& g : p.elements) out.push_back(project_to_plane(g));
    return out;
}

} // namespace gelfand
