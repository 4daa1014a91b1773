#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "cranebc/errors.hpp"

namespace cranebc {

using Vec2 = std::array<double, 2>;

/// Signed power: sign(x) |x|^p, with 0 mapped to 0.
inline double signed_pow(double x, double p) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), p), x);
}

struct HaimoExponents {
    double nu1;  ///< position exponent (zeta)
    double nu2;  ///< velocity exponent (psi)

    bool homogeneous() const { return std::abs(nu1 - nu2 / (2.0 - nu2)) <= 1e-12; }
};

/// Planar state of the stabilized scalar variable.
struct PhiState {
    double phi = 0.0;
    double phi_dot = 0.0;
    double t = 0.0;
};

/// Weights of the dilation d(s) = diag(e^{r1 s}, e^{r2 s}) under which the
/// Haimo field is homogeneous of degree -1.
struct DilationParams {
    double r1, r2;
    double nu_d = -1.0;

    static DilationParams from_nu2(double nu2) {
        return {(2.0 - nu2) / (1.0 - nu2), 1.0 / (1.0 - nu2), -1.0};
    }
};

/// Right-hand side (x1', x2') = (x2, -sgn(x1)|x1|^nu1 - sgn(x2)|x2|^nu2).
inline Vec2 haimo_field(const Vec2& s, const HaimoExponents& e) {
    return {s[1], -signed_pow(s[0], e.nu1) - signed_pow(s[1], e.nu2)};
}

namespace detail {
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
inline bool is_zero(const Vec2& a) { return a[0] == 0.0 && a[1] == 0.0; }
}  // namespace detail

struct HomNorm {
    double value;  ///< e^{s_x}
    double s_x;
};

/// Canonical homogeneous norm: e^{s_x} where s_x solves
/// e^{-2 r1 s} x1^2 + e^{-2 r2 s} x2^2 = 1. The left side is strictly
/// decreasing in s, so the root is bracketed by doubling and refined by
/// bisection plus Newton polish until |residual| < tol.
inline HomNorm homogeneous_norm(const Vec2& x, const DilationParams& dp, double tol = 1e-12) {
    if (detail::is_zero(x)) throw ValidationError("homogeneous_norm: undefined at the origin");
    const double a = x[0] * x[0];
    const double b = x[1] * x[1];
    auto res = [&](double s) {
        return std::exp(-2.0 * dp.r1 * s) * a + std::exp(-2.0 * dp.r2 * s) * b - 1.0;
    };
    double lo, hi;
    const double r0 = res(0.0);
    if (r0 == 0.0) return {1.0, 0.0};
    if (r0 > 0.0) {
        lo = 0.0;
        hi = 1.0;
        while (res(hi) > 0.0) {
            lo = hi;
            hi *= 2.0;
        }
    } else {
        hi = 0.0;
        lo = -1.0;
        while (res(lo) < 0.0) {
            hi = lo;
            lo *= 2.0;
        }
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double r = res(mid);
        if (r > 0.0) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(mid))) break;
    }
    // Newton polish on the monotone residual
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 50 && std::abs(res(s)) >= tol; ++it) {
        const double d = -2.0 * dp.r1 * std::exp(-2.0 * dp.r1 * s) * a -
                         2.0 * dp.r2 * std::exp(-2.0 * dp.r2 * s) * b;
        s -= res(s) / d;
    }
    return {std::exp(s), s};
}

/// z = ||x||_d d(-ln ||x||_d) x; the origin maps to the origin.
inline Vec2 transform_forward(const Vec2& x, const DilationParams& dp) {
    if (detail::is_zero(x)) return {0.0, 0.0};
    const double s = homogeneous_norm(x, dp).s_x;
    return {std::exp((1.0 - dp.r1) * s) * x[0], std::exp((1.0 - dp.r2) * s) * x[1]};
}

/// x = d(ln ||z||) z / ||z|| with the Euclidean norm (P = I2).
inline Vec2 transform_inverse(const Vec2& z, const DilationParams& dp) {
    const double n = detail::norm(z);
    if (n == 0.0) return {0.0, 0.0};
    return {std::pow(n, dp.r1 - 1.0) * z[0], std::pow(n, dp.r2 - 1.0) * z[1]};
}

namespace detail {

/// Transformed field F~(z) = ((I2 - Gd) z z^T / (z^T Gd z) + I2) F(z/||z||).
/// Positively homogeneous of degree zero: it depends on z only through its
/// direction, which is what makes the implicit relation a scalar problem.
inline Vec2 transformed_field(const Vec2& z, const DilationParams& dp, const HaimoExponents& e) {
    const double nz = norm(z);
    const Vec2 F = haimo_field({z[0] / nz, z[1] / nz}, e);
    const double zGz = dp.r1 * z[0] * z[0] + dp.r2 * z[1] * z[1];
    const double zF = z[0] * F[0] + z[1] * F[1];
    // (I - Gd) z (z . F) / zGz + F
    return {(1.0 - dp.r1) * z[0] * zF / zGz + F[0], (1.0 - dp.r2) * z[1] * zF / zGz + F[1]};
}

inline Vec2 transformed_field_dir(double theta, const DilationParams& dp,
                                  const HaimoExponents& e) {
    return transformed_field({std::cos(theta), std::sin(theta)}, dp, e);
}

inline double sup_field_norm(const DilationParams& dp, const HaimoExponents& e) {
    double m = 0.0;
    for (int k = 0; k <= 720; ++k) {
        const double th = -M_PI + 2.0 * M_PI * k / 720.0;
        m = std::max(m, norm(transformed_field_dir(th, dp, e)));
    }
    return m;
}

}  // namespace detail

/// One step of the implicit scheme (z_next - z)/dt = F~(z_next).
///
/// A damped fixed-point iteration handles the bulk of the flight; when it
/// stalls the relation is solved exactly through its angular reduction: F~ is
/// constant along rays, so z_next = z + dt F~(theta) where theta must match
/// the direction of the right-hand side. Roots of that scalar condition are
/// bracketed on a fine angular grid and bisected. When no ray admits a
/// solution the state has entered the absorbing dt-ball around the origin and
/// the step returns exactly zero, which is how the scheme settles in finitely
/// many steps.
inline Vec2 implicit_step(const Vec2& z, double dt, const HaimoExponents& e) {
    if (!(dt > 0.0)) throw ValidationError("implicit_step: dt must be > 0");
    if (!e.homogeneous())
        throw ValidationError("implicit_step: requires nu1 = nu2/(2-nu2); use the explicit integrator");
    if (detail::is_zero(z)) return {0.0, 0.0};
    const DilationParams dp = DilationParams::from_nu2(e.nu2);

    auto residual = [&](const Vec2& w) -> double {
        if (detail::is_zero(w)) return detail::norm(z);
        const Vec2 F = detail::transformed_field(w, dp, e);
        return detail::norm({w[0] - z[0] - dt * F[0], w[1] - z[1] - dt * F[1]});
    };

    // damped fixed point w <- z + dt F~(w), halving the move on residual growth
    Vec2 w = z;
    double rn = residual(w);
    Vec2 best_w = w;
    double best_r = rn;
    for (int it = 0; it < 60 && rn >= 1e-12; ++it) {
        const Vec2 F = detail::transformed_field(w, dp, e);
        const Vec2 c = {z[0] + dt * F[0], z[1] + dt * F[1]};
        double theta = 1.0;
        Vec2 wc;
        double rc;
        for (;;) {
            wc = {w[0] + theta * (c[0] - w[0]), w[1] + theta * (c[1] - w[1])};
            rc = detail::is_zero(wc) ? 1e300 : residual(wc);
            if (rc < rn || theta <= 1.0 / 64.0) break;
            theta *= 0.5;
        }
        w = wc;
        rn = rc;
        if (rn < best_r) {
            best_w = w;
            best_r = rn;
        }
    }
    if (best_r < 1e-12) return best_w;

    // angular reduction: find theta with cross(q(theta), e(theta)) = 0 and
    // dot(q(theta), e(theta)) >= 0, where q(theta) = z + dt F~(theta)
    auto cross_dot = [&](double th) -> std::pair<double, double> {
        const Vec2 F = detail::transformed_field_dir(th, dp, e);
        const Vec2 q = {z[0] + dt * F[0], z[1] + dt * F[1]};
        const double ct = std::cos(th), st = std::sin(th);
        return {q[1] * ct - q[0] * st, q[0] * ct + q[1] * st};
    };
    const int N = 1024;
    double prev_c = 0.0, prev_t = 0.0;
    bool have_prev = false;
    for (int k = 0; k <= N; ++k) {
        const double th = -M_PI + 2.0 * M_PI * k / N;
        auto [cv, dv] = cross_dot(th);
        if (cv == 0.0 && dv >= 0.0) {
            const Vec2 F = detail::transformed_field_dir(th, dp, e);
            const Vec2 cand = {z[0] + dt * F[0], z[1] + dt * F[1]};
            const double r = residual(cand);
            if (r < best_r) {
                best_r = r;
                best_w = cand;
            }
        }
        if (have_prev && prev_c * cv < 0.0) {
            double lo = prev_t, hi = th, flo = prev_c;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = cross_dot(mid).first;
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((fm > 0.0) == (flo > 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            const double tm = 0.5 * (lo + hi);
            if (cross_dot(tm).second >= 0.0) {
                const Vec2 F = detail::transformed_field_dir(tm, dp, e);
                const Vec2 cand = {z[0] + dt * F[0], z[1] + dt * F[1]};
                const double r = residual(cand);
                if (r < best_r) {
                    best_r = r;
                    best_w = cand;
                }
            }
        }
        prev_c = cv;
        prev_t = th;
        have_prev = true;
    }
    if (best_r < 1e-10) return best_w;

    // no ray solves the relation: absorbing ball around the origin
    if (detail::norm(z) <= 1.5 * dt * detail::sup_field_norm(dp, e)) return {0.0, 0.0};
    throw NumericalError("implicit_step: iteration failed to converge", best_r);
}

struct PhiTrajectory {
    std::vector<PhiState> states;
    std::optional<double> settling_time;  ///< T0 at threshold 1e-9, if reached
    double dt = 0.0;
};

namespace detail {
inline std::optional<double> detect_phi_settling(const std::vector<PhiState>& s,
                                                 double threshold) {
    std::optional<double> t0;
    for (auto it = s.rbegin(); it != s.rend(); ++it) {
        if (std::max(std::abs(it->phi), std::abs(it->phi_dot)) < threshold) t0 = it->t;
        else break;
    }
    return t0;
}
}  // namespace detail

/// Integrate the Haimo ODE with the homogeneity-preserving implicit scheme:
/// per step, transform to z, take the implicit step, transform back. States
/// with ||z|| < 1e-12 are snapped to exact zero, the absorbing equilibrium.
inline PhiTrajectory integrate_phi(const PhiState& initial, double dt, double t_end,
                                   const HaimoExponents& e) {
    if (!(dt > 0.0)) throw ValidationError("integrate_phi: dt must be > 0");
    if (!e.homogeneous())
        throw ValidationError("integrate_phi: requires nu1 = nu2/(2-nu2); use integrate_phi_rk4");
    const DilationParams dp = DilationParams::from_nu2(e.nu2);
    PhiTrajectory out;
    out.dt = dt;
    const int n = static_cast<int>(std::llround(t_end / dt));
    out.states.reserve(n + 1);
    Vec2 x = {initial.phi, initial.phi_dot};
    out.states.push_back({x[0], x[1], initial.t});
    for (int k = 1; k <= n; ++k) {
        if (!detail::is_zero(x)) {
            Vec2 z = transform_forward(x, dp);
            z = implicit_step(z, dt, e);
            if (detail::norm(z) < 1e-12) z = {0.0, 0.0};
            x = transform_inverse(z, dp);
        }
        out.states.push_back({x[0], x[1], initial.t + k * dt});
    }
    out.settling_time = detail::detect_phi_settling(out.states, 1e-9);
    return out;
}

/// Classical 4-stage Runge-Kutta applied directly to the Haimo ODE. Explicit
/// fallback for exponents with nu1 > nu2/(2-nu2) and fine-step reference for
/// the implicit scheme.
inline PhiTrajectory integrate_phi_rk4(const PhiState& initial, double dt, double t_end,
                                       const HaimoExponents& e) {
    if (!(dt > 0.0)) throw ValidationError("integrate_phi_rk4: dt must be > 0");
    PhiTrajectory out;
    out.dt = dt;
    const int n = static_cast<int>(std::llround(t_end / dt));
    out.states.reserve(n + 1);
    Vec2 x = {initial.phi, initial.phi_dot};
    out.states.push_back({x[0], x[1], initial.t});
    for (int k = 1; k <= n; ++k) {
        const Vec2 k1 = haimo_field(x, e);
        const Vec2 k2 = haimo_field({x[0] + dt / 2 * k1[0], x[1] + dt / 2 * k1[1]}, e);
        const Vec2 k3 = haimo_field({x[0] + dt / 2 * k2[0], x[1] + dt / 2 * k2[1]}, e);
        const Vec2 k4 = haimo_field({x[0] + dt * k3[0], x[1] + dt * k3[1]}, e);
        x = {x[0] + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
             x[1] + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
        out.states.push_back({x[0], x[1], initial.t + k * dt});
    }
    out.settling_time = detail::detect_phi_settling(out.states, 1e-9);
    return out;
}

/// Bracket expression of the strict-negativity condition,
///   (z2/||z||) [ z1/||z|| - sgn^zeta(z1/||z||) - sgn^psi(z2/||z||) ],
/// strictly negative for z2 != 0 when zeta = psi/(2-psi).
inline double strict_negativity_check(const Vec2& z, const HaimoExponents& e) {
    if (z[1] == 0.0)
        throw ValidationError("strict_negativity_check: degenerate case z2 = 0");
    const double n = detail::norm(z);
    const double y1 = z[0] / n;
    const double y2 = z[1] / n;
    return y2 * (y1 - signed_pow(y1, e.nu1) - signed_pow(y2, e.nu2));
}

}  // namespace cranebc
