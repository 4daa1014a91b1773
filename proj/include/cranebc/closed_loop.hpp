#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cranebc/crane_model.hpp"
#include "cranebc/errors.hpp"
#include "cranebc/finite_time_ode.hpp"
#include "cranebc/kernel_engine.hpp"
#include "cranebc/transport.hpp"

namespace cranebc {

/// Uniform grid on x in [0,1] used by the transport solver, with the wave
/// speed pre-sampled at its nodes.
struct TransportGrid {
    int nx;
    double dx;
    std::vector<double> x;
    std::vector<double> lambda;

    static TransportGrid make(int nx, const DerivedConstants& dc) {
        if (nx < 2) throw ValidationError("TransportGrid: nx must be >= 2");
        TransportGrid g;
        g.nx = nx;
        g.dx = 1.0 / nx;
        g.x.resize(nx + 1);
        g.lambda.resize(nx + 1);
        for (int i = 0; i <= nx; ++i) {
            g.x[i] = i * g.dx;
            g.lambda[i] = wave_speed(g.x[i], dc);
        }
        return g;
    }
};

/// Gain functions resampled on the transport grid, plus the scalars the
/// closed loop needs at every step.
struct SampledGains {
    std::vector<double> a, b;
    double a0 = 0.0, mu = 0.0;

    static SampledGains from(const GainProfile& gp, const TransportGrid& tg) {
        SampledGains s;
        s.a.resize(tg.x.size());
        s.b.resize(tg.x.size());
        for (std::size_t i = 0; i < tg.x.size(); ++i) {
            s.a[i] = gp.a_at(tg.x[i]);
            s.b[i] = gp.b_at(tg.x[i]);
        }
        s.a0 = gp.a0;
        s.mu = gp.mu;
        return s;
    }
};

namespace detail {
inline double trapezoid(const std::vector<double>& f, double dx) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) s += (f[i] + f[i + 1]) / 2.0;
    return s * dx;
}
}  // namespace detail

/// Physical initial data: cable displacement/velocity profiles over a
/// uniform s-grid plus the platform position and velocity.
struct InitialData {
    std::vector<double> s_nodes;  ///< uniform, covering [0,1]
    std::vector<double> y0;       ///< displacement profile
    std::vector<double> y1;       ///< velocity profile
    double Xp0 = 0.0;
    double Xp1 = 0.0;

    /// Rigid start: the whole assembly displaced by offset, at rest.
    static InitialData constant_offset(double offset, int n_s = 20) {
        InitialData d;
        d.s_nodes.resize(n_s + 1);
        for (int i = 0; i <= n_s; ++i) d.s_nodes[i] = static_cast<double>(i) / n_s;
        d.y0.assign(n_s + 1, offset);
        d.y1.assign(n_s + 1, 0.0);
        d.Xp0 = offset;
        d.Xp1 = 0.0;
        return d;
    }
};

namespace detail {

inline double interp_profile(const std::vector<double>& s_nodes, const std::vector<double>& f,
                             double s) {
    if (s <= s_nodes.front()) return f.front();
    if (s >= s_nodes.back()) return f.back();
    const auto it = std::upper_bound(s_nodes.begin(), s_nodes.end(), s);
    const std::size_t i1 = static_cast<std::size_t>(it - s_nodes.begin());
    const double w = (s - s_nodes[i1 - 1]) / (s_nodes[i1] - s_nodes[i1 - 1]);
    return (1.0 - w) * f[i1 - 1] + w * f[i1];
}

/// Interior second-order differences, one-sided at the ends.
inline std::vector<double> derivative(const std::vector<double>& f, double h) {
    const std::size_t m = f.size();
    std::vector<double> d(m);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < m; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    d[m - 1] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h);
    return d;
}

}  // namespace detail

/// Direct backstepping transform gamma = w - integral_0^x K(x,xi) w(xi) dxi
/// by trapezoidal quadrature on the transport grid.
inline std::pair<std::vector<double>, std::vector<double>>
backstepping_direct(const std::vector<double>& u, const std::vector<double>& v,
                    const KernelSet& K, const TransportGrid& tg) {
    const int nx = tg.nx;
    std::vector<double> alpha(nx + 1), beta(nx + 1);
    for (int i = 0; i <= nx; ++i) {
        double su = 0.0, sv = 0.0;
        for (int j = 0; j < i; ++j) {
            auto term = [&](int j2) {
                const double kuu = K[0].value_at(tg.x[i], tg.x[j2]);
                const double kuv = K[1].value_at(tg.x[i], tg.x[j2]);
                const double kvu = K[2].value_at(tg.x[i], tg.x[j2]);
                const double kvv = K[3].value_at(tg.x[i], tg.x[j2]);
                return std::pair<double, double>{kuu * u[j2] + kuv * v[j2],
                                                 kvu * u[j2] + kvv * v[j2]};
            };
            const auto [fu0, fv0] = term(j);
            const auto [fu1, fv1] = term(j + 1);
            su += tg.dx * (fu0 + fu1) / 2.0;
            sv += tg.dx * (fv0 + fv1) / 2.0;
        }
        alpha[i] = u[i] - su;
        beta[i] = v[i] - sv;
    }
    return {std::move(alpha), std::move(beta)};
}

/// Inverse backstepping transform w = gamma + integral_0^x L(x,xi) gamma dxi.
inline std::pair<std::vector<double>, std::vector<double>>
backstepping_inverse(const std::vector<double>& alpha, const std::vector<double>& beta,
                     const KernelSet& L, const TransportGrid& tg) {
    const int nx = tg.nx;
    std::vector<double> u(nx + 1), v(nx + 1);
    for (int i = 0; i <= nx; ++i) {
        double su = 0.0, sv = 0.0;
        for (int j = 0; j < i; ++j) {
            auto term = [&](int j2) {
                const double laa = L[0].value_at(tg.x[i], tg.x[j2]);
                const double lab = L[1].value_at(tg.x[i], tg.x[j2]);
                const double lba = L[2].value_at(tg.x[i], tg.x[j2]);
                const double lbb = L[3].value_at(tg.x[i], tg.x[j2]);
                return std::pair<double, double>{laa * alpha[j2] + lab * beta[j2],
                                                 lba * alpha[j2] + lbb * beta[j2]};
            };
            const auto [fu0, fv0] = term(j);
            const auto [fu1, fv1] = term(j + 1);
            su += tg.dx * (fu0 + fu1) / 2.0;
            sv += tg.dx * (fv0 + fv1) / 2.0;
        }
        u[i] = alpha[i] + su;
        v[i] = beta[i] + sv;
    }
    return {std::move(u), std::move(v)};
}

/// Map physical initial data to the target coordinates: resample onto the
/// x-grid, form the scaled Riemann invariants, backstep to (alpha0, beta0)
/// and assemble (phi0, phi1). Rejects data violating y0(1) = Xp0 or the free
/// lower-end condition y0'(0) = 0.
inline std::pair<PhiState, FieldFrame> initialize(const InitialData& init,
                                                  const SampledGains& gains, const KernelSet& K,
                                                  const TransportGrid& tg, const CraneParams& p,
                                                  const DerivedConstants& dc) {
    if (init.s_nodes.size() < 3 || init.y0.size() != init.s_nodes.size() ||
        init.y1.size() != init.s_nodes.size())
        throw ValidationError("initialize: profile arrays must share the s-grid (>= 3 nodes)");
    const double scale = std::max(1.0, std::abs(init.Xp0));
    if (std::abs(init.y0.back() - init.Xp0) > 1e-6 * scale)
        throw ValidationError("initialize: incompatible initial data, y0(1) = Xp0 violated");
    const double ds = init.s_nodes[1] - init.s_nodes[0];
    const double slope0 =
        (-3.0 * init.y0[0] + 4.0 * init.y0[1] - init.y0[2]) / (2.0 * ds);
    const double y0span = *std::max_element(init.y0.begin(), init.y0.end()) -
                          *std::min_element(init.y0.begin(), init.y0.end());
    if (std::abs(slope0) > 1e-6 * std::max(1.0, y0span) + 4.0 * ds * y0span)
        throw ValidationError("initialize: incompatible initial data, y0_s(0) = 0 violated");

    // z0, z1 and z0_x on the x-grid; z_x = y_s * ds/dx with ds/dx = J d(s)
    const std::size_t m = tg.x.size();
    std::vector<double> z1(m), z0x(m);
    const std::vector<double> y0s = detail::derivative(init.y0, ds);
    for (std::size_t i = 0; i < m; ++i) {
        const double s = x_to_s(tg.x[i], p);
        z1[i] = detail::interp_profile(init.s_nodes, init.y1, s);
        const double ys = detail::interp_profile(init.s_nodes, y0s, s);
        z0x[i] = ys * dc.J * tension(s, p);
    }
    std::vector<double> u0(m), v0(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double lam = tg.lambda[i];
        const double rl = std::sqrt(lam);
        u0[i] = (z1[i] - lam * z0x[i]) / rl;
        v0[i] = (z1[i] + lam * z0x[i]) / rl;
    }
    auto [alpha0, beta0] = backstepping_direct(u0, v0, K, tg);

    std::vector<double> integrand(m);
    for (std::size_t i = 0; i < m; ++i) integrand[i] = gains.a[i] * alpha0[i] + gains.b[i] * beta0[i];
    PhiState phi;
    phi.phi = 2.0 / std::sqrt(dc.lambda1) * init.Xp0 + detail::trapezoid(integrand, tg.dx);
    phi.phi_dot = gains.mu * beta0.back();
    phi.t = 0.0;

    FieldFrame frame;
    frame.alpha = std::move(alpha0);
    frame.beta = std::move(beta0);
    frame.t = 0.0;
    return {phi, frame};
}

/// Platform position from the definition of phi:
/// Xp = sqrt(lambda(1))/2 (phi - integral(a alpha + b beta)).
inline double reconstruct_platform(const PhiState& phi, const FieldFrame& frame,
                                   const SampledGains& gains, const TransportGrid& tg,
                                   const DerivedConstants& dc) {
    std::vector<double> integrand(frame.alpha.size());
    for (std::size_t i = 0; i < integrand.size(); ++i)
        integrand[i] = gains.a[i] * frame.alpha[i] + gains.b[i] * frame.beta[i];
    return std::sqrt(dc.lambda1) / 2.0 * (phi.phi - detail::trapezoid(integrand, tg.dx));
}

/// One coupled time step: advance phi implicitly, feed beta(1) = phi_dot/mu,
/// run the downwind then upwind sweeps, and recompute the platform position.
struct LoopState {
    PhiState phi;
    FieldFrame frame;
    double Xp = 0.0;
};

inline LoopState step(const LoopState& state, const SampledGains& gains, const TransportGrid& tg,
                      const DerivedConstants& dc, double dt, const HaimoExponents& e) {
    LoopState next;
    Vec2 x = {state.phi.phi, state.phi.phi_dot};
    if (!(x[0] == 0.0 && x[1] == 0.0)) {
        const DilationParams dp = DilationParams::from_nu2(e.nu2);
        Vec2 z = transform_forward(x, dp);
        z = implicit_step(z, dt, e);
        if (std::sqrt(z[0] * z[0] + z[1] * z[1]) < 1e-12) z = {0.0, 0.0};
        x = transform_inverse(z, dp);
    }
    next.phi = {x[0], x[1], state.phi.t + dt};

    FieldFrame work = state.frame;
    const std::vector<double> nb =
        beta_downwind_step(work, next.phi.phi_dot / gains.mu, dt, tg.dx, dc);
    work.beta = nb;
    const std::vector<double> na = alpha_upwind_step(work, dt, tg.dx, dc);
    next.frame.alpha = na;
    next.frame.beta = nb;
    next.frame.t = state.frame.t + dt;
    next.Xp = reconstruct_platform(next.phi, next.frame, gains, tg, dc);
    return next;
}

/// Cable profile y(s) on the requested s-nodes through the inverse chain
/// (alpha,beta) -> (u,v) -> z_x -> z (anchored at z(1) = Xp) -> y.
inline std::vector<double> reconstruct_cable(const FieldFrame& frame, const KernelSet& L,
                                             double Xp, const TransportGrid& tg,
                                             const std::vector<double>& s_out,
                                             const CraneParams& p, const DerivedConstants& dc) {
    auto [u, v] = backstepping_inverse(frame.alpha, frame.beta, L, tg);
    const std::size_t m = tg.x.size();
    std::vector<double> zx(m);
    for (std::size_t i = 0; i < m; ++i) zx[i] = (v[i] - u[i]) / (2.0 * std::sqrt(tg.lambda[i]));
    std::vector<double> z(m);
    z[m - 1] = Xp;
    for (std::size_t i = m - 1; i-- > 0;)
        z[i] = z[i + 1] - tg.dx * (zx[i] + zx[i + 1]) / 2.0;
    std::vector<double> y(s_out.size());
    for (std::size_t k = 0; k < s_out.size(); ++k)
        y[k] = detail::interp_profile(tg.x, z, s_to_x(s_out[k], p));
    return y;
}

/// Feedback signals (U, V) evaluated for logging. The second-derivative
/// integral is rewritten through the transport identities so only spatial
/// data enters; the products (a lambda)' and (b lambda)' come from the
/// kernel rows in closed form, and their outer derivative is taken by
/// central differences on the kernel grid.
inline std::pair<double, double> control_signals(const PhiState& phi, const FieldFrame& frame,
                                                 const GainProfile& gp, const SampledGains& gains,
                                                 const TransportGrid& tg,
                                                 const std::vector<double>& y_profile,
                                                 const std::vector<double>& s_out,
                                                 const CraneParams& p,
                                                 const DerivedConstants& dc,
                                                 const HaimoExponents& e) {
    const std::size_t m = tg.x.size();

    // alpha_t = -lambda alpha_x, beta_t = lambda beta_x
    const std::vector<double> ax = detail::derivative(frame.alpha, tg.dx);
    const std::vector<double> bx = detail::derivative(frame.beta, tg.dx);
    std::vector<double> at(m), bt(m);
    for (std::size_t i = 0; i < m; ++i) {
        at[i] = -tg.lambda[i] * ax[i];
        bt[i] = tg.lambda[i] * bx[i];
    }

    // ((a lambda)' lambda)' and ((b lambda)' lambda)' on the kernel grid
    const std::size_t mk = gp.x.size();
    std::vector<double> pa(mk), pb(mk);
    for (std::size_t j = 0; j < mk; ++j) {
        const double lam = wave_speed(gp.x[j], dc);
        pa[j] = -gp.row_a[j] * lam;  // (a lambda)' lambda
        pb[j] = gp.row_b[j] * lam;   // (b lambda)' lambda
    }
    const double dxk = gp.x[1] - gp.x[0];
    const std::vector<double> dpa = detail::derivative(pa, dxk);
    const std::vector<double> dpb = detail::derivative(pb, dxk);
    auto interp_k = [&](const std::vector<double>& f, double xq) {
        double uq = std::clamp(xq / dxk, 0.0, double(f.size() - 1));
        const std::size_t i0 = std::min(static_cast<std::size_t>(uq), f.size() - 2);
        const double w = uq - static_cast<double>(i0);
        return (1.0 - w) * f[i0] + w * f[i0 + 1];
    };

    std::vector<double> integrand(m);
    for (std::size_t i = 0; i < m; ++i)
        integrand[i] =
            interp_k(dpa, tg.x[i]) * frame.alpha[i] + interp_k(dpb, tg.x[i]) * frame.beta[i];
    const double I2 = detail::trapezoid(integrand, tg.dx);

    // [(a lambda)' lambda alpha + (b lambda)' lambda beta] from 0 to 1
    const double b1_at1 = pa[mk - 1] * frame.alpha[m - 1] + pb[mk - 1] * frame.beta[m - 1];
    const double b1_at0 = pa[0] * frame.alpha[0] + pb[0] * frame.beta[0];
    const double boundary1 = -(b1_at1 - b1_at0);
    // [-a lambda alpha_t + b lambda beta_t] from 0 to 1
    const double b2_at1 =
        -gains.a[m - 1] * dc.lambda1 * at[m - 1] + gains.b[m - 1] * dc.lambda1 * bt[m - 1];
    const double b2_at0 = -gains.a[0] * dc.lambda0 * at[0] + gains.b[0] * dc.lambda0 * bt[0];
    const double boundary2 = b2_at1 - b2_at0;

    const double d2_integral = I2 + boundary1 + boundary2;
    const double U = -std::sqrt(dc.lambda1) / 2.0 *
                     (d2_integral + signed_pow(phi.phi_dot, e.nu2) + signed_pow(phi.phi, e.nu1));

    // theta = y_s(1): one-sided second-order difference on the s-grid
    const std::size_t ms = s_out.size();
    const double ds = s_out[1] - s_out[0];
    const double theta = (3.0 * y_profile[ms - 1] - 4.0 * y_profile[ms - 2] + y_profile[ms - 3]) /
                         (2.0 * ds);
    const double V = p.M * U - (p.m + p.rho) * p.g * theta;
    return {U, V};
}

/// Full record of one closed-loop run.
struct SimulationResult {
    std::vector<double> t;
    std::vector<PhiState> phi;
    std::vector<FieldFrame> frames;
    std::vector<double> Xp;
    std::vector<double> s_out;
    std::vector<std::vector<double>> y;
    std::vector<double> U, V;
    std::optional<double> T0_observed, T1_observed;
    double mu = 0.0;
    double cfl_ratio = 0.0;
};

/// T0: settling of (phi, phi_dot) at threshold 1e-9. T1: first time after
/// which the fields, the platform and the cable all stay below `threshold`.
inline std::pair<std::optional<double>, std::optional<double>>
detect_settling(const SimulationResult& result, double threshold) {
    std::optional<double> T0 = detail::detect_phi_settling(result.phi, 1e-9);
    std::optional<double> T1;
    for (std::size_t k = result.t.size(); k-- > 0;) {
        double m = std::abs(result.Xp[k]);
        for (double a : result.frames[k].alpha) m = std::max(m, std::abs(a));
        for (double b : result.frames[k].beta) m = std::max(m, std::abs(b));
        for (double yv : result.y[k]) m = std::max(m, std::abs(yv));
        if (m < threshold) T1 = result.t[k];
        else break;
    }
    return {T0, T1};
}

}  // namespace cranebc
