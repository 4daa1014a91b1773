#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cranebc/crane_model.hpp"
#include "cranebc/errors.hpp"

namespace cranebc {

/// Target fields on the uniform x-grid at one time level. The boundary
/// coupling alpha(0,t) = beta(0,t) holds after every completed step.
struct FieldFrame {
    std::vector<double> alpha;
    std::vector<double> beta;
    double t = 0.0;
};

/// CFL ratio max(lambda) dt/dx; throws when it exceeds 1.
inline double cfl_check(double dt, double dx, const DerivedConstants& dc) {
    if (!(dt > 0.0) || !(dx > 0.0)) throw ValidationError("cfl_check: dt and dx must be > 0");
    const double ratio = dc.lambda0 * dt / dx;
    if (ratio > 1.0)
        throw ConfigError("CFL condition violated: max(lambda)*dt/dx = " + std::to_string(ratio) +
                          " > 1");
    return ratio;
}

/// Downwind sweep for beta_t = lambda beta_x (left-moving information):
/// beta_i^new = beta_i + lambda(x_i) dt/dx (beta_{i+1} - beta_i) for all
/// nodes except x = 1, which is set to the supplied boundary value.
inline std::vector<double> beta_downwind_step(const FieldFrame& frame, double beta_boundary_1,
                                              double dt, double dx, const DerivedConstants& dc) {
    const std::size_t m = frame.beta.size();
    std::vector<double> nb(m);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double lam = wave_speed(i * dx, dc);
        nb[i] = frame.beta[i] + lam * dt / dx * (frame.beta[i + 1] - frame.beta[i]);
    }
    nb[m - 1] = beta_boundary_1;
    return nb;
}

/// Upwind sweep for alpha_t = -lambda alpha_x (right-moving information).
/// Expects frame.beta to hold the already-updated beta of this step; node
/// x = 0 is set to beta(0,t), the rest by
/// alpha_i^new = alpha_i - lambda(x_i) dt/dx (alpha_i - alpha_{i-1}).
inline std::vector<double> alpha_upwind_step(const FieldFrame& frame, double dt, double dx,
                                             const DerivedConstants& dc) {
    const std::size_t m = frame.alpha.size();
    std::vector<double> na(m);
    na[0] = frame.beta[0];
    for (std::size_t i = 1; i < m; ++i) {
        const double lam = wave_speed(i * dx, dc);
        na[i] = frame.alpha[i] - lam * dt / dx * (frame.alpha[i] - frame.alpha[i - 1]);
    }
    return na;
}

/// Uniformly sampled time series with linear interpolation; lookups outside
/// the covered interval are an error.
struct TimeSeries {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> values;

    double at(double t) const {
        const double u = (t - t0) / dt;
        if (u < -1e-9 || u > static_cast<double>(values.size() - 1) + 1e-9)
            throw ValidationError("TimeSeries: lookup at t = " + std::to_string(t) +
                                  " outside recorded history");
        if (u <= 0.0) return values.front();
        const std::size_t i0 = std::min(static_cast<std::size_t>(u), values.size() - 2);
        const double w = u - static_cast<double>(i0);
        return (1.0 - w) * values[i0] + w * values[i0 + 1];
    }
};

/// Exact solution of the beta transport by the method of characteristics:
/// the initial profile slides left until the boundary signal phi_dot/mu
/// takes over.
inline double characteristic_beta(double x, double t, const std::function<double(double)>& beta0,
                                  const TimeSeries& phi_dot_history, double mu,
                                  const DerivedConstants& dc) {
    const double cc = dc.C1 * dc.C2;
    const double cutoff = (std::exp(dc.C2) - std::exp(dc.C2 * x)) / cc;
    if (t < cutoff) return beta0(std::log(std::exp(dc.C2 * x) + cc * t) / dc.C2);
    return phi_dot_history.at(t + (std::exp(dc.C2 * x) - std::exp(dc.C2)) / cc) / mu;
}

/// Exact solution of the alpha transport: the initial profile slides right
/// until the recorded trace beta(0, .) enters through x = 0.
inline double characteristic_alpha(double x, double t, const std::function<double(double)>& alpha0,
                                   const TimeSeries& beta_trace_at_0, const DerivedConstants& dc) {
    const double cc = dc.C1 * dc.C2;
    const double cutoff = (std::exp(dc.C2 * x) - 1.0) / cc;
    if (t < cutoff) return alpha0(std::log(std::exp(dc.C2 * x) - cc * t) / dc.C2);
    return beta_trace_at_0.at(t - cutoff);
}

}  // namespace cranebc
