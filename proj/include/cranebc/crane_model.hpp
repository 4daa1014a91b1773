#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cranebc/errors.hpp"

namespace cranebc {

/// Physical parameters of the platform/cable system plus the control exponents.
///
/// The cable has unit length; s in [0,1] is the arclength measured from the
/// load, so the tension d(s) = g*s + g*m/rho is affine and strictly positive.
struct CraneParams {
    double m = 2.0;     ///< load mass [kg]
    double rho = 2.0;   ///< cable linear density [kg/m]
    double g = 9.81;    ///< gravity [m/s^2]
    double M = 1.0;     ///< platform mass [kg]
    double nu1 = 1.0 / 3.0;  ///< position exponent (zeta)
    double nu2 = 0.5;        ///< velocity exponent (psi)

    void validate() const {
        if (!(m > 0.0)) throw ConfigError("m must be > 0");
        if (!(rho > 0.0)) throw ConfigError("rho must be > 0");
        if (!(g > 0.0)) throw ConfigError("g must be > 0");
        if (!(M > 0.0)) throw ConfigError("M must be > 0");
        if (!(nu2 > 0.0 && nu2 < 1.0)) throw ConfigError("nu2 must lie in (0,1)");
        if (nu1 < nu2 / (2.0 - nu2) - 1e-12)
            throw ConfigError("nu1 must satisfy nu1 >= nu2/(2-nu2)");
    }

    /// True when nu1 = nu2/(2-nu2) holds exactly enough for the
    /// homogeneity-preserving implicit integrator to apply.
    bool homogeneous_exponents() const {
        return std::abs(nu1 - nu2 / (2.0 - nu2)) <= 1e-12;
    }
};

/// Constants derived from CraneParams that fix the wave speed profile
/// lambda(x) = C1 * exp(-C2 * x) on the normalized coordinate x in [0,1].
struct DerivedConstants {
    double J;        ///< integral of 1/d over the cable
    double C1;       ///< lambda(0)
    double C2;       ///< decay rate of lambda
    double lambda0;  ///< lambda(0), equals C1
    double lambda1;  ///< lambda(1)
    double m, rho, g;

    static DerivedConstants from(const CraneParams& p) {
        p.validate();
        DerivedConstants dc;
        dc.m = p.m;
        dc.rho = p.rho;
        dc.g = p.g;
        dc.J = std::log(1.0 + p.rho / p.m) / p.g;
        dc.C1 = 1.0 / (dc.J * std::sqrt(p.g * p.m / p.rho));
        dc.C2 = p.g * dc.J / 2.0;
        dc.lambda0 = dc.C1;
        dc.lambda1 = dc.C1 * std::exp(-dc.C2);
        return dc;
    }

    /// Tension expressed in the normalized coordinate: d~(x) = d(s(x)).
    double tension_x(double x) const { return g * m / rho * std::exp(2.0 * C2 * x); }
};

namespace detail {
inline void check_unit_range(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::domain_error(std::string(name) + " out of range [0,1]: " + std::to_string(v));
}
}  // namespace detail

/// Cable tension d(s) = g*s + g*m/rho.
inline double tension(double s, const CraneParams& p) {
    detail::check_unit_range(s, "s");
    return p.g * s + p.g * p.m / p.rho;
}

/// Normalized coordinate x(s) = ln(1 + (rho/m) s) / ln(1 + rho/m).
/// Maps [0,1] onto [0,1] monotonically.
inline double s_to_x(double s, const CraneParams& p) {
    detail::check_unit_range(s, "s");
    return std::log1p(p.rho / p.m * s) / std::log1p(p.rho / p.m);
}

/// Inverse map s(x) = (m/rho) * ((1 + rho/m)^x - 1).
inline double x_to_s(double x, const CraneParams& p) {
    detail::check_unit_range(x, "x");
    return p.m / p.rho * (std::pow(1.0 + p.rho / p.m, x) - 1.0);
}

/// Wave speed lambda(x) = C1 * exp(-C2 * x), strictly positive and decreasing.
inline double wave_speed(double x, const DerivedConstants& dc) {
    detail::check_unit_range(x, "x");
    return dc.C1 * std::exp(-dc.C2 * x);
}

/// d(lambda)/dx = -C2 * lambda(x).
inline double wave_speed_slope(double x, const DerivedConstants& dc) {
    return -dc.C2 * wave_speed(x, dc);
}

/// Travel-time coordinate Lambda(x) = integral of 1/lambda over [0,x],
/// in closed form (exp(C2 x) - 1) / (C1 C2).
inline double big_lambda(double x, const DerivedConstants& dc) {
    detail::check_unit_range(x, "x");
    return (std::exp(dc.C2 * x) - 1.0) / (dc.C1 * dc.C2);
}

/// Inverse of big_lambda, defined for u in [0, Lambda(1)].
inline double big_lambda_inv(double u, const DerivedConstants& dc) {
    return std::log1p(dc.C1 * dc.C2 * u) / dc.C2;
}

/// Scaled Riemann invariants u = (z_t - lambda z_x)/sqrt(lambda),
/// v = (z_t + lambda z_x)/sqrt(lambda), sampled on the given x-grid.
inline std::pair<std::vector<double>, std::vector<double>>
riemann_forward(const std::vector<double>& z_t, const std::vector<double>& z_x,
                const std::vector<double>& x_nodes, const DerivedConstants& dc) {
    if (z_t.size() != x_nodes.size() || z_x.size() != x_nodes.size())
        throw ValidationError("riemann_forward: field sizes do not match the grid");
    std::vector<double> u(x_nodes.size()), v(x_nodes.size());
    for (std::size_t i = 0; i < x_nodes.size(); ++i) {
        const double lam = wave_speed(x_nodes[i], dc);
        const double rl = std::sqrt(lam);
        u[i] = (z_t[i] - lam * z_x[i]) / rl;
        v[i] = (z_t[i] + lam * z_x[i]) / rl;
    }
    return {std::move(u), std::move(v)};
}

/// Exact algebraic inverse of riemann_forward:
/// z_t = sqrt(lambda)(u+v)/2, z_x = (v-u)/(2 sqrt(lambda)).
inline std::pair<std::vector<double>, std::vector<double>>
riemann_inverse(const std::vector<double>& u, const std::vector<double>& v,
                const std::vector<double>& x_nodes, const DerivedConstants& dc) {
    if (u.size() != x_nodes.size() || v.size() != x_nodes.size())
        throw ValidationError("riemann_inverse: field sizes do not match the grid");
    std::vector<double> z_t(x_nodes.size()), z_x(x_nodes.size());
    for (std::size_t i = 0; i < x_nodes.size(); ++i) {
        const double lam = wave_speed(x_nodes[i], dc);
        const double rl = std::sqrt(lam);
        z_t[i] = rl * (u[i] + v[i]) / 2.0;
        z_x[i] = (v[i] - u[i]) / (2.0 * rl);
    }
    return {std::move(z_t), std::move(z_x)};
}

}  // namespace cranebc
