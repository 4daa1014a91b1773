#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cranebc/crane_model.hpp"
#include "cranebc/errors.hpp"
#include "cranebc/triangular_grid.hpp"

namespace cranebc {

/// Coefficient data of the 2x2 hyperbolic system
///   w_t = diag(-eps1, eps2) w_x + [[0, c1],[c2, 0]] w,
/// with the boundary reflection u(0,t) = q v(0,t).
struct Coefficients {
    std::function<double(double)> eps1, eps1p;
    std::function<double(double)> eps2, eps2p;
    std::function<double(double)> c1, c2;
    double q = 1.0;
};

/// Coefficients realized by the crane: eps1 = eps2 = lambda,
/// c1 = -lambda'/2 = -c2, q = 1.
inline Coefficients coefficient_functions(const DerivedConstants& dc) {
    Coefficients c;
    c.eps1 = [dc](double x) { return wave_speed(x, dc); };
    c.eps1p = [dc](double x) { return wave_speed_slope(x, dc); };
    c.eps2 = c.eps1;
    c.eps2p = c.eps1p;
    c.c1 = [dc](double x) { return -wave_speed_slope(x, dc) / 2.0; };
    c.c2 = [dc](double x) { return wave_speed_slope(x, dc) / 2.0; };
    c.q = 1.0;
    return c;
}

/// Four kernels of one backstepping transform. Direct sets are ordered
/// (uu, uv, vu, vv); inverse sets (aa, ab, ba, bb).
struct KernelSet {
    std::array<KernelField, 4> fields;
    std::array<std::string, 4> labels;

    const KernelField& operator[](int k) const { return fields[k]; }
    KernelField& operator[](int k) { return fields[k]; }
};

namespace goursat {

/// One scalar unknown of a Goursat system
///   eps_a(x) F_x + sign * eps_b(xi) F_xi = rhs(x, xi, all four fields).
/// sign = -1 fields carry their data on the diagonal xi = x and their
/// characteristics fall toward xi = 0; sign = +1 fields carry data on the
/// bottom edge xi = 0 (coupled to a falling field) and rise toward the
/// diagonal.
struct FieldSpec {
    int sign = +1;
    std::function<double(double)> eps_a, eps_b;
    std::function<double(double, double, const std::array<double, 4>&)> rhs;
    std::function<double(double)> diag_bc;  // sign = -1 only
    int bottom_source = -1;                 // sign = +1 only
    std::function<double(double)> bottom_factor;
};

/// March the four coupled fields in increasing x-columns. At each interior
/// node the directional derivative on the left-hand side is discretized to
/// first order along the local characteristic, with linear interpolation in
/// xi between the bracketing nodes of the previous column. Characteristics
/// that exit through an edge before reaching the previous column pick up the
/// boundary value at the (linearized) crossing point instead. Boundary rows
/// and diagonals are imposed exactly.
inline KernelSet march(const TriangularGrid& grid,
                       const std::array<FieldSpec, 4>& specs,
                       const std::array<std::string, 4>& labels) {
    const int n = grid.n;
    const double dx = grid.dx;
    KernelSet out{{KernelField(grid), KernelField(grid), KernelField(grid), KernelField(grid)},
                  labels};

    std::array<int, 4> order{};  // falling fields first within each column
    int pos = 0;
    for (int k = 0; k < 4; ++k)
        if (specs[k].sign < 0) order[pos++] = k;
    const int n_falling = pos;
    for (int k = 0; k < 4; ++k)
        if (specs[k].sign > 0) order[pos++] = k;

    // seed node (0,0)
    for (int q = 0; q < n_falling; ++q) {
        const int k = order[q];
        out[k].at(0, 0) = specs[k].diag_bc(0.0);
    }
    for (int q = n_falling; q < 4; ++q) {
        const int k = order[q];
        out[k].at(0, 0) = specs[k].bottom_factor(0.0) * out[specs[k].bottom_source].at(0, 0);
    }

    auto col_interp = [&](int field, int col, double xi) {
        // linear interpolation within column `col` (nodes j = 0..col)
        double u = xi / dx;
        int j0 = std::clamp(static_cast<int>(std::floor(u)), 0, std::max(col - 1, 0));
        if (col == 0) return out[field].at(0, 0);
        const double w = u - j0;
        return (1.0 - w) * out[field].at(col, j0) + w * out[field].at(col, j0 + 1);
    };

    for (int i = 1; i <= n; ++i) {
        const double x = grid.x(i);
        const double xm = x - dx;

        for (int q = 0; q < 4; ++q) {
            const int k = order[q];
            const FieldSpec& f = specs[k];

            if (f.sign < 0) out[k].at(i, i) = f.diag_bc(x);
            else out[k].at(i, 0) = f.bottom_factor(x) * out[f.bottom_source].at(i, 0);

            const int j_lo = (f.sign < 0) ? 0 : 1;
            const int j_hi = (f.sign < 0) ? i - 1 : i;
            for (int j = j_lo; j <= j_hi; ++j) {
                const double xi = grid.xi(j);
                const double r = f.eps_b(xi) / f.eps_a(x);
                double base, step, xe, xie;
                std::array<double, 4> vals{};
                if (f.sign < 0) {
                    const double xistar = xi + r * dx;
                    if (xistar <= xm * (1.0 + 1e-14)) {
                        for (int p = 0; p < 4; ++p) vals[p] = col_interp(p, i - 1, xistar);
                        base = vals[k];
                        step = dx;
                        xe = xm;
                        xie = std::min(xistar, xm);
                    } else {
                        // crossed the diagonal between columns i-1 and i
                        const double xc = (xi + r * x) / (1.0 + r);
                        for (int p = 0; p < 4; ++p) {
                            if (specs[p].sign < 0) vals[p] = specs[p].diag_bc(xc);
                            else vals[p] = out[p].at(i - 1, i - 1);
                        }
                        base = vals[k];
                        step = x - xc;
                        xe = xc;
                        xie = xc;
                    }
                } else {
                    const double xistar = xi - r * dx;
                    if (xistar >= -1e-14) {
                        const double xic = std::clamp(xistar, 0.0, xm);
                        for (int p = 0; p < 4; ++p) vals[p] = col_interp(p, i - 1, xic);
                        base = vals[k];
                        step = dx;
                        xe = xm;
                        xie = xic;
                    } else {
                        // crossed the bottom edge: boundary data at (xc, 0)
                        const double xc = x - xi / r;
                        const double w = std::clamp((xc - xm) / dx, 0.0, 1.0);
                        for (int p = 0; p < 4; ++p)
                            if (specs[p].sign < 0)
                                vals[p] = (1.0 - w) * out[p].at(i - 1, 0) + w * out[p].at(i, 0);
                        for (int p = 0; p < 4; ++p)
                            if (specs[p].sign > 0)
                                vals[p] = specs[p].bottom_factor(xc) * vals[specs[p].bottom_source];
                        base = vals[k];
                        step = x - xc;
                        xe = xc;
                        xie = 0.0;
                    }
                }
                out[k].at(i, j) = base + step * f.rhs(xe, xie, vals) / f.eps_a(xe);
            }
        }

        for (int k = 0; k < 4; ++k) {
            double m = 0.0;
            for (int j = 0; j <= i; ++j) m = std::max(m, std::abs(out[k].at(i, j)));
            if (m > 1e6)
                throw NumericalError("Goursat sweep diverged at column x=" + std::to_string(x), m);
        }
    }
    return out;
}

}  // namespace goursat

/// Direct kernels K = (K_uu, K_uv, K_vu, K_vv) of the backstepping transform,
/// solved on the triangle by characteristic marching.
inline KernelSet solve_direct_kernels(const TriangularGrid& grid, const Coefficients& c) {
    using goursat::FieldSpec;
    enum { UU = 0, UV = 1, VU = 2, VV = 3 };
    std::array<FieldSpec, 4> s;

    s[UU].sign = +1;
    s[UU].eps_a = c.eps1;
    s[UU].eps_b = c.eps1;
    s[UU].rhs = [&c](double, double xi, const std::array<double, 4>& v) {
        return -c.eps1p(xi) * v[UU] - c.c2(xi) * v[UV];
    };
    s[UU].bottom_source = UV;
    s[UU].bottom_factor = [&c](double) { return c.eps2(0.0) / (c.q * c.eps1(0.0)); };

    s[UV].sign = -1;
    s[UV].eps_a = c.eps1;
    s[UV].eps_b = c.eps2;
    s[UV].rhs = [&c](double, double xi, const std::array<double, 4>& v) {
        return c.eps2p(xi) * v[UV] - c.c1(xi) * v[UU];
    };
    s[UV].diag_bc = [&c](double x) { return c.c1(x) / (c.eps1(x) + c.eps2(x)); };

    s[VU].sign = -1;
    s[VU].eps_a = c.eps2;
    s[VU].eps_b = c.eps1;
    s[VU].rhs = [&c](double, double xi, const std::array<double, 4>& v) {
        return c.eps1p(xi) * v[VU] + c.c2(xi) * v[VV];
    };
    s[VU].diag_bc = [&c](double x) { return -c.c2(x) / (c.eps1(x) + c.eps2(x)); };

    s[VV].sign = +1;
    s[VV].eps_a = c.eps2;
    s[VV].eps_b = c.eps2;
    s[VV].rhs = [&c](double, double xi, const std::array<double, 4>& v) {
        return -c.eps2p(xi) * v[VV] + c.c1(xi) * v[VU];
    };
    s[VV].bottom_source = VU;
    s[VV].bottom_factor = [&c](double) { return c.q * c.eps1(0.0) / c.eps2(0.0); };

    return goursat::march(grid, s, {"K_uu", "K_uv", "K_vu", "K_vv"});
}

/// Inverse kernels L = (L_aa, L_ab, L_ba, L_bb), solved from their own
/// Goursat system (independent route from invert_kernels_volterra).
inline KernelSet solve_inverse_kernels_goursat(const TriangularGrid& grid, const Coefficients& c) {
    using goursat::FieldSpec;
    enum { AA = 0, AB = 1, BA = 2, BB = 3 };
    const auto& lam = c.eps1;
    const auto& lamp = c.eps1p;
    auto diag = [&](double x) { return -lamp(x) / (4.0 * lam(x)); };

    std::array<FieldSpec, 4> s;
    s[AA].sign = +1;
    s[AA].eps_a = lam;
    s[AA].eps_b = lam;
    s[AA].rhs = [&](double x, double xi, const std::array<double, 4>& v) {
        return -lamp(xi) * v[AA] - lamp(x) / 2.0 * v[BA];
    };
    s[AA].bottom_source = AB;
    s[AA].bottom_factor = [](double) { return 1.0; };

    s[AB].sign = -1;
    s[AB].eps_a = lam;
    s[AB].eps_b = lam;
    s[AB].rhs = [&](double x, double xi, const std::array<double, 4>& v) {
        return lamp(xi) * v[AB] - lamp(x) / 2.0 * v[BB];
    };
    s[AB].diag_bc = diag;

    s[BA].sign = -1;
    s[BA].eps_a = lam;
    s[BA].eps_b = lam;
    s[BA].rhs = [&](double x, double xi, const std::array<double, 4>& v) {
        return lamp(xi) * v[BA] - lamp(x) / 2.0 * v[AA];
    };
    s[BA].diag_bc = diag;

    s[BB].sign = +1;
    s[BB].eps_a = lam;
    s[BB].eps_b = lam;
    s[BB].rhs = [&](double x, double xi, const std::array<double, 4>& v) {
        return -lamp(xi) * v[BB] - lamp(x) / 2.0 * v[AB];
    };
    s[BB].bottom_source = BA;
    s[BB].bottom_factor = [](double) { return 1.0; };

    return goursat::march(grid, s, {"L_aa", "L_ab", "L_ba", "L_bb"});
}

/// Inverse kernels from the direct ones through the Volterra relation
///   L(x,xi) = K(x,xi) + integral_xi^x K(x,s) L(s,xi) ds,
/// marched upward in x per xi-column with trapezoidal quadrature. The
/// resulting 2x2 system per node is solved in closed form.
inline KernelSet invert_kernels_volterra(const KernelSet& K, const TriangularGrid& grid) {
    const int n = grid.n;
    const double dx = grid.dx;
    KernelSet L{{KernelField(grid), KernelField(grid), KernelField(grid), KernelField(grid)},
                {"L_aa", "L_ab", "L_ba", "L_bb"}};

    using Mat = std::array<double, 4>;  // row-major 2x2
    auto kmat = [&](int i, int j) -> Mat {
        return {K[0].at(i, j), K[1].at(i, j), K[2].at(i, j), K[3].at(i, j)};
    };
    auto mul = [](const Mat& A, const Mat& B) -> Mat {
        return {A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3],
                A[2] * B[0] + A[3] * B[2], A[2] * B[1] + A[3] * B[3]};
    };

    std::vector<Mat> col(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
        col[j] = kmat(j, j);  // empty integral: L(x,x) = K(x,x)
        for (int q = 0; q < 4; ++q) L[q].at(j, j) = col[j][q];
        for (int i = j + 1; i <= n; ++i) {
            Mat S{0.0, 0.0, 0.0, 0.0};
            const Mat first = mul(kmat(i, j), col[j]);
            for (int q = 0; q < 4; ++q) S[q] += 0.5 * first[q];
            for (int mnode = j + 1; mnode < i; ++mnode) {
                const Mat term = mul(kmat(i, mnode), col[mnode]);
                for (int q = 0; q < 4; ++q) S[q] += term[q];
            }
            // (I - dx/2 K(x,x)) L = K(x,xi) + dx * S
            const Mat Kd = kmat(i, i);
            const double a = 1.0 - dx / 2.0 * Kd[0];
            const double b = -dx / 2.0 * Kd[1];
            const double cc = -dx / 2.0 * Kd[2];
            const double d = 1.0 - dx / 2.0 * Kd[3];
            const double det = a * d - b * cc;
            const Mat R = {K[0].at(i, j) + dx * S[0], K[1].at(i, j) + dx * S[1],
                           K[2].at(i, j) + dx * S[2], K[3].at(i, j) + dx * S[3]};
            Mat Lij;
            Lij[0] = (d * R[0] - b * R[2]) / det;
            Lij[1] = (d * R[1] - b * R[3]) / det;
            Lij[2] = (-cc * R[0] + a * R[2]) / det;
            Lij[3] = (-cc * R[1] + a * R[3]) / det;
            col[i] = Lij;
            for (int q = 0; q < 4; ++q) L[q].at(i, j) = Lij[q];
        }
    }
    return L;
}

/// Gain functions a(x), b(x), the shared constant a0 = b0 and the boundary
/// scale mu, all from the top row L(1, .) by cumulative trapezoidal
/// integration on the kernel grid.
struct GainProfile {
    std::vector<double> x;  ///< kernel-grid nodes
    std::vector<double> a, b;
    double a0 = 0.0, b0 = 0.0, mu = 0.0;
    std::vector<double> row_a;  ///< L_aa(1,x) + L_ba(1,x) = -(a lambda)'
    std::vector<double> row_b;  ///< L_ab(1,x) + L_bb(1,x) = (b lambda)'

    double a_at(double xq) const { return interp(a, xq); }
    double b_at(double xq) const { return interp(b, xq); }

  private:
    double interp(const std::vector<double>& f, double xq) const {
        const double dx = x[1] - x[0];
        double u = std::clamp(xq / dx, 0.0, double(f.size() - 1));
        int i0 = std::min(static_cast<int>(std::floor(u)), static_cast<int>(f.size()) - 2);
        const double w = u - i0;
        return (1.0 - w) * f[i0] + w * f[i0 + 1];
    }
};

inline GainProfile compute_gains(const KernelSet& L, const TriangularGrid& grid,
                                 const DerivedConstants& dc) {
    const int n = grid.n;
    const double dx = grid.dx;
    GainProfile gp;
    gp.x.resize(n + 1);
    gp.row_a.resize(n + 1);
    gp.row_b.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        gp.x[j] = grid.xi(j);
        gp.row_a[j] = L[0].at(n, j) + L[2].at(n, j);
        gp.row_b[j] = L[1].at(n, j) + L[3].at(n, j);
    }
    std::vector<double> IA(n + 1, 0.0), IB(n + 1, 0.0);
    for (int j = 1; j <= n; ++j) {
        IA[j] = IA[j - 1] + dx * (gp.row_a[j] + gp.row_a[j - 1]) / 2.0;
        IB[j] = IB[j - 1] + dx * (gp.row_b[j] + gp.row_b[j - 1]) / 2.0;
    }
    gp.a0 = 1.0 + IA[n];
    gp.b0 = gp.a0;
    gp.mu = 2.0 + IA[n] + IB[n];
    gp.a.resize(n + 1);
    gp.b.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double lam = wave_speed(gp.x[j], dc);
        gp.a[j] = (gp.a0 - IA[j]) / lam;
        gp.b[j] = (gp.b0 + IB[j]) / lam;
    }
    return gp;
}

/// Picard construction of the symmetric reduced pair (f, g) with
/// f = L_aa = L_bb and g = L_ab = L_ba: fixed-point iteration of the
/// characteristic integral equations on a lattice in travel-time
/// coordinates (Lambda(x), Lambda(xi)), advancing trapezoid by trapezoid in
/// the level Lambda(x) - Lambda(xi). Serves as an independent oracle for the
/// Goursat and Volterra routes.
///
/// Throws NumericalError when a trapezoid fails to contract within max_iter
/// sweeps even after halving the trapezoid width.
inline std::pair<KernelField, KernelField> picard_fg_oracle(const TriangularGrid& grid,
                                                            const DerivedConstants& dc,
                                                            double tol, int max_iter) {
    if (!(tol > 0.0)) throw ValidationError("picard_fg_oracle: tol must be > 0");
    const double C = dc.C2 / 4.0;
    const double L1 = big_lambda(1.0, dc);
    const int M = grid.n;  // lattice resolution follows the requested grid
    const double h = L1 / M;
    const double cc = dc.C1 * dc.C2;

    // f, g on the lower-triangular lattice (eta_i, tau_j) = (i h, j h)
    std::vector<std::vector<double>> f(M + 1), g(M + 1);

    auto interp = [&](const std::vector<std::vector<double>>& A, double eta, double tau) {
        double u = std::clamp(eta / h, 0.0, double(M));
        double v = std::clamp(tau / h, 0.0, u);
        int i0 = std::min(static_cast<int>(std::floor(u)), M - 1);
        int j0 = std::min(static_cast<int>(std::floor(v)), i0);
        const double du = u - i0;
        const double dv = v - j0;
        if (j0 == i0) {
            const double a = A[i0][j0];
            const double b = A[i0 + 1][j0];
            const double c2v = A[i0 + 1][j0 + 1];
            return a + du * (b - a) + dv * (c2v - b);
        }
        return (1.0 - du) * (1.0 - dv) * A[i0][j0] + du * (1.0 - dv) * A[i0 + 1][j0] +
               (1.0 - du) * dv * A[i0][j0 + 1] + du * dv * A[i0 + 1][j0 + 1];
    };

    // closed-form weights along characteristics (lambda = C1 e^{-C2 x})
    auto w_inner = [&](double s) { return 1.0 / (1.0 + cc * s); };
    auto mu_at = [&](double u) { return 0.5 * dc.C2 * dc.C1 / (1.0 + cc * u); };

    auto f_formula = [&](double eta, double tau) {
        const double base = interp(g, eta - tau, 0.0);
        if (tau <= 0.0) return base;
        const int np = std::max(1, static_cast<int>(std::ceil(tau / h - 1e-12)));
        const double ds = tau / np;
        double I = 0.0;
        for (int k = 0; k <= np; ++k) {
            const double s = k * ds;
            const double val = w_inner(s) * mu_at(eta - tau + s) * interp(g, eta - tau + s, s);
            I += (k == 0 || k == np) ? 0.5 * val : val;
        }
        I *= ds;
        return (1.0 + cc * tau) * (base + I);
    };
    auto g_formula = [&](double eta, double tau) {
        const double c0 = (eta + tau) / 2.0;
        const double slen = (eta - tau) / 2.0;
        if (slen <= 0.0) return C;
        const int np = std::max(1, static_cast<int>(std::ceil(slen / h - 1e-12)));
        const double ds = slen / np;
        double I = 0.0;
        for (int k = 0; k <= np; ++k) {
            const double s = k * ds;
            const double val =
                (1.0 + cc * c0) / (1.0 + cc * (c0 - s)) * mu_at(c0 + s) * interp(f, c0 + s, c0 - s);
            I += (k == 0 || k == np) ? 0.5 * val : val;
        }
        I *= ds;
        return (1.0 + cc * tau) / (1.0 + cc * c0) * (C + I);
    };

    int n_traps = 8;  // trapezoid width Lambda(1)/8, halved on non-contraction
    while (true) {
        for (int i = 0; i <= M; ++i) {
            f[i].assign(i + 1, C);
            g[i].assign(i + 1, C);
        }
        const double eps = L1 / n_traps;
        bool contracted = true;
        for (int kt = 0; kt < n_traps && contracted; ++kt) {
            double prev_change = 1e300;
            int grow_streak = 0;
            for (int it = 0;; ++it) {
                if (it >= max_iter)
                    throw NumericalError("picard_fg_oracle: trapezoid did not converge",
                                         prev_change);
                double change = 0.0;
                for (int i = 0; i <= M; ++i)
                    for (int j = 0; j <= i; ++j) {
                        const double lvl = (i - j) * h;
                        if (lvl < kt * eps - 1e-12 || lvl > (kt + 1) * eps + 1e-12) continue;
                        const double nf = f_formula(i * h, j * h);
                        change = std::max(change, std::abs(nf - f[i][j]));
                        f[i][j] = nf;
                    }
                for (int i = 0; i <= M; ++i)
                    for (int j = 0; j <= i; ++j) {
                        const double lvl = (i - j) * h;
                        if (lvl < kt * eps - 1e-12 || lvl > (kt + 1) * eps + 1e-12) continue;
                        const double ng = g_formula(i * h, j * h);
                        change = std::max(change, std::abs(ng - g[i][j]));
                        g[i][j] = ng;
                    }
                if (change < tol) break;
                grow_streak = (change > prev_change) ? grow_streak + 1 : 0;
                if (grow_streak >= 2) {
                    contracted = false;
                    break;
                }
                prev_change = change;
            }
        }
        if (contracted) break;
        n_traps *= 2;
        if (n_traps > 4096)
            throw NumericalError("picard_fg_oracle: no contraction even at minimal width");
    }

    // sample back onto the requested (x, xi) grid
    KernelField ff(grid), gg(grid);
    for (int i = 0; i <= grid.n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double eta = big_lambda(grid.x(i), dc);
            const double tau = big_lambda(grid.xi(j), dc);
            ff.at(i, j) = interp(f, eta, tau);
            gg.at(i, j) = interp(g, eta, tau);
        }
    return {std::move(ff), std::move(gg)};
}

}  // namespace cranebc
