#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "cranebc/crane_model.hpp"
#include "cranebc/kernel_engine.hpp"

using namespace cranebc;
using Catch::Approx;

namespace {

const CraneParams kParams{};
const DerivedConstants kDc = DerivedConstants::from(kParams);

struct Solved {
    TriangularGrid grid;
    KernelSet K, Lv, Lg;
};

const Solved& solved(int n) {
    static std::map<int, Solved> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        TriangularGrid grid(n);
        const Coefficients c = coefficient_functions(kDc);
        KernelSet K = solve_direct_kernels(grid, c);
        KernelSet Lv = invert_kernels_volterra(K, grid);
        KernelSet Lg = solve_inverse_kernels_goursat(grid, c);
        it = cache.emplace(n, Solved{grid, std::move(K), std::move(Lv), std::move(Lg)}).first;
    }
    return it->second;
}

}  // namespace

TEST_CASE("triangular grid bookkeeping") {
    TriangularGrid g(4);
    CHECK(g.node_count() == 15);  // (n+1)(n+2)/2
    CHECK(g.dx == Approx(0.25));
    CHECK(g.index(0, 0) == 0);
    CHECK(g.index(4, 4) == 14);
    CHECK_THROWS_AS(TriangularGrid(1), ValidationError);
}

TEST_CASE("kernel field interpolation is exact at nodes") {
    TriangularGrid g(8);
    KernelField f(g);
    for (int i = 0; i <= 8; ++i)
        for (int j = 0; j <= i; ++j) f.at(i, j) = std::sin(3.0 * i) + 0.1 * j;
    for (int i = 0; i <= 8; ++i)
        for (int j = 0; j <= i; ++j)
            CHECK(f.value_at(g.x(i), g.xi(j)) == Approx(f.at(i, j)).margin(1e-14));
}

TEST_CASE("coefficient functions of the crane system") {
    const Coefficients c = coefficient_functions(kDc);
    CHECK(c.q == 1.0);
    // c1(0) = C2 lambda(0) / 2
    CHECK(c.c1(0.0) == Approx(kDc.C2 * kDc.C1 / 2.0).epsilon(1e-13));
    for (double x : {0.0, 0.25, 0.7, 1.0}) {
        CHECK(c.c1(x) + c.c2(x) == Approx(0.0).margin(1e-15));
        CHECK(c.eps1(x) - c.eps2(x) == 0.0);
    }
}

TEST_CASE("direct kernels: imposed boundary rows and diagonal values") {
    const auto& s = solved(100);
    const int n = s.grid.n;
    const double C24 = kDc.C2 / 4.0;
    for (int i = 0; i <= n; ++i) {
        CHECK(std::abs(s.K[1].at(i, i) - C24) < 1e-15);  // K_uv(x,x) = C2/4
        CHECK(std::abs(s.K[2].at(i, i) - C24) < 1e-15);  // K_vu(x,x) = C2/4
        CHECK(s.K[0].at(i, 0) == s.K[1].at(i, 0));       // K_uu(x,0) = K_uv(x,0), q=1
        CHECK(s.K[3].at(i, 0) == s.K[2].at(i, 0));
    }
}

TEST_CASE("constant-coefficient degenerate system has zero kernels") {
    TriangularGrid grid(40);
    Coefficients c;
    c.eps1 = [](double) { return 2.0; };
    c.eps1p = [](double) { return 0.0; };
    c.eps2 = c.eps1;
    c.eps2p = c.eps1p;
    c.c1 = [](double) { return 0.0; };
    c.c2 = [](double) { return 0.0; };
    c.q = 1.0;
    const KernelSet K = solve_direct_kernels(grid, c);
    for (int k = 0; k < 4; ++k) CHECK(K[k].max_abs() == 0.0);
}

TEST_CASE("inverse kernels: boundary conditions and reference values") {
    const auto& s = solved(200);
    const int n = s.grid.n;
    const double C24 = kDc.C2 / 4.0;
    for (int i = 0; i <= n; ++i) {
        CHECK(std::abs(s.Lg[1].at(i, i) - C24) < 1e-15);
        CHECK(std::abs(s.Lg[2].at(i, i) - C24) < 1e-15);
        CHECK(s.Lg[0].at(i, 0) == s.Lg[1].at(i, 0));
        CHECK(s.Lg[3].at(i, 0) == s.Lg[2].at(i, 0));
    }
    // published gain-curve values at x = 1
    for (const KernelSet* L : {&s.Lv, &s.Lg}) {
        CHECK((*L)[1].at(n, n) == Approx(0.0866434).margin(2e-3));
        CHECK((*L)[0].at(n, 0) == Approx(0.078696).margin(2e-3));
        CHECK((*L)[0].at(n, n) == Approx(0.140703).margin(3e-3));
    }
}

TEST_CASE("volterra inversion basics") {
    const auto& s = solved(50);
    const int n = s.grid.n;
    // empty integral at xi = x: L(x,x) = K(x,x) exactly
    for (int i = 0; i <= n; ++i)
        for (int k = 0; k < 4; ++k) CHECK(s.Lv[k].at(i, i) == s.K[k].at(i, i));

    // K = 0 gives L = 0
    TriangularGrid g(10);
    KernelSet zeroK{{KernelField(g), KernelField(g), KernelField(g), KernelField(g)},
                    {"K_uu", "K_uv", "K_vu", "K_vv"}};
    const KernelSet L0 = invert_kernels_volterra(zeroK, g);
    for (int k = 0; k < 4; ++k) CHECK(L0[k].max_abs() == 0.0);
}

TEST_CASE("kernel symmetry, positivity and grid convergence") {
    double prev_diff = -1.0;
    double refine_prev = -1.0;
    const KernelSet* last = nullptr;
    for (int n : {50, 100, 200}) {
        const auto& s = solved(n);
        double sym_aabb = 0.0, sym_abba = 0.0, minv = 1e300;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= i; ++j) {
                sym_aabb = std::max(sym_aabb, std::abs(s.Lv[0].at(i, j) - s.Lv[3].at(i, j)));
                sym_abba = std::max(sym_abba, std::abs(s.Lv[1].at(i, j) - s.Lv[2].at(i, j)));
                for (int k = 0; k < 4; ++k) minv = std::min(minv, s.Lv[k].at(i, j));
            }
        CHECK(sym_aabb < 5.0 * s.grid.dx);
        CHECK(sym_abba < 5.0 * s.grid.dx);
        CHECK(minv >= 0.0);

        // cross-route agreement shrinks with dx
        double cross = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= i; ++j)
                for (int k = 0; k < 4; ++k)
                    cross = std::max(cross, std::abs(s.Lv[k].at(i, j) - s.Lg[k].at(i, j)));
        if (prev_diff > 0.0) CHECK(cross < prev_diff);
        prev_diff = cross;

        // successive-refinement differences decrease monotonically
        if (last != nullptr) {
            const int np = n / 2;
            double d = 0.0;
            for (int i = 0; i <= np; ++i)
                for (int j = 0; j <= i; ++j)
                    for (int k = 0; k < 4; ++k)
                        d = std::max(d,
                                     std::abs((*last)[k].at(i, j) - s.Lg[k].at(2 * i, 2 * j)));
            if (refine_prev > 0.0) CHECK(d < refine_prev);
            refine_prev = d;
        }
        last = &s.Lg;
    }
}

TEST_CASE("gain profile: constants, identity at x = 1 and mu") {
    const auto& s = solved(200);
    const GainProfile gp = compute_gains(s.Lv, s.grid, kDc);
    CHECK(gp.a0 == gp.b0);
    CHECK(gp.mu == Approx(2.379).margin(0.02));
    CHECK(gp.mu >= 2.0);
    // 1 - (a lambda)(1) = 0 under the same trapezoidal rule
    CHECK(gp.a.back() * wave_speed(1.0, kDc) == Approx(1.0).margin(1e-12));
    CHECK(gp.b.back() * wave_speed(1.0, kDc) == Approx(gp.mu - 1.0).margin(1e-12));
}

TEST_CASE("divergence guard trips on an explosive system") {
    TriangularGrid grid(30);
    Coefficients c;
    c.eps1 = [](double) { return 1.0; };
    c.eps1p = [](double) { return 0.0; };
    c.eps2 = c.eps1;
    c.eps2p = c.eps1p;
    c.c1 = [](double) { return 600.0; };  // amplification ~(1+20dx)^n per column
    c.c2 = [](double) { return -600.0; };
    c.q = 1.0;
    CHECK_THROWS_AS(solve_direct_kernels(grid, c), NumericalError);
}

TEST_CASE("picard oracle reproduces the inverse kernels") {
    const auto& s = solved(50);
    const auto [f, g] = picard_fg_oracle(s.grid, kDc, 1e-11, 500);
    const double C24 = kDc.C2 / 4.0;
    const int n = s.grid.n;
    double dmax = 0.0, minval = 1e300;
    for (int i = 0; i <= n; ++i) {
        CHECK(g.at(i, i) == Approx(C24).margin(1e-11));   // g(x,x) = C
        CHECK(f.at(i, 0) == Approx(g.at(i, 0)).margin(1e-11));  // f(x,0) = g(x,0)
        for (int j = 0; j <= i; ++j) {
            dmax = std::max(dmax, std::abs(f.at(i, j) - s.Lg[0].at(i, j)));
            dmax = std::max(dmax, std::abs(g.at(i, j) - s.Lg[1].at(i, j)));
            minval = std::min({minval, f.at(i, j), g.at(i, j)});
        }
    }
    CHECK(minval > 0.0);     // strictly positive
    CHECK(dmax < 2.0 * s.grid.dx);  // O(dx) agreement with the Goursat route

    // agreement tightens under refinement
    const auto& s2 = solved(100);
    const auto [f2, g2] = picard_fg_oracle(s2.grid, kDc, 1e-11, 500);
    double dmax2 = 0.0;
    for (int i = 0; i <= s2.grid.n; ++i)
        for (int j = 0; j <= i; ++j)
            dmax2 = std::max(dmax2, std::abs(f2.at(i, j) - s2.Lg[0].at(i, j)));
    CHECK(dmax2 < dmax);

    CHECK_THROWS_AS(picard_fg_oracle(s.grid, kDc, -1.0, 100), ValidationError);
    CHECK_THROWS_AS(picard_fg_oracle(s.grid, kDc, 1e-18, 2), NumericalError);
}
