#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cranebc/crane_model.hpp"

using namespace cranebc;
using Catch::Approx;

namespace {
CraneParams reference_params() { return CraneParams{}; }  // m=2, rho=2, g=9.81
}  // namespace

TEST_CASE("tension is affine and matches endpoint values") {
    const CraneParams p = reference_params();
    CHECK(tension(0.0, p) == Approx(9.81).epsilon(1e-14));
    CHECK(tension(1.0, p) == Approx(19.62).epsilon(1e-14));
    CHECK(tension(0.5, p) == Approx(14.715).epsilon(1e-14));
    CHECK_THROWS_AS(tension(-0.1, p), std::domain_error);
    CHECK_THROWS_AS(tension(1.1, p), std::domain_error);
}

TEST_CASE("s_to_x endpoints and midpoint closed form") {
    const CraneParams p = reference_params();
    CHECK(s_to_x(0.0, p) == 0.0);
    CHECK(s_to_x(1.0, p) == Approx(1.0).margin(1e-15));
    CHECK(s_to_x(0.5, p) == Approx(std::log(1.5) / std::log(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(s_to_x(2.0, p), std::domain_error);
}

TEST_CASE("x_to_s endpoints and round trip") {
    const CraneParams p = reference_params();
    CHECK(x_to_s(0.0, p) == 0.0);
    CHECK(x_to_s(1.0, p) == Approx(1.0).margin(1e-14));
    CHECK(x_to_s(std::log(1.5) / std::log(2.0), p) == Approx(0.5).margin(1e-14));

    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double s = U(rng);
        worst = std::max(worst, std::abs(x_to_s(s_to_x(s, p), p) - s));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("derived constants and wave speed profile") {
    const CraneParams p = reference_params();
    const DerivedConstants dc = DerivedConstants::from(p);
    CHECK(dc.J == Approx(std::log(2.0) / 9.81).epsilon(1e-14));
    CHECK(dc.C2 == Approx(std::log(2.0) / 2.0).epsilon(1e-14));
    // lambda(0) = 1/(J sqrt(g m / rho))
    CHECK(wave_speed(0.0, dc) == Approx(4.518653527729805).epsilon(1e-12));
    CHECK(wave_speed(1.0, dc) == Approx(4.518653527729805 / std::sqrt(2.0)).epsilon(1e-12));

    // defining identity lambda(x) J sqrt(d~(x)) = 1
    for (double x : {0.0, 0.2, 0.5, 0.77, 1.0})
        CHECK(wave_speed(x, dc) * dc.J * std::sqrt(dc.tension_x(x)) == Approx(1.0).epsilon(1e-13));

    // d~(x) = d(s(x)) pointwise
    for (double x : {0.0, 0.3, 0.6, 0.9, 1.0})
        CHECK(std::abs(dc.tension_x(x) - tension(x_to_s(x, p), p)) < 1e-9);

    // lambda' = -C2 lambda via finite differences
    const double h = 1e-5;
    for (double x : {0.1, 0.5, 0.9}) {
        const double fd = (wave_speed(x + h, dc) - wave_speed(x - h, dc)) / (2.0 * h);
        CHECK(std::abs(fd - wave_speed_slope(x, dc)) < 1e-6);
    }
}

TEST_CASE("big_lambda closed form agrees with quadrature") {
    const DerivedConstants dc = DerivedConstants::from(reference_params());
    CHECK(big_lambda(0.0, dc) == 0.0);
    CHECK(big_lambda(1.0, dc) == Approx(0.26449642515736077).epsilon(1e-12));
    CHECK_THROWS_AS(big_lambda(1.2, dc), std::domain_error);
    CHECK_THROWS_AS(wave_speed(-0.2, dc), std::domain_error);

    // trapezoidal quadrature of 1/lambda on [0,x], 1e4 panels
    for (double x : {0.4, 1.0}) {
        const int n = 10000;
        double q = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = x * i / n, b = x * (i + 1) / n;
            q += (1.0 / wave_speed(a, dc) + 1.0 / wave_speed(b, dc)) / 2.0 * (b - a);
        }
        CHECK(std::abs(q - big_lambda(x, dc)) < 1e-8);
    }
    CHECK(big_lambda_inv(big_lambda(0.63, dc), dc) == Approx(0.63).margin(1e-13));
}

TEST_CASE("riemann transforms: special cases and round trip") {
    const CraneParams p = reference_params();
    const DerivedConstants dc = DerivedConstants::from(p);
    std::vector<double> x(21);
    for (int i = 0; i <= 20; ++i) x[i] = i / 20.0;

    SECTION("zero fields stay zero") {
        std::vector<double> zero(x.size(), 0.0);
        const auto [u, v] = riemann_forward(zero, zero, x, dc);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(u[i] == 0.0);
            CHECK(v[i] == 0.0);
        }
    }
    SECTION("pure velocity gives u = v = 1/sqrt(lambda)") {
        std::vector<double> ones(x.size(), 1.0), zero(x.size(), 0.0);
        const auto [u, v] = riemann_forward(ones, zero, x, dc);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(u[i] == Approx(1.0 / std::sqrt(wave_speed(x[i], dc))).epsilon(1e-14));
            CHECK(v[i] == Approx(u[i]).epsilon(1e-14));
        }
    }
    SECTION("constant u = v has no slope") {
        std::vector<double> c(x.size(), 0.7);
        const auto [zt, zx] = riemann_inverse(c, c, x, dc);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(zx[i] == 0.0);
            CHECK(zt[i] == Approx(0.7 * std::sqrt(wave_speed(x[i], dc))).epsilon(1e-14));
        }
    }
    SECTION("round trip on random fields") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> U(-2.0, 2.0);
        for (int k = 0; k < 200; ++k) {
            std::vector<double> zt(x.size()), zx(x.size());
            for (auto& vv : zt) vv = U(rng);
            for (auto& vv : zx) vv = U(rng);
            const auto [u, v] = riemann_forward(zt, zx, x, dc);
            const auto [zt2, zx2] = riemann_inverse(u, v, x, dc);
            for (std::size_t i = 0; i < x.size(); ++i) {
                CHECK(zt2[i] == Approx(zt[i]).margin(1e-13));
                CHECK(zx2[i] == Approx(zx[i]).margin(1e-13));
            }
        }
    }
    SECTION("grid mismatch is rejected") {
        std::vector<double> a(5, 0.0), b(6, 0.0);
        CHECK_THROWS_AS(riemann_forward(a, b, x, dc), ValidationError);
    }
}

TEST_CASE("parameter validation") {
    CraneParams p = reference_params();
    p.nu2 = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = reference_params();
    p.nu1 = 0.1;  // below nu2/(2-nu2) = 1/3
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = reference_params();
    p.m = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = reference_params();
    p.nu1 = 0.5;  // inequality case: valid params, not homogeneous
    CHECK_NOTHROW(p.validate());
    CHECK_FALSE(p.homogeneous_exponents());
    p.nu1 = p.nu2 / (2.0 - p.nu2);
    CHECK(p.homogeneous_exponents());
}
