#include "cfs/symbols.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

#include <random>

using namespace cfs;

namespace {

struct BesselRow {
    double nu;
    double z[2];
    double v[2];
};
// arbitrary-precision reference values (mpmath, 40 digits)
const BesselRow kBessel[] = {
#include "data/bessel_table.inc"
};

struct SymbolRow {
    int n;
    double s[2];
    double m;
    double v[2];
};
const SymbolRow kSymbols[] = {
#include "data/t_table.inc"
};

}  // namespace

TEST(Bessel, MatchesReferenceGrid) {
    for (const auto& r : kBessel) {
        const Complex z(r.z[0], r.z[1]), v(r.v[0], r.v[1]);
        EXPECT_LT(std::abs(bessel_k(r.nu, z) - v) / std::abs(v), 1e-10) << r.nu << " " << z;
    }
}

TEST(Bessel, ClosedFormHalfOrder) {
    // sqrt(pi/2)/e
    EXPECT_NEAR(bessel_k(0.5, 1.0).real(), 0.4610685044, 1e-10);
    EXPECT_NEAR(bessel_k(1.0, 2.0).real(), 0.1398658818, 1e-10);
}

TEST(Bessel, ReflectionSymmetry) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 100; ++i) {
        const Complex z(std::abs(u(rng)) + 1e-3, u(rng));
        EXPECT_LT(std::abs(bessel_k(2, z) - bessel_k(-2, z)), 1e-12 * std::abs(bessel_k(2, z)));
    }
}

TEST(Bessel, SeriesAndFractionAgreeAtSwitch) {
    for (double ph : {-1.5, -0.7, 0.0, 0.4, 1.2, 1.55}) {
        const Complex z = std::polar(9.0, ph);
        Complex a0, a1, b0, b1;
        detail::bessel_k01_series(z, a0, a1);
        detail::bessel_k01_cf(z, b0, b1);
        EXPECT_LT(std::abs(a0 - b0) / std::abs(b0), 1e-11) << z;
        EXPECT_LT(std::abs(a1 - b1) / std::abs(b1), 1e-11) << z;
    }
}

TEST(Bessel, BranchCut) {
    EXPECT_THROW(bessel_k(1, Complex(-1.0, 0.0)), BranchCutError);
    EXPECT_THROW(bessel_k(0, Complex(0.0, 0.0)), BranchCutError);
}

TEST(Symbols, MatchesReferenceFormula) {
    for (const auto& r : kSymbols) {
        const Complex s(r.s[0], r.s[1]), v(r.v[0], r.v[1]);
        EXPECT_LT(std::abs(t_value(r.n, s, r.m) - v) / std::abs(v), 1e-10) << r.n << " " << s;
    }
}

TEST(Symbols, NuAndDegree) {
    EXPECT_EQ(t_symbol(-1, Complex(-0.5, -0.1), 1).nu, 2.0);
    EXPECT_EQ(t_symbol(0, Complex(-0.5, -0.1), 1).nu, 1.0);
    EXPECT_EQ(t_symbol(0, Complex(-0.5, -0.1), 1).degree, 1.0);
}

TEST(Symbols, SigmaEps) {
    EXPECT_NEAR(std::abs(sigma_eps(0.0, Complex(0, 0.5), 0.1) - 0.05), 0.0, 1e-16);
    EXPECT_NEAR(std::abs(sigma_eps(1.0, 1.0, 0.1) - Complex(1, -0.1)), 0.0, 1e-16);
    EXPECT_THROW(sigma_eps(0.0, 0.0, 0.1), RegularizationError);
}

TEST(Symbols, RecurrenceIsExact) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2, 2), um(0.2, 3);
    std::uniform_int_distribution<int> un(-3, 3);
    for (int i = 0; i < 1000; ++i) {
        const Complex s(u(rng), u(rng));
        EXPECT_LT(check_t_recurrence(un(rng), s, um(rng)), 1e-12) << s;
    }
    EXPECT_LT(check_t_recurrence(0, Complex(1, -0.1), 1), 1e-12);
    EXPECT_LT(check_t_recurrence(-1, Complex(1, -0.1), 1), 1e-12);
    EXPECT_LT(check_t_recurrence(0, Complex(0, -0.3), 1), 1e-12);
}

// dT^(n)/dσ = -T^(n-1)/2
TEST(Symbols, SigmaDerivative) {
    const Complex s(-0.4, -0.05);
    const double h = 1e-5;
    for (int n = -1; n <= 2; ++n) {
        const Complex d = (t_value(n, s + h, 1.3) - t_value(n, s - h, 1.3)) / (2 * h);
        EXPECT_LT(std::abs(d + 0.5 * t_value(n - 1, s, 1.3)) / std::abs(t_value(n - 1, s, 1.3)), 1e-8);
    }
}

TEST(Symbols, DerivativeAndKleinGordonConvergeMinkowski) {
    const Vec4 x(0, 0.1, 0, 0), y(0.25, 0.2, 0.1, -0.05);
    const std::vector<double> hs{8e-3, 4e-3, 2e-3, 1e-3};
    for (double m : {1.0, 2.0})
        for (int n : {0, 1}) {
            const auto c = minkowski_context(y, m, 0.05, -1);
            std::vector<double> rd, rk;
            for (double h : hs) {
                rd.push_back(check_t_derivative(n, c, x, h));
                rk.push_back(check_t_kleingordon(n, c, x, h));
            }
            EXPECT_NEAR(cfs::testing::slope(hs, rd), 2.0, 0.3) << n << " " << m;
            EXPECT_NEAR(cfs::testing::slope(hs, rk), 2.0, 0.3) << n << " " << m;
        }
    // the +iε/2 field breaks g(∇σ^ε,∇σ^ε) = 2σ^ε: the wave identity stalls
    const auto c = minkowski_context(y, 1.0, 0.05, +1);
    EXPECT_GT(check_t_kleingordon(1, c, x, 1e-3), 0.05);
    EXPECT_LT(check_t_derivative(1, c, x, 1e-3), 1e-3);
}

TEST(Symbols, DegreeScalingOnLightCone) {
    const Vec4 x = Vec4::Zero(), y(0.2, 0.2, 0, 0);
    for (int n : {-1, 0}) {
        std::vector<double> e, v;
        for (double eps : {1e-4, 3e-4, 1e-3, 3e-3}) {
            const auto c = minkowski_context(y, 1.0, eps, -1);
            e.push_back(eps);
            v.push_back(std::abs(t_value(n, c.sig_eps(x), 1.0)));
        }
        EXPECT_NEAR(cfs::testing::slope(e, v), -symbol_nu(n), 0.1) << n;
    }
}

TEST(Symbols, ConjugationUnderSwap) {
    const Vec4 x(0.05, 0.1, 0, 0.02), y(0.25, 0.2, 0.1, -0.05);
    const double eps = 0.03;
    for (int sign : {-1, 1}) {
        const Complex sxy = minkowski_context(y, 1.0, eps, sign).sig_eps(x);
        // f(y,x) = x⁰ - y⁰ + sign iε/2 = -conj f(x,y)
        const Complex syx = minkowski_context(x, 1.0, eps, sign).sig_eps(y);
        for (int n = -1; n <= 2; ++n)
            EXPECT_LT(std::abs(t_value(n, syx, 1.0) - std::conj(t_value(n, sxy, 1.0))),
                      1e-12 * std::abs(t_value(n, sxy, 1.0)));
    }
}
