#include "cfs/geometry.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cfs;

namespace {

Vec4 random_interior(const MetricChart& c, std::mt19937_64& rng) {
    Vec4 p;
    for (int k = 0; k < 4; ++k) {
        const double m = 0.1 * c.domain[k].width();
        std::uniform_real_distribution<double> u(c.domain[k].lo + m, c.domain[k].hi - m);
        p(k) = u(rng);
    }
    return p;
}

const char* kCatalogue[] = {"minkowski", "desitter", "flrw", "schwarzschild", "ultrastatic"};

}  // namespace

TEST(Geometry, MinkowskiIsFlat) {
    const auto c = minkowski();
    const auto cb = curvature_at(c, Vec4(0.2, -0.3, 0.1, 0.4));
    EXPECT_EQ(cb.scalar, 0.0);
    for (int r = 0; r < 4; ++r) EXPECT_EQ(cb.christoffel[r].norm(), 0.0);
    const auto t = tetrad_at(c, Vec4::Zero());
    EXPECT_LT((t.frame - Mat4::Identity()).norm(), 1e-15);
}

TEST(Geometry, DeSitterScalarAndEinstein) {
    for (double H : {0.5, 1.0}) {
        const auto c = de_sitter(H);
        const auto cb = curvature_at(c, Vec4(0.3, 0.1, -0.2, 0.05));
        // natural contraction in (+,-,-,-): R = -12 H^2, R_{mn} = -3 H^2 g_{mn}
        EXPECT_NEAR(cb.scalar, -12 * H * H, 1e-7);
        EXPECT_LT((cb.ricci + 3 * H * H * cb.metric).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LT(cb.ricci_tf.cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Geometry, SchwarzschildRicciFlatButCurved) {
    const auto c = schwarzschild(1.0);
    const auto cb = curvature_at(c, reference_point(c));
    EXPECT_NEAR(cb.scalar, 0.0, 1e-8);
    EXPECT_LT(cb.ricci.cwiseAbs().maxCoeff(), 1e-8);
    // R^t_{rtr} = 2M/(r^3 f) at r = 10, M = 1
    const double f = 0.8;
    EXPECT_NEAR(cb.riemann[0][1](0, 1), 2.0 / (1000.0 * f), 1e-9);
}

TEST(Geometry, TetradDiagonalCases) {
    const auto c = flrw_poly();
    const Vec4 p(0.4, 0, 0, 0);
    const double a = 1 + 0.5 * 0.4 + 0.25 * 0.16;
    const auto t = tetrad_at(c, p);
    EXPECT_LT((t.frame - Mat4(Vec4(1, 1 / a, 1 / a, 1 / a).asDiagonal())).norm(), 1e-14);
    const auto s = schwarzschild();
    const auto ts = tetrad_at(s, reference_point(s));
    EXPECT_NEAR(ts.frame(0, 0), 1 / std::sqrt(0.8), 1e-14);
}

TEST(Geometry, CatalogueInvariantsOnRandomPoints) {
    std::mt19937_64 rng(7);
    for (const char* name : kCatalogue) {
        const auto c = make_chart(name);
        for (int i = 0; i < 50; ++i) {
            const Vec4 p = random_interior(c, rng);
            const auto cb = curvature_at(c, p);
            EXPECT_LT(bianchi_residual(cb), 1e-7) << name;
            EXPECT_NEAR((cb.metric_inv.cwiseProduct(cb.ricci_tf)).sum(), 0.0, 1e-10) << name;
            for (int r = 0; r < 4; ++r) EXPECT_LT((cb.christoffel[r] - cb.christoffel[r].transpose()).norm(), 1e-14);
            const auto t = tetrad_at(c, p);
            EXPECT_LT((t.frame.transpose() * cb.metric * t.frame - eta()).cwiseAbs().maxCoeff(), 1e-10) << name;
            EXPECT_LT((t.frame * t.coframe - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-10) << name;
            for (int m = 0; m < 4; ++m)
                EXPECT_LT((t.spin_conn[m] + t.spin_conn[m].transpose()).cwiseAbs().maxCoeff(), 1e-7) << name;
            for (const DiracRep* rep : {&dirac_rep(), &chiral_rep()})
                EXPECT_LT(clifford_residual(gamma_at(t, *rep), cb.metric_inv), 1e-12) << name;
        }
    }
}

TEST(Geometry, AnalyticDerivativeMatchesDifferences) {
    std::mt19937_64 rng(11);
    for (const char* name : kCatalogue) {
        const auto c = make_chart(name);
        for (int i = 0; i < 10; ++i) {
            const Vec4 p = random_interior(c, rng);
            const auto a = c.dmetric(p), f = c.fd_dmetric(p);
            for (int r = 0; r < 4; ++r) {
                const double scale = std::max(1.0, a[r].cwiseAbs().maxCoeff());
                EXPECT_LT((a[r] - f[r]).cwiseAbs().maxCoeff() / scale, 1e-6) << name;
            }
        }
    }
}

// ∇_μ γ^ν = ∂_μ γ^ν + Γ^ν_{μλ} γ^λ + [Γ_μ, γ^ν] must vanish.
TEST(Geometry, SpinConnectionMakesGammaParallel) {
    for (const char* name : {"desitter", "schwarzschild", "ultrastatic"}) {
        const auto c = make_chart(name);
        const Vec4 p = reference_point(c);
        const auto t = tetrad_at(c, p);
        const auto G = christoffel(c, p);
        const auto S = spin_connection_matrices(t);
        const auto g = gamma_at(t);
        for (int m = 0; m < 4; ++m) {
            const double h = c.curv_step(m);
            Vec4 e = Vec4::Zero();
            e(m) = h;
            const auto gp = gamma_at(tetrad_at(c, p + e)), gm = gamma_at(tetrad_at(c, p - e));
            for (int n = 0; n < 4; ++n) {
                CMat4 d = (gp[n] - gm[n]) / (2 * h) + S[m] * g[n] - g[n] * S[m];
                for (int l = 0; l < 4; ++l) d += G[n](m, l) * g[l];
                EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-6) << name << " " << m << n;
            }
        }
    }
}

TEST(Geometry, OutsideDomainThrows) {
    const auto c = minkowski();
    EXPECT_THROW(curvature_at(c, Vec4(2, 0, 0, 0)), DomainError);
    EXPECT_THROW(make_chart("kerr"), DomainError);
}
