#pragma once

#include "cfs/dirac.hpp"
#include "cfs/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace cfs {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

/// Coordinate chart with metric components g_{μν}(p) and, optionally, ∂_ρ g_{μν}.
struct MetricChart {
    std::string name;
    std::function<Mat4(const Vec4&)> metric;
    /// Returns dg[ρ](μ,ν) = ∂_ρ g_{μν}. May be empty; finite differences are used then.
    std::function<Array3(const Vec4&)> metric_deriv;
    std::array<Interval, 4> domain;
    /// Coordinate separation below which geodesics are assumed unique.
    double normal_radius = 0.1;
    std::map<std::string, double> params;

    /// Curvature finite-difference step along axis k: 1e-4 times the axis width.
    double curv_step(int k) const { return 1e-4 * domain[k].width(); }
    /// Stencil step for bi-tensor Laplacians along axis k: 1e-3 times the axis width.
    double box_step(int k) const { return 1e-3 * domain[k].width(); }

    bool contains(const Vec4& p, double margin_factor = 0.0) const {
        for (int k = 0; k < 4; ++k) {
            const double m = margin_factor * curv_step(k);
            if (!(p(k) >= domain[k].lo + m && p(k) <= domain[k].hi - m)) return false;
        }
        return true;
    }

    void require_interior(const Vec4& p, double margin_factor = 3.0) const {
        if (!contains(p, margin_factor)) {
            std::ostringstream os;
            os << "point (" << p.transpose() << ") outside chart '" << name << "'";
            throw DomainError(os.str());
        }
    }

    Array3 dmetric(const Vec4& p) const {
        if (metric_deriv) return metric_deriv(p);
        return fd_dmetric(p);
    }

    /// Fourth-order central differences of the metric components.
    Array3 fd_dmetric(const Vec4& p) const {
        Array3 d;
        for (int r = 0; r < 4; ++r) {
            const double h = curv_step(r);
            Vec4 e = Vec4::Zero();
            e(r) = h;
            d[r] = (-metric(p + 2 * e) + 8 * metric(p + e) - 8 * metric(p - e) + metric(p - 2 * e)) /
                   (12 * h);
        }
        return d;
    }
};

/// Metric signature check: one positive and three negative eigenvalues.
inline bool has_lorentz_signature(const Mat4& g) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(g, Eigen::EigenvaluesOnly);
    const Vec4 ev = es.eigenvalues();
    int pos = 0, neg = 0;
    for (int k = 0; k < 4; ++k) {
        if (ev(k) > 0) ++pos;
        if (ev(k) < 0) ++neg;
    }
    return pos == 1 && neg == 3;
}

inline Mat4 checked_metric(const MetricChart& c, const Vec4& p) {
    Mat4 g = c.metric(p);
    if (!has_lorentz_signature(g)) throw SignatureError("metric at point is not of signature (+,-,-,-)");
    return g;
}

/// Γ^ρ_{μν} as gam[ρ](μ,ν).
inline Array3 christoffel(const MetricChart& c, const Vec4& p) {
    const Mat4 ginv = c.metric(p).inverse();
    const Array3 dg = c.dmetric(p);
    Array3 gam;
    for (int r = 0; r < 4; ++r) {
        gam[r].setZero();
        for (int m = 0; m < 4; ++m)
            for (int n = m; n < 4; ++n) {
                double s = 0;
                for (int l = 0; l < 4; ++l) s += ginv(r, l) * (dg[m](l, n) + dg[n](l, m) - dg[l](m, n));
                gam[r](m, n) = gam[r](n, m) = 0.5 * s;
            }
    }
    return gam;
}

struct CurvatureBundle {
    Array3 christoffel;
    /// riemann[ρ][σ](μ,ν) = R^ρ_{σμν}
    std::array<std::array<Mat4, 4>, 4> riemann;
    Mat4 ricci;
    double scalar = 0.0;
    Mat4 ricci_tf;
    Mat4 metric;
    Mat4 metric_inv;

    /// Fully covariant R_{αβμν}.
    double riemann_lower(int a, int b, int m, int n) const {
        double s = 0;
        for (int r = 0; r < 4; ++r) s += metric(a, r) * riemann[r][b](m, n);
        return s;
    }
};

/// Christoffel symbols, Riemann and Ricci tensors at p. Second derivatives of the
/// metric enter through fourth-order differences of Γ.
inline CurvatureBundle curvature_at(const MetricChart& c, const Vec4& p) {
    c.require_interior(p);
    CurvatureBundle cb;
    cb.metric = checked_metric(c, p);
    cb.metric_inv = cb.metric.inverse();
    cb.christoffel = christoffel(c, p);

    // dgam[s][r](m,n) = ∂_s Γ^r_{mn}
    std::array<Array3, 4> dgam;
    for (int s = 0; s < 4; ++s) {
        const double h = c.curv_step(s);
        Vec4 e = Vec4::Zero();
        e(s) = h;
        const Array3 p2 = christoffel(c, p + 2 * e), p1 = christoffel(c, p + e);
        const Array3 m1 = christoffel(c, p - e), m2 = christoffel(c, p - 2 * e);
        for (int r = 0; r < 4; ++r) dgam[s][r] = (-p2[r] + 8 * p1[r] - 8 * m1[r] + m2[r]) / (12 * h);
    }

    const Array3& G = cb.christoffel;
    for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s)
            for (int m = 0; m < 4; ++m)
                for (int n = 0; n < 4; ++n) {
                    double v = dgam[m][r](n, s) - dgam[n][r](m, s);
                    for (int l = 0; l < 4; ++l) v += G[r](m, l) * G[l](n, s) - G[r](n, l) * G[l](m, s);
                    cb.riemann[r][s](m, n) = v;
                }

    // R_{σν} = R^ρ_{σρν}
    for (int s = 0; s < 4; ++s)
        for (int n = 0; n < 4; ++n) {
            double v = 0;
            for (int r = 0; r < 4; ++r) v += cb.riemann[r][s](r, n);
            cb.ricci(s, n) = v;
        }
    cb.ricci = 0.5 * (cb.ricci + cb.ricci.transpose()).eval();
    cb.scalar = (cb.metric_inv.cwiseProduct(cb.ricci)).sum();
    cb.ricci_tf = cb.ricci - 0.25 * cb.scalar * cb.metric;
    return cb;
}

/// Largest first-Bianchi residual |R^ρ_{σμν} + R^ρ_{μνσ} + R^ρ_{νσμ}|.
inline double bianchi_residual(const CurvatureBundle& cb) {
    double worst = 0;
    for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s)
            for (int m = 0; m < 4; ++m)
                for (int n = 0; n < 4; ++n) {
                    const auto& R = cb.riemann[r];
                    worst = std::max(worst, std::abs(R[s](m, n) + R[m](n, s) + R[n](s, m)));
                }
    return worst;
}

struct Tetrad {
    /// frame(μ, a) = e_a^μ
    Mat4 frame;
    /// coframe(a, μ) = e^a_μ
    Mat4 coframe;
    /// spin_conn[μ](a, b) = ω_μ^{ab}
    Array3 spin_conn;
};

/// Gram-Schmidt on the coordinate basis, starting from ∂_0 (assumed timelike).
inline Mat4 frame_at(const MetricChart& c, const Vec4& p) {
    const Mat4 g = c.metric(p);
    Mat4 E = Mat4::Identity();
    const Vec4 etad(1, -1, -1, -1);
    for (int a = 0; a < 4; ++a) {
        Vec4 v = Vec4::Unit(a);
        for (int b = 0; b < a; ++b) {
            const Vec4 eb = E.col(b);
            v -= etad(b) * (eb.dot(g * v)) * eb;
        }
        const double n2 = v.dot(g * v);
        if (!(n2 * etad(a) > 0)) throw SignatureError("orthonormalization failed: wrong causal character");
        E.col(a) = v / std::sqrt(std::abs(n2));
    }
    return E;
}

/// Orthonormal frame plus connection coefficients
/// ω_μ^a_b = e^a_ν (∂_μ e_b^ν + Γ^ν_{μλ} e_b^λ), raised with η.
inline Tetrad tetrad_at(const MetricChart& c, const Vec4& p) {
    c.require_interior(p);
    Tetrad t;
    t.frame = frame_at(c, p);
    const Mat4 g = c.metric(p);
    t.coframe = eta() * t.frame.transpose() * g;
    const Array3 G = christoffel(c, p);
    for (int m = 0; m < 4; ++m) {
        const double h = c.curv_step(m);
        Vec4 e = Vec4::Zero();
        e(m) = h;
        const Mat4 dE = (-frame_at(c, p + 2 * e) + 8 * frame_at(c, p + e) - 8 * frame_at(c, p - e) +
                         frame_at(c, p - 2 * e)) /
                        (12 * h);
        Mat4 cov = dE;  // (ν, b): ∇_μ e_b^ν
        for (int n = 0; n < 4; ++n)
            for (int b = 0; b < 4; ++b) {
                double s = 0;
                for (int l = 0; l < 4; ++l) s += G[n](m, l) * t.frame(l, b);
                cov(n, b) += s;
            }
        const Mat4 mixed = t.coframe * cov;  // ω_μ^a_b
        t.spin_conn[m] = mixed * eta();      // ω_μ^{ab}
    }
    return t;
}

/// Curved Dirac matrices γ^μ = e_a^μ γ^a.
inline std::array<CMat4, 4> gamma_at(const Tetrad& t, const DiracRep& rep = dirac_rep()) {
    std::array<CMat4, 4> g;
    for (int m = 0; m < 4; ++m) {
        g[m].setZero();
        for (int a = 0; a < 4; ++a) g[m] += t.frame(m, a) * rep.gamma[a];
    }
    return g;
}

/// Spinor connection matrices Γ_μ = ¼ ω_{μab} γ^a γ^b, so ∇_μ ψ = ∂_μ ψ + Γ_μ ψ.
inline std::array<CMat4, 4> spin_connection_matrices(const Tetrad& t, const DiracRep& rep = dirac_rep()) {
    std::array<CMat4, 4> G;
    for (int m = 0; m < 4; ++m) {
        const Mat4 low = eta() * t.spin_conn[m] * eta();
        G[m].setZero();
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                if (a != b) G[m] += 0.25 * low(a, b) * rep.gamma[a] * rep.gamma[b];
    }
    return G;
}

/// max |{γ^μ, γ^ν} − 2 g^{μν}|.
inline double clifford_residual(const std::array<CMat4, 4>& g, const Mat4& ginv) {
    double worst = 0;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
            const CMat4 ac = g[m] * g[n] + g[n] * g[m] - 2 * ginv(m, n) * CMat4::Identity();
            worst = std::max(worst, ac.cwiseAbs().maxCoeff());
        }
    return worst;
}

/// Lowered curved Dirac matrices γ_μ = g_{μν} γ^ν.
inline std::array<CMat4, 4> lower_gammas(const std::array<CMat4, 4>& g, const Mat4& metric) {
    std::array<CMat4, 4> out;
    for (int m = 0; m < 4; ++m) {
        out[m].setZero();
        for (int n = 0; n < 4; ++n) out[m] += metric(m, n) * g[n];
    }
    return out;
}

// ---------------------------------------------------------------- catalogue

inline MetricChart minkowski() {
    MetricChart c;
    c.name = "minkowski";
    c.metric = [](const Vec4&) { return eta(); };
    c.metric_deriv = [](const Vec4&) {
        Array3 d;
        for (auto& m : d) m.setZero();
        return d;
    };
    for (auto& iv : c.domain) iv = {-1.0, 1.0};
    c.normal_radius = 4.0;  // whole chart
    return c;
}

/// Spatially flat FLRW: diag(1, −a², −a², −a²) with user scale factor.
inline MetricChart flrw(std::function<double(double)> a, std::function<double(double)> da,
                        std::string name = "flrw") {
    MetricChart c;
    c.name = std::move(name);
    c.metric = [a](const Vec4& p) {
        const double s = a(p(0));
        return Mat4(Vec4(1.0, -s * s, -s * s, -s * s).asDiagonal());
    };
    c.metric_deriv = [a, da](const Vec4& p) {
        Array3 d;
        for (auto& m : d) m.setZero();
        const double v = -2.0 * a(p(0)) * da(p(0));
        d[0].diagonal() = Vec4(0, v, v, v);
        return d;
    };
    for (auto& iv : c.domain) iv = {-1.0, 1.0};
    return c;
}

/// FLRW with a(t) = a0 + a1 t + a2 t².
inline MetricChart flrw_poly(double a0 = 1.0, double a1 = 0.5, double a2 = 0.25) {
    auto c = flrw([=](double t) { return a0 + t * (a1 + t * a2); }, [=](double t) { return a1 + 2 * a2 * t; },
                  "flrw");
    c.params = {{"a0", a0}, {"a1", a1}, {"a2", a2}};
    return c;
}

/// de Sitter in flat slicing, a(t) = exp(H t).
inline MetricChart de_sitter(double H = 1.0) {
    auto c = flrw([H](double t) { return std::exp(H * t); }, [H](double t) { return H * std::exp(H * t); },
                  "desitter");
    c.params = {{"H", H}};
    return c;
}

/// Schwarzschild exterior in (t, r, θ, φ).
inline MetricChart schwarzschild(double M = 1.0) {
    MetricChart c;
    c.name = "schwarzschild";
    c.params = {{"M", M}};
    c.metric = [M](const Vec4& p) {
        const double r = p(1), s = std::sin(p(2));
        const double f = 1.0 - 2.0 * M / r;
        return Mat4(Vec4(f, -1.0 / f, -r * r, -r * r * s * s).asDiagonal());
    };
    c.metric_deriv = [M](const Vec4& p) {
        const double r = p(1), s = std::sin(p(2)), co = std::cos(p(2));
        const double f = 1.0 - 2.0 * M / r, fp = 2.0 * M / (r * r);
        Array3 d;
        for (auto& m : d) m.setZero();
        d[1].diagonal() = Vec4(fp, fp / (f * f), -2 * r, -2 * r * s * s);
        d[2](3, 3) = -2 * r * r * s * co;
        return d;
    };
    const double pi = std::acos(-1.0);
    c.domain = {Interval{-1.0, 1.0}, Interval{6.0 * M, 14.0 * M}, Interval{pi / 2 - 1, pi / 2 + 1},
                Interval{-1.0, 1.0}};
    return c;
}

/// Ultrastatic product R × S³(ρ) in (t, χ, θ, φ).
inline MetricChart ultrastatic_sphere(double rho = 1.0) {
    MetricChart c;
    c.name = "ultrastatic";
    c.params = {{"rho", rho}};
    const double r2 = rho * rho;
    c.metric = [r2](const Vec4& p) {
        const double sc = std::sin(p(1)), st = std::sin(p(2));
        return Mat4(Vec4(1.0, -r2, -r2 * sc * sc, -r2 * sc * sc * st * st).asDiagonal());
    };
    c.metric_deriv = [r2](const Vec4& p) {
        const double sc = std::sin(p(1)), cc = std::cos(p(1)), st = std::sin(p(2)), ct = std::cos(p(2));
        Array3 d;
        for (auto& m : d) m.setZero();
        d[1](2, 2) = -2 * r2 * sc * cc;
        d[1](3, 3) = -2 * r2 * sc * cc * st * st;
        d[2](3, 3) = -2 * r2 * sc * sc * st * ct;
        return d;
    };
    c.domain = {Interval{-1.0, 1.0}, Interval{0.5, 2.5}, Interval{0.5, 2.6}, Interval{-1.0, 1.0}};
    return c;
}

/// Catalogue lookup by name; unknown parameters keep their defaults.
inline MetricChart make_chart(const std::string& name, const std::map<std::string, double>& p = {}) {
    auto get = [&](const char* k, double def) {
        auto it = p.find(k);
        return it == p.end() ? def : it->second;
    };
    MetricChart c;
    if (name == "minkowski")
        c = minkowski();
    else if (name == "desitter")
        c = de_sitter(get("H", 1.0));
    else if (name == "flrw")
        c = flrw_poly(get("a0", 1.0), get("a1", 0.5), get("a2", 0.25));
    else if (name == "schwarzschild")
        c = schwarzschild(get("M", 1.0));
    else if (name == "ultrastatic")
        c = ultrastatic_sphere(get("rho", 1.0));
    else
        throw DomainError("unknown metric '" + name + "'");
    c.normal_radius = get("radius", c.normal_radius);
    return c;
}

/// A representative interior point for each catalogue chart.
inline Vec4 reference_point(const MetricChart& c) {
    if (c.name == "schwarzschild") return Vec4(0.0, 10.0 * c.params.at("M"), std::acos(-1.0) / 2, 0.0);
    if (c.name == "ultrastatic") return Vec4(0.0, 1.5, 1.55, 0.0);
    return Vec4(0.1, 0.0, 0.0, 0.0);
}

}  // namespace cfs
