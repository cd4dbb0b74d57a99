#pragma once

#include "cfs/bitensor.hpp"
#include "cfs/symbols.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <functional>

namespace cfs {

using Potential = std::function<SpinMatrix(const Vec4&)>;

/// V = R/4 · id, from (iγ^μ∇_μ)² = -□ + R/4.
inline Potential lichnerowicz_potential(const MetricChart& c) {
    return [c](const Vec4& p) -> SpinMatrix { return 0.25 * curvature_at(c, p).scalar * SpinMatrix::Identity(); };
}

inline Potential scalar_potential(std::function<double(const Vec4&)> v) {
    return [v](const Vec4& p) -> SpinMatrix { return v(p) * SpinMatrix::Identity(); };
}

inline Potential zero_potential() {
    return [](const Vec4&) -> SpinMatrix { return SpinMatrix::Zero(); };
}

/// Gauss-Legendre rule mapped to [0, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre_unit(int n) {
    auto build = [](const auto& x, const auto& w, bool odd) {
        std::vector<double> xs, ws;
        for (size_t i = 0; i < x.size(); ++i) {
            if (i == 0 && odd) {
                xs.push_back(0.5);
                ws.push_back(0.5 * w[0]);
                continue;
            }
            xs.push_back(0.5 - 0.5 * x[i]);
            ws.push_back(0.5 * w[i]);
            xs.push_back(0.5 + 0.5 * x[i]);
            ws.push_back(0.5 * w[i]);
        }
        return std::pair{xs, ws};
    };
    using namespace boost::math::quadrature;
    switch (n) {
        case 2: return build(gauss<double, 2>::abscissa(), gauss<double, 2>::weights(), false);
        case 4: return build(gauss<double, 4>::abscissa(), gauss<double, 4>::weights(), false);
        case 8: return build(gauss<double, 8>::abscissa(), gauss<double, 8>::weights(), false);
        case 16: return build(gauss<double, 16>::abscissa(), gauss<double, 16>::weights(), false);
        case 32: return build(gauss<double, 32>::abscissa(), gauss<double, 32>::weights(), false);
        default: throw DomainError("supported Gauss-Legendre node counts: 2, 4, 8, 16, 32");
    }
}

struct SDWConfig {
    int nodes = 8;
    /// Laplacian stencil step as a fraction of each axis width.
    double fd_scale = 1e-3;
    /// Order of the central stencils in the Laplacian (2 or 4).
    int box_order = 2;
    /// Drop V·a_n for n ≥ 1 (first order in the potential).
    bool linear_in_potential = false;
};

/// Schwinger-DeWitt coefficients a_n(x, y): E_y → E_x.
///
/// (n + 1 + σ^μ∇_μ) a_{n+1} = Δ^{-1/2}(□ - V)(Δ^{1/2} a_n) along γ(0) = y, γ(1) = x, solved by
/// s^{n+1} a_{n+1}(γ(s), y) = U(γ(s), y) ∫_0^s t^n U(y, γ(t)) F_n(γ(t)) dt.
class SDWSolver {
public:
    SDWSolver(MetricChart chart, Potential v, SDWConfig cfg = {}, const DiracRep& rep = dirac_rep())
        : chart_(std::move(chart)), v_(std::move(v)), cfg_(cfg), rep_(&rep) {
        if (!v_) v_ = lichnerowicz_potential(chart_);
    }

    const MetricChart& chart() const { return chart_; }
    const Potential& potential() const { return v_; }
    const SDWConfig& config() const { return cfg_; }
    const DiracRep& rep() const { return *rep_; }

    BiTensorFrame frame(const Vec4& z, const Vec4& y) const {
        return make_frame(solve_geodesic(chart_, z, y, false), *rep_);
    }

    SpinMatrix coefficient(int n, const Vec4& z, const Vec4& y) const {
        if (n < 0 || n > 2) throw DomainError("SDW coefficients are implemented for n <= 2");
        if (n == 0) return z == y ? SpinMatrix::Identity() : frame(z, y).U;
        if (z == y) return source(n - 1, y, y) / double(n);
        const auto f = frame(z, y);
        const auto [xs, ws] = gauss_legendre_unit(cfg_.nodes);
        SpinMatrix acc = SpinMatrix::Zero();
        for (size_t i = 0; i < xs.size(); ++i) {
            const double s = xs[i];
            // transport parameter s runs from y; the stored geodesic runs from z
            const Vec4 p = f.geodesic.state_at(1.0 - s).x;
            const SpinMatrix Uinv = frame(p, y).U.inverse();
            acc += ws[i] * std::pow(s, n - 1) * Uinv * source(n - 1, p, y);
        }
        return f.U * acc;
    }

    /// F_n(z) = Δ^{-1/2}(□ - V)(Δ^{1/2} a_n) at (z, y).
    SpinMatrix source(int n, const Vec4& z, const Vec4& y) const {
        auto phi = [&](const Vec4& p) -> SpinMatrix {
            const double ds = p == y ? 1.0 : frame(p, y).delta_sqrt;
            return ds * coefficient(n, p, y);
        };
        const double d0 = z == y ? 1.0 : frame(z, y).delta_sqrt;
        const SpinMatrix box = spinor_box(phi, z);
        SpinMatrix out = box / d0;
        if (!(cfg_.linear_in_potential && n >= 1)) out -= v_(z) * coefficient(n, z, y);
        return out;
    }

    /// Connection Laplacian g^{μν}∇_μ∇_ν on E-valued fields (first index), second-order differences:
    /// g^{μν}(∂_μ∂_ν A + (∂_μΓ_ν)A + 2Γ_μ∂_ν A + Γ_μΓ_ν A - Γ^λ_{μν}(∂_λ A + Γ_λ A)).
    SpinMatrix spinor_box(const std::function<SpinMatrix(const Vec4&)>& A, const Vec4& z) const {
        const Mat4 gi = chart_.metric(z).inverse();
        const auto G = christoffel(chart_, z);
        const auto S = spin_connection_matrices(tetrad_at(chart_, z), *rep_);
        const SpinMatrix a0 = A(z);
        std::array<SpinMatrix, 4> d1;
        std::array<std::array<SpinMatrix, 4>, 4> d2, dS;  // dS[m][n] = ∂_m Γ_n
        std::array<double, 4> h;
        std::array<Vec4, 4> e;
        for (int k = 0; k < 4; ++k) {
            h[k] = cfg_.fd_scale * chart_.domain[k].width();
            e[k] = Vec4::Zero();
            e[k](k) = h[k];
            const SpinMatrix ap = A(z + e[k]), am = A(z - e[k]);
            const auto Sp = spin_connection_matrices(tetrad_at(chart_, z + e[k]), *rep_);
            const auto Sm = spin_connection_matrices(tetrad_at(chart_, z - e[k]), *rep_);
            if (cfg_.box_order == 4) {
                const SpinMatrix app = A(z + 2 * e[k]), amm = A(z - 2 * e[k]);
                d1[k] = (-app + 8.0 * ap - 8.0 * am + amm) / (12 * h[k]);
                d2[k][k] = (-app + 16.0 * ap - 30.0 * a0 + 16.0 * am - amm) / (12 * h[k] * h[k]);
                const auto Spp = spin_connection_matrices(tetrad_at(chart_, z + 2 * e[k]), *rep_);
                const auto Smm = spin_connection_matrices(tetrad_at(chart_, z - 2 * e[k]), *rep_);
                for (int n = 0; n < 4; ++n) dS[k][n] = (-Spp[n] + 8.0 * Sp[n] - 8.0 * Sm[n] + Smm[n]) / (12 * h[k]);
            } else {
                d1[k] = (ap - am) / (2 * h[k]);
                d2[k][k] = (ap - 2.0 * a0 + am) / (h[k] * h[k]);
                for (int n = 0; n < 4; ++n) dS[k][n] = (Sp[n] - Sm[n]) / (2 * h[k]);
            }
        }
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                d2[a][b] = d2[b][a] = SpinMatrix::Zero();
                if (gi(a, b) == 0.0) continue;
                d2[a][b] = d2[b][a] = (A(z + e[a] + e[b]) - A(z + e[a] - e[b]) - A(z - e[a] + e[b]) +
                                       A(z - e[a] - e[b])) /
                                      (4 * h[a] * h[b]);
            }
        SpinMatrix box = SpinMatrix::Zero();
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) {
                if (gi(m, n) == 0.0) continue;
                SpinMatrix t = d2[m][n] + dS[m][n] * a0 + 2.0 * S[m] * d1[n] + S[m] * S[n] * a0;
                for (int l = 0; l < 4; ++l) t -= G[l](m, n) * (d1[l] + S[l] * a0);
                box += gi(m, n) * t;
            }
        return box;
    }

private:
    MetricChart chart_;
    Potential v_;
    SDWConfig cfg_;
    const DiracRep* rep_;
};

struct SDWCoefficients {
    Vec4 x, y;
    std::vector<SpinMatrix> coeffs;
    Potential potential;
};

inline SDWCoefficients sdw_coefficients(const SDWSolver& s, const Vec4& x, const Vec4& y, int N) {
    if (N < 0 || N > 2) throw DomainError("SDW truncation order must lie in [0, 2]");
    SDWCoefficients c;
    c.x = x;
    c.y = y;
    c.potential = s.potential();
    for (int n = 0; n <= N; ++n) c.coeffs.push_back(s.coefficient(n, x, y));
    return c;
}

/// Integrand of the first path-ordered integral applied to the identity, U(y,γ(s)) F_0(γ(s)),
/// with γ(0) = y and γ(1) = x.
inline SpinMatrix b_operator(const SDWSolver& s, const Geodesic& g, double s_param) {
    if (!(s_param > 0 && s_param < 1)) throw DomainError("b_operator requires s in (0, 1)");
    const Vec4 p = g.state_at(1.0 - s_param).x;
    return s.frame(p, g.y).U.inverse() * s.source(0, p, g.y);
}

/// G_N = Δ^{1/2} Σ_{n ≤ N} a_n T⁽ⁿ⁾(σ^ε).
inline SpinMatrix truncated_g(double delta_sqrt, const std::vector<SpinMatrix>& a, Complex sig_eps, double m, int N) {
    if (N + 1 > int(a.size())) throw DomainError("not enough SDW coefficients for the requested order");
    SpinMatrix g = SpinMatrix::Zero();
    for (int n = 0; n <= N; ++n) g += a[n] * t_value(n, sig_eps, m);
    return delta_sqrt * g;
}

inline SpinMatrix truncated_g(const BiTensorFrame& f, const SDWCoefficients& c, Complex sig_eps, double m, int N) {
    return truncated_g(f.delta_sqrt, c.coeffs, sig_eps, m, N);
}

/// x ↦ G_N(x, y) with σ^ε(x, y) supplied by the caller.
inline std::function<SpinMatrix(const Vec4&)> green_evaluator(const SDWSolver& s, const Vec4& y, int N, double m,
                                                              std::function<Complex(const Vec4&)> sig) {
    return [&s, y, N, m, sig](const Vec4& p) -> SpinMatrix {
        const auto f = s.frame(p, y);
        std::vector<SpinMatrix> a{f.U};
        for (int n = 1; n <= N; ++n) a.push_back(s.coefficient(n, p, y));
        return truncated_g(f.delta_sqrt, a, sig(p), m, N);
    };
}

/// ‖(-□^S + R/4 - m²) G‖ (max entry) at x, by differences in x.
inline double kg_residual(const SDWSolver& s, const std::function<SpinMatrix(const Vec4&)>& G, const Vec4& x,
                          double m) {
    const SpinMatrix r = -s.spinor_box(G, x) + (s.potential()(x) - m * m * SpinMatrix::Identity()) * G(x);
    return r.cwiseAbs().maxCoeff();
}

}  // namespace cfs
