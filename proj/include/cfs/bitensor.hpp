#pragma once

#include "cfs/worldfunc.hpp"

namespace cfs {

/// Per-pair geometric data: world function, van Vleck determinant, spin transport.
struct BiTensorFrame {
    Geodesic geodesic;
    WorldFunctionData wf;
    double delta = 1.0;
    double delta_sqrt = 1.0;
    /// U(x,y): S_y → S_x, frame components at both ends
    SpinMatrix U = SpinMatrix::Identity();
};

/// Δ = -det(-σ_{μν'}) / sqrt(|g(x)| |g(y)|) = det(Λ) sqrt|g(y)| / sqrt|g(x)|.
inline double van_vleck(const WorldFunctionData& w) {
    const double d = w.transport.determinant() * std::sqrt(std::abs(w.g_y.determinant()) /
                                                          std::abs(w.g_x.determinant()));
    if (!(d > 0)) throw GeometryError("non-positive van Vleck determinant (conjugate point?)");
    return d;
}

/// Spin parallel transport U(x,y) along the geodesic from y = γ(1) back to x = γ(0):
/// dU/ds = -γ̇^μ Γ_μ U, U(1) = id.
inline SpinMatrix spin_transport(const Geodesic& g, const DiracRep& rep = dirac_rep()) {
    if (g.v0.isZero()) return SpinMatrix::Identity();
    using State = std::array<double, 40>;
    State st{};
    for (int k = 0; k < 4; ++k) {
        st[k] = g.y(k);
        st[4 + k] = g.v1(k);
    }
    Eigen::Map<CMat4>(reinterpret_cast<Complex*>(&st[8])).setIdentity();
    const MetricChart& c = g.chart;
    auto rhs = [&](const State& a, State& da, double) {
        const Vec4 x(a[0], a[1], a[2], a[3]), v(a[4], a[5], a[6], a[7]);
        const Vec4 acc = geodesic_accel(christoffel(c, x), v);
        for (int k = 0; k < 4; ++k) {
            da[k] = v(k);
            da[4 + k] = acc(k);
        }
        const auto S = spin_connection_matrices(tetrad_at(c, x), rep);
        CMat4 A = CMat4::Zero();
        for (int m = 0; m < 4; ++m) A += v(m) * S[m];
        Eigen::Map<const CMat4> U(reinterpret_cast<const Complex*>(&a[8]));
        Eigen::Map<CMat4>(reinterpret_cast<Complex*>(&da[8])) = -A * U;
    };
    ode::integrate(rhs, st, 1.0, 0.0);
    return Eigen::Map<const CMat4>(reinterpret_cast<const Complex*>(&st[8]));
}

inline BiTensorFrame make_frame(const Geodesic& g, const DiracRep& rep = dirac_rep()) {
    BiTensorFrame f;
    f.geodesic = g;
    f.wf = world_function(g);
    f.delta = van_vleck(f.wf);
    f.delta_sqrt = std::sqrt(f.delta);
    f.U = spin_transport(g, rep);
    return f;
}

inline BiTensorFrame make_frame(const MetricChart& c, const Vec4& x, const Vec4& y,
                                const DiracRep& rep = dirac_rep()) {
    return make_frame(solve_geodesic(c, x, y), rep);
}

/// Base-point step for bi-tensor differences along axis k.
inline double bitensor_step(const MetricChart& c, int k) { return c.box_step(k); }

namespace detail {

/// Fourth-order central difference weights at offsets -2h..2h (first derivative).
inline constexpr double kD1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};

}  // namespace detail

/// □^{(1)}σ at x with y fixed: g^{μν}(∂_μσ_ν - Γ^λ_{μν}σ_λ), differences of the exact lowered gradient.
inline double box_sigma(const MetricChart& c, const Vec4& x, const Vec4& y) {
    const Mat4 ginv = c.metric(x).inverse();
    const Array3 G = christoffel(c, x);
    const auto w0 = world_function(c, x, y);
    const Vec4 s_low = w0.g_x * w0.grad1;
    Mat4 dd = Mat4::Zero();  // dd(ν, μ) = ∂_ν σ_μ
    for (int n = 0; n < 4; ++n) {
        const double h = bitensor_step(c, n);
        for (int j = 0; j < 5; ++j) {
            if (j == 2) continue;
            Vec4 p = x;
            p(n) += (j - 2) * h;
            const auto w = world_function(solve_geodesic(c, p, y, false));
            dd.row(n) += detail::kD1[j] / h * (w.g_x * w.grad1).transpose();
        }
    }
    double box = 0;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
            double v = dd(n, m);
            for (int l = 0; l < 4; ++l) v -= G[l](m, n) * s_low(l);
            box += ginv(m, n) * v;
        }
    return box;
}

/// |σ^μ ∇_μ Δ^{1/2} - ½(d - □σ) Δ^{1/2}| at (x, y).
inline double van_vleck_transport_residual(const MetricChart& c, const Vec4& x, const Vec4& y) {
    const auto w = world_function(c, x, y);
    const double ds = std::sqrt(van_vleck(w));
    Vec4 grad = Vec4::Zero();
    for (int n = 0; n < 4; ++n) {
        const double h = bitensor_step(c, n);
        for (int j = 0; j < 5; ++j) {
            if (j == 2) continue;
            Vec4 p = x;
            p(n) += (j - 2) * h;
            grad(n) += detail::kD1[j] / h * std::sqrt(van_vleck(world_function(solve_geodesic(c, p, y, false))));
        }
    }
    return std::abs(w.grad1.dot(grad) - 0.5 * (4.0 - box_sigma(c, x, y)) * ds);
}

/// Relative deviation of ∇^{(1)}_μ U(x,y), y = x + h·dir, from sign·(i/8) R_{αβμν} σ^ν Σ^{αβ} U.
/// sign = +1 matches the curvature convention used here; sign = -1 flips the curvature term.
/// Returns the largest relative residual over μ.
inline double spin_transport_derivative_check(const MetricChart& c, const Vec4& x, const Vec4& dir, double h,
                                              double sign = +1.0, const DiracRep& rep = dirac_rep()) {
    const Vec4 y = x + h * dir;
    const auto f = make_frame(c, x, y, rep);
    const auto cb = curvature_at(c, x);
    const auto tet = tetrad_at(c, x);
    const auto gam = gamma_at(tet, rep);
    const auto S = spin_connection_matrices(tet, rep);
    double worst = 0;
    for (int m = 0; m < 4; ++m) {
        const double d = 1e-2 * h;
        CMat4 dU = CMat4::Zero();
        for (int j = 0; j < 5; ++j) {
            if (j == 2) continue;
            Vec4 p = x;
            p(m) += (j - 2) * d;
            dU += detail::kD1[j] / d * spin_transport(solve_geodesic(c, p, y, false), rep);
        }
        const CMat4 lhs = dU + S[m] * f.U;
        CMat4 rhs = CMat4::Zero();
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                if (a == b) continue;
                double coef = 0;
                for (int n = 0; n < 4; ++n) coef += cb.riemann_lower(a, b, m, n) * f.wf.grad1(n);
                rhs += coef * sigma_munu(gam, a, b);
            }
        rhs = Complex(0, sign / 8) * rhs * f.U;
        const double scale = rhs.cwiseAbs().maxCoeff();
        if (scale > 0) worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

}  // namespace cfs
