#pragma once

#include "cfs/geometry.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <vector>

namespace cfs {

namespace ode {

namespace odeint = boost::numeric::odeint;

inline constexpr double kAbsTol = 1e-14;
inline constexpr double kRelTol = 1e-13;

/// Adaptive 8th-order integration of y' = f(s, y) from s0 to s1 (either direction).
/// The observer, if given, sees every accepted step.
template <class State, class Rhs, class Obs>
void integrate(Rhs&& rhs, State& y, double s0, double s1, Obs&& obs, double abs_tol = kAbsTol,
               double rel_tol = kRelTol) {
    if (s0 == s1) {
        obs(y, s0);
        return;
    }
    auto stepper = odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_fehlberg78<State>());
    const double dt = (s1 - s0) / 8.0;
    auto sys = [&](const State& x, State& dx, double s) { rhs(x, dx, s); };
    odeint::integrate_adaptive(stepper, sys, y, s0, s1, dt, obs);
}

template <class State, class Rhs>
void integrate(Rhs&& rhs, State& y, double s0, double s1, double abs_tol = kAbsTol, double rel_tol = kRelTol) {
    integrate(rhs, y, s0, s1, [](const State&, double) {}, abs_tol, rel_tol);
}

}  // namespace ode

/// Γ and its first derivatives dgam[λ][ρ](μ,ν) = ∂_λ Γ^ρ_{μν} (central differences).
inline std::pair<Array3, std::array<Array3, 4>> christoffel_with_derivs(const MetricChart& c, const Vec4& p) {
    std::pair<Array3, std::array<Array3, 4>> out;
    out.first = christoffel(c, p);
    for (int l = 0; l < 4; ++l) {
        const double h = 0.1 * c.curv_step(l);
        Vec4 e = Vec4::Zero();
        e(l) = h;
        const Array3 gp = christoffel(c, p + e), gm = christoffel(c, p - e);
        for (int r = 0; r < 4; ++r) out.second[l][r] = (gp[r] - gm[r]) / (2 * h);
    }
    return out;
}

inline Vec4 geodesic_accel(const Array3& G, const Vec4& v) {
    Vec4 a;
    for (int r = 0; r < 4; ++r) a(r) = -v.dot(G[r] * v);
    return a;
}

struct PathPoint {
    double s = 0.0;
    Vec4 x;
    Vec4 v;
};

/// Affinely parametrized geodesic γ: [0,1] → M with γ(0) = x, γ(1) = y.
struct Geodesic {
    MetricChart chart;
    Vec4 x, y;
    Vec4 v0, v1;
    /// jacobi(μ, ν) = ∂γ^μ(1)/∂v0^ν at fixed x
    Mat4 jacobi = Mat4::Identity();
    std::vector<PathPoint> path;
    bool affine = true;

    /// Position and velocity at affine parameter s (s outside [0,1] extends the geodesic).
    PathPoint state_at(double s) const;
    /// States at several parameters, in the order given.
    std::vector<PathPoint> sample(const std::vector<double>& s) const;
};

namespace detail {

using GeoState = std::array<double, 8>;

inline void geodesic_rhs(const MetricChart& c, const GeoState& y, GeoState& dy) {
    const Vec4 x(y[0], y[1], y[2], y[3]), v(y[4], y[5], y[6], y[7]);
    const Vec4 a = geodesic_accel(christoffel(c, x), v);
    for (int k = 0; k < 4; ++k) {
        dy[k] = v(k);
        dy[4 + k] = a(k);
    }
}

inline GeoState pack(const Vec4& x, const Vec4& v) {
    return {x(0), x(1), x(2), x(3), v(0), v(1), v(2), v(3)};
}

inline PathPoint unpack(double s, const GeoState& y) {
    return {s, Vec4(y[0], y[1], y[2], y[3]), Vec4(y[4], y[5], y[6], y[7])};
}

/// Geodesic plus Jacobi fields J = ∂x/∂v0, K = ∂v/∂v0, state size 40.
using JacState = std::array<double, 40>;

inline void jacobi_rhs(const MetricChart& c, const JacState& y, JacState& dy) {
    const Vec4 x(y[0], y[1], y[2], y[3]), v(y[4], y[5], y[6], y[7]);
    const auto [G, dG] = christoffel_with_derivs(c, x);
    const Vec4 a = geodesic_accel(G, v);
    for (int k = 0; k < 4; ++k) {
        dy[k] = v(k);
        dy[4 + k] = a(k);
    }
    Eigen::Map<const Mat4> J(&y[8]), K(&y[24]);
    Eigen::Map<Mat4> dJ(&dy[8]), dK(&dy[24]);
    dJ = K;
    // δa^ρ = -∂_λΓ^ρ_{μν} v^μ v^ν δx^λ - 2 Γ^ρ_{μν} v^μ δv^ν
    Mat4 A, B;
    for (int r = 0; r < 4; ++r) {
        for (int l = 0; l < 4; ++l) A(r, l) = -v.dot(dG[l][r] * v);
        B.row(r) = -2.0 * (G[r] * v).transpose();
    }
    dK = A * J + B * K;
}

}  // namespace detail

/// Integrates the geodesic through (x, v) at s = 0 up to parameter s.
inline PathPoint shoot(const MetricChart& c, const Vec4& x, const Vec4& v, double s,
                       std::vector<PathPoint>* path = nullptr) {
    auto y = detail::pack(x, v);
    ode::integrate(
        [&](const detail::GeoState& a, detail::GeoState& da, double) { detail::geodesic_rhs(c, a, da); }, y, 0.0, s,
        [&](const detail::GeoState& a, double t) {
            if (path) path->push_back(detail::unpack(t, a));
        });
    return detail::unpack(s, y);
}

inline PathPoint Geodesic::state_at(double s) const {
    if (path.empty()) throw GeometryError("geodesic has no stored path");
    if (x == y && v0.isZero()) return {s, x, Vec4::Zero()};
    auto it = std::lower_bound(path.begin(), path.end(), s, [](const PathPoint& p, double t) { return p.s < t; });
    const PathPoint* base;
    if (it == path.end())
        base = &path.back();
    else if (it == path.begin())
        base = &path.front();
    else
        base = (s - std::prev(it)->s < it->s - s) ? &*std::prev(it) : &*it;
    if (base->s == s) return *base;
    PathPoint p = shoot(chart, base->x, base->v, s - base->s);
    p.s = s;
    return p;
}

inline std::vector<PathPoint> Geodesic::sample(const std::vector<double>& s) const {
    std::vector<PathPoint> out;
    out.reserve(s.size());
    for (double t : s) out.push_back(state_at(t));
    return out;
}

/// Integrates geodesic and Jacobi fields to s = 1.
inline void shoot_with_jacobi(const MetricChart& c, const Vec4& x, const Vec4& v, Vec4& x1, Vec4& v1, Mat4& J,
                              std::vector<PathPoint>* path = nullptr) {
    detail::JacState y{};
    for (int k = 0; k < 4; ++k) {
        y[k] = x(k);
        y[4 + k] = v(k);
    }
    Eigen::Map<Mat4>(&y[8]).setZero();
    Eigen::Map<Mat4>(&y[24]).setIdentity();
    ode::integrate([&](const detail::JacState& a, detail::JacState& da, double) { detail::jacobi_rhs(c, a, da); },
                   y, 0.0, 1.0, [&](const detail::JacState& a, double t) {
                       if (path)
                           path->push_back({t, Vec4(a[0], a[1], a[2], a[3]), Vec4(a[4], a[5], a[6], a[7])});
                   });
    x1 = Vec4(y[0], y[1], y[2], y[3]);
    v1 = Vec4(y[4], y[5], y[6], y[7]);
    J = Eigen::Map<const Mat4>(&y[8]);
}

/// Geodesic two-point problem by Newton shooting on the initial velocity,
/// started from the straight coordinate line.
inline Geodesic solve_geodesic(const MetricChart& c, const Vec4& x, const Vec4& y, bool check_radius = true) {
    c.require_interior(x, 0.0);
    c.require_interior(y, 0.0);
    if (check_radius && (y - x).norm() > c.normal_radius * (1 + 1e-9))
        throw DomainError("separation exceeds the normal-neighborhood radius");
    Geodesic g;
    g.chart = c;
    g.x = x;
    g.y = y;
    if (x == y) {
        g.v0 = g.v1 = Vec4::Zero();
        g.path = {{0.0, x, Vec4::Zero()}, {1.0, x, Vec4::Zero()}};
        return g;
    }
    Vec4 v = y - x, x1, v1;
    Mat4 J;
    const double tol = 1e-13 * (1.0 + y.cwiseAbs().maxCoeff());
    double res = 0;
    int it = 0;
    for (; it < 40; ++it) {
        shoot_with_jacobi(c, x, v, x1, v1, J);
        const Vec4 r = x1 - y;
        res = r.cwiseAbs().maxCoeff();
        if (res < tol) break;
        const Vec4 dv = J.partialPivLu().solve(-r);
        // damped step if the full step increases the miss distance
        double lam = 1.0;
        for (int k = 0; k < 8; ++k) {
            const Vec4 trial = shoot(c, x, v + lam * dv, 1.0).x;
            if ((trial - y).cwiseAbs().maxCoeff() < res || k == 7) break;
            lam *= 0.5;
        }
        v += lam * dv;
    }
    if (!(res < tol) && !(res < 1e-11 * (1.0 + y.cwiseAbs().maxCoeff())))
        throw ConvergenceError("no unique geodesic in tolerance; shrink the separation");
    std::vector<PathPoint> path;
    shoot_with_jacobi(c, x, v, x1, v1, J, &path);
    g.v0 = v;
    g.v1 = v1;
    g.jacobi = J;
    g.path = std::move(path);
    g.path.front().s = 0.0;
    g.path.back().s = 1.0;
    return g;
}

struct WorldFunctionData {
    Vec4 x, y;
    double sigma = 0.0;
    /// σ^μ at x
    Vec4 grad1;
    /// σ^{μ'} at y
    Vec4 grad2;
    /// transport(ν', μ) = Λ_{y,x}: T_xM → T_yM
    Mat4 transport = Mat4::Identity();
    Mat4 g_x, g_y;
};

/// σ = ½ g(γ̇,γ̇), gradients from endpoint velocities and Λ^{ν'}_μ = -σ^{ν'}_μ.
inline WorldFunctionData world_function(const Geodesic& g) {
    WorldFunctionData w;
    w.x = g.x;
    w.y = g.y;
    w.g_x = g.chart.metric(g.x);
    w.g_y = g.chart.metric(g.y);
    w.sigma = 0.5 * g.v0.dot(w.g_x * g.v0);
    w.grad1 = -g.v0;
    w.grad2 = g.v1;
    // σ_{μα'} = -(g_x J^{-1})_{μα'}
    w.transport = w.g_y.inverse() * g.jacobi.inverse().transpose() * w.g_x;
    return w;
}

inline WorldFunctionData world_function(const MetricChart& c, const Vec4& x, const Vec4& y) {
    return world_function(solve_geodesic(c, x, y));
}

/// Relative spread of g(γ̇,γ̇) over the stored path nodes.
inline double speed_constancy_residual(const Geodesic& g) {
    double lo = 1e300, hi = -1e300, scale = 0;
    for (const auto& p : g.path) {
        const double n = p.v.dot(g.chart.metric(p.x) * p.v);
        lo = std::min(lo, n);
        hi = std::max(hi, n);
        scale = std::max(scale, p.v.squaredNorm());
    }
    return scale > 0 ? (hi - lo) / std::max(std::abs(hi), scale * 1e-3) : 0.0;
}

/// max of |2σ - g_x(σ^μ,σ^μ)| and |2σ - g_y(σ^{μ'},σ^{μ'})| relative to the velocity scale.
inline double check_fundamental_identity(const WorldFunctionData& w) {
    const double a = std::abs(2 * w.sigma - w.grad1.dot(w.g_x * w.grad1));
    const double b = std::abs(2 * w.sigma - w.grad2.dot(w.g_y * w.grad2));
    const double scale = std::max({std::abs(2 * w.sigma), w.grad1.dot(w.grad1) * 1e-2, 1e-300});
    return std::max(a, b) / scale;
}

/// |Λ σ^μ + σ^{μ'}|_∞ / |σ^{μ'}|_∞.
inline double eikonal_residual(const WorldFunctionData& w) {
    const double s = w.grad2.cwiseAbs().maxCoeff();
    if (s == 0) return 0.0;
    return (w.transport * w.grad1 + w.grad2).cwiseAbs().maxCoeff() / s;
}

/// Lower-index gradients ∂_μσ and ∂_{μ'}σ by central differences of re-solved σ.
inline std::pair<Vec4, Vec4> sigma_gradient_fd(const MetricChart& c, const Vec4& x, const Vec4& y, double h) {
    Vec4 d1, d2;
    for (int k = 0; k < 4; ++k) {
        Vec4 e = Vec4::Zero();
        e(k) = h;
        d1(k) = (world_function(solve_geodesic(c, x + e, y, false)).sigma -
                 world_function(solve_geodesic(c, x - e, y, false)).sigma) /
                (2 * h);
        d2(k) = (world_function(solve_geodesic(c, x, y + e, false)).sigma -
                 world_function(solve_geodesic(c, x, y - e, false)).sigma) /
                (2 * h);
    }
    return {d1, d2};
}

}  // namespace cfs
