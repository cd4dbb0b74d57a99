#pragma once

#include "cfs/symbols.hpp"
#include "cfs/worldfunc.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <functional>
#include <memory>
#include <optional>

namespace cfs {

/// Data and numerics of the regularizing scalar field.
struct RegFieldConfig {
    /// +1: f = g(∇σ,∇f) + (iε/2) g(∇f,∇f), giving f = y⁰ - x⁰ + iε/2 in Minkowski.
    /// -1: f = g(∇σ,∇f) - (iε/2) g(∇f,∇f), which keeps g(∇σ^ε,∇σ^ε) = 2σ^ε.
    int sign = +1;
    /// Cauchy surface Σ = {x⁰ = t_sigma}.
    double t_sigma = 0.0;
    /// Truncation order N.
    int order = 1;
    /// Largest |s| searched for the Σ crossing of the extended geodesic.
    double max_extension = 50.0;
    /// Finite-difference step: fraction of each axis width, capped by a fraction of the separation.
    double fd_scale = 1e-3;
    double fd_rel = 1e-2;
    /// First-order Σ data; defaults to sign·i/2.
    std::optional<Complex> alpha1;
    /// Use α⁽¹⁾ = sign·(i/2)·g^{00}(x_Σ), the value the order-1 ODE forces at coincidence.
    bool compatible_alpha = false;

    Complex alpha(int m) const {
        if (m != 1) return 0.0;
        return alpha1 ? *alpha1 : Complex(0, 0.5 * sign);
    }
    Complex alpha(int m, const MetricChart& c, const Vec4& x_sigma) const {
        if (m == 1 && compatible_alpha) return Complex(0, 0.5 * sign) * c.metric(x_sigma).inverse()(0, 0);
        return alpha(m);
    }
};

struct Crossing {
    double s = 0.0;
    PathPoint state;
};

/// Parameter s at which the (extended) geodesic meets Σ.
inline Crossing find_crossing(const Geodesic& g, const RegFieldConfig& cfg) {
    Crossing c;
    if (g.x(0) == cfg.t_sigma) {
        c.s = 0.0;
        c.state = {0.0, g.x, g.v0};
        return c;
    }
    if (g.y(0) == cfg.t_sigma) {
        c.s = 1.0;
        c.state = {1.0, g.y, g.v1};
        return c;
    }
    if (std::abs(g.v0(0)) < 1e-300) throw InitialDataError("geodesic parallel to the Cauchy surface");
    double s = (cfg.t_sigma - g.x(0)) / g.v0(0);
    PathPoint p;
    for (int it = 0; it < 50; ++it) {
        if (!(std::abs(s) <= cfg.max_extension)) throw InitialDataError("geodesic misses the Cauchy surface");
        p = g.state_at(s);
        if (!g.chart.contains(p.x)) throw InitialDataError("geodesic leaves the chart before reaching the Cauchy surface");
        const double r = p.x(0) - cfg.t_sigma;
        if (std::abs(r) < 1e-15 * (1 + std::abs(cfg.t_sigma))) break;
        if (std::abs(p.v(0)) < 1e-300) throw InitialDataError("geodesic tangent to the Cauchy surface");
        s -= r / p.v(0);
    }
    c.s = s;
    c.state = g.state_at(s);
    return c;
}

/// Order-by-order evaluation of the regularizing field f = Σ εⁿ f⁽ⁿ⁾ at pairs (x, y).
///
/// Order 0 is the Cauchy data f⁽⁰⁾ = β(γ̇(s_c)) = γ̇⁰(s_c), constant along the geodesic line.
/// Higher orders solve u F' - F = G in u = 1 - a along the geodesic with y fixed, anchored
/// at the Σ crossing u_c = 1 - s_c with value α⁽ⁿ⁾. Pairs with s_c ≥ 1 use f(x,y) = -conj f(y,x).
class RegFieldSolver {
public:
    RegFieldSolver(MetricChart chart, RegFieldConfig cfg) : chart_(std::move(chart)), cfg_(std::move(cfg)) {}

    const RegFieldConfig& config() const { return cfg_; }
    const MetricChart& chart() const { return chart_; }

    bool on_surface(const Vec4& x) const { return x(0) == cfg_.t_sigma; }

    Complex order_value(int m, const Vec4& x, const Vec4& y) const {
        if (x == y) throw DomainError("regularizing field is not defined on the diagonal");
        const auto g = solve_geodesic(chart_, x, y, false);
        const auto cr = find_crossing(g, cfg_);
        if (m == 0) return cr.state.v(0);
        if (cr.s >= 1.0) return -std::conj(order_value(m, y, x));
        const Complex a = cfg_.alpha(m, chart_, cr.state.x);
        if (cr.s == 0.0) return a;
        const double uc = 1.0 - cr.s;
        auto integrand = [&](double t) -> Complex {
            const Vec4 z = g.state_at(1.0 - t).x;
            return source(m, z, y) / (t * t);
        };
        Complex integral;
        if (std::abs(1.0 - uc) <= 0.02)
            integral = boost::math::quadrature::gauss<double, 3>::integrate(integrand, uc, 1.0);
        else
            integral = boost::math::quadrature::gauss<double, 8>::integrate(integrand, uc, 1.0);
        return a / uc + integral;
    }

    /// G_m = -sign (i/2) Σ_{k<m} g(∇f⁽ᵏ⁾, ∇f⁽ᵐ⁻¹⁻ᵏ⁾) at (z, y).
    Complex source(int m, const Vec4& z, const Vec4& y) const {
        const Mat4 ginv = chart_.metric(z).inverse();
        std::vector<CVec4> grads;
        for (int k = 0; k < m; ++k) grads.push_back(order_gradient(k, z, y));
        Complex s = 0.0;
        for (int k = 0; k < m; ++k) s += (grads[k].transpose() * ginv.cast<Complex>() * grads[m - 1 - k])(0);
        return -double(cfg_.sign) * Complex(0, 0.5) * s;
    }

    /// Lower-index gradient ∂_μ f⁽ᵐ⁾(x, y) in the first slot.
    CVec4 order_gradient(int m, const Vec4& x, const Vec4& y, int fd_order = 4) const {
        if (m >= 1 && on_surface(x)) {
            // x on Σ: f = α/u_c + ∫ G/t², u_c = 1 + δx⁰/v⁰ to first order
            const auto g = solve_geodesic(chart_, x, y, false);
            const Complex G = source(m, x, y);
            const Complex a = cfg_.alpha(m, chart_, x);
            CVec4 d = CVec4::Zero();
            // compatible data: no transverse variation, also for chords inside Σ
            if (std::abs(a + G) <= 1e-14 * (std::abs(a) + std::abs(G))) return d;
            d(0) = -(a + G) / g.v0(0);
            return d;
        }
        return fd_gradient([&](const Vec4& p) { return order_value(m, p, y); }, x, fd_order,
                           (y - x).cwiseAbs().maxCoeff());
    }

    /// Central-difference gradient of a complex function of the first slot.
    CVec4 fd_gradient(const std::function<Complex(const Vec4&)>& fn, const Vec4& x, int fd_order,
                      double sep) const {
        CVec4 d = CVec4::Zero();
        for (int k = 0; k < 4; ++k) {
            const double h = std::min(cfg_.fd_scale * chart_.domain[k].width(), cfg_.fd_rel * sep);
            Vec4 e = Vec4::Zero();
            e(k) = h;
            if (fd_order == 4)
                d(k) = (-fn(x + 2 * e) + 8.0 * fn(x + e) - 8.0 * fn(x - e) + fn(x - 2 * e)) / (12 * h);
            else
                d(k) = (fn(x + e) - fn(x - e)) / (2 * h);
        }
        return d;
    }

    /// χ_μ = -∂_μ Re f at given ε (lower index), fourth-order differences for f⁽⁰⁾.
    Vec4 chi(const Vec4& x, const Vec4& y, double eps) const {
        CVec4 d = order_gradient(0, x, y);
        double p = 1.0;
        for (int m = 1; m <= cfg_.order; ++m) {
            p *= eps;
            d += p * order_gradient(m, x, y);
        }
        return -d.real();
    }

private:
    MetricChart chart_;
    RegFieldConfig cfg_;
};

/// Regularizing field at one pair: values and first-slot gradients of each order.
struct RegField {
    Vec4 x, y;
    double eps = 0.0;
    int sign = +1;
    double s_cross = 0.0;
    std::vector<Complex> orders;
    /// grads[n]_μ = ∂_μ f⁽ⁿ⁾ (first slot, lower index)
    std::vector<CVec4> grads;
    /// χ_μ = -∂_μ Re f
    Vec4 chi;

    Complex value() const { return value(eps); }
    Complex value(double e) const {
        Complex s = 0.0, p = 1.0;
        for (const auto& f : orders) {
            s += p * f;
            p *= e;
        }
        return s;
    }
    CVec4 gradient() const { return gradient(eps); }
    CVec4 gradient(double e) const {
        CVec4 s = CVec4::Zero();
        Complex p = 1.0;
        for (const auto& d : grads) {
            s += p * d;
            p *= e;
        }
        return s;
    }
};

/// Limit y → x: f⁽⁰⁾ = 0, ∂f⁽⁰⁾ = -δ⁰, f⁽ᵐ⁾ = α⁽ᵐ⁾ with ∂f⁽ᵐ⁾ = 0.
/// Only for x on Σ (or a flat chart), and only when α⁽ᵐ⁾ + G_m = 0 so the Σ gradient stays finite.
inline RegField coincidence_regfield(const RegFieldSolver& solver, const Vec4& x, double eps) {
    const auto& cfg = solver.config();
    const auto& c = solver.chart();
    if (!(solver.on_surface(x) || c.name == "minkowski"))
        throw DomainError("coincidence limit of the regularizing field needs x on the Cauchy surface");
    RegField rf;
    rf.x = rf.y = x;
    rf.eps = eps;
    rf.sign = cfg.sign;
    rf.orders.push_back(0.0);
    rf.grads.push_back(-CVec4::Unit(0));
    const Mat4 ginv = c.metric(x).inverse();
    for (int m = 1; m <= cfg.order; ++m) {
        Complex G = 0.0;
        for (int k = 0; k < m; ++k) G += (rf.grads[k].transpose() * ginv.cast<Complex>() * rf.grads[m - 1 - k])(0);
        G *= -double(cfg.sign) * Complex(0, 0.5);
        const Complex a = cfg.alpha(m, c, x);
        if (std::abs(a + G) > 1e-12) throw SingularEndpointError("regularizing field gradient diverges at coincidence");
        rf.orders.push_back(a);
        rf.grads.push_back(CVec4::Zero());
    }
    rf.chi = Vec4::Unit(0);
    return rf;
}

inline RegField solve_regfield(const RegFieldSolver& solver, const Geodesic& g, double eps) {
    if (!(eps > 0)) throw DomainError("eps must be positive");
    RegField rf;
    rf.x = g.x;
    rf.y = g.y;
    rf.eps = eps;
    rf.sign = solver.config().sign;
    const int N = solver.config().order;
    if (N < 0 || N > 4) throw DomainError("regularizing field order must lie in [0, 4]");
    if (g.x == g.y) return coincidence_regfield(solver, g.x, eps);
    rf.s_cross = find_crossing(g, solver.config()).s;
    for (int m = 0; m <= N; ++m) {
        rf.orders.push_back(solver.order_value(m, g.x, g.y));
        rf.grads.push_back(solver.order_gradient(m, g.x, g.y));
    }
    rf.chi = -rf.grads[0].real();
    double p = 1.0;
    for (int m = 1; m <= N; ++m) {
        p *= eps;
        rf.chi -= p * rf.grads[m].real();
    }
    return rf;
}

inline RegField solve_regfield(const MetricChart& c, const RegFieldConfig& cfg, const Vec4& x, const Vec4& y,
                               double eps) {
    RegFieldSolver s(c, cfg);
    return solve_regfield(s, solve_geodesic(c, x, y, false), eps);
}

/// Residual of the nonlinear condition f - g(∇σ,∇f) - sign (iε/2) g(∇f,∇f) at the pair.
inline Complex nonlinear_residual(const RegField& rf, const WorldFunctionData& w, double eps) {
    const CVec4 df = rf.gradient(eps);
    const Mat4 ginv = w.g_x.inverse();
    const Complex gsf = (w.grad1.transpose().cast<Complex>() * df)(0);
    const Complex gff = (df.transpose() * ginv.cast<Complex>() * df)(0);
    return rf.value(eps) - gsf - double(rf.sign) * Complex(0, 0.5 * eps) * gff;
}

/// Solution of (s - a) f' - f = g with f(s0) = (s0 - a) c, by Gauss-Legendre quadrature.
inline std::function<Complex(double)> solve_order_ode(double a, double b, double s0, Complex c,
                                                      std::function<Complex(double)> g) {
    if (!(a < s0 && s0 < b)) throw DomainError("solve_order_ode requires a < s0 < b");
    return [=](double s) -> Complex {
        if (!(s > a && s < b)) throw SingularEndpointError("solve_order_ode evaluated outside (a, b)");
        auto h = [&](double t) { return g(t) / ((t - a) * (t - a)); };
        double err = 0;
        Complex I;
        if (s == s0)
            I = 0.0;
        else if (s > s0)
            I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(h, s0, s, 15, 1e-13, &err);
        else
            I = -boost::math::quadrature::gauss_kronrod<double, 31>::integrate(h, s, s0, 15, 1e-13, &err);
        if (!(err <= 1e-9 * std::max(1.0, std::abs(I))))
            throw SingularEndpointError("quadrature did not converge near the singular endpoint");
        return (s - a) * (c + I);
    };
}

struct TemporalRadial {
    double t = 0.0;
    double r = 0.0;
    Vec4 chi;
};

/// t = σ^μ χ_μ, r = sqrt(t² - 2σ χ_μχ^μ).
inline TemporalRadial temporal_radial(const WorldFunctionData& w, const Vec4& chi) {
    TemporalRadial tr;
    tr.chi = chi;
    tr.t = w.grad1.dot(chi);
    const double chi2 = chi.dot(w.g_x.inverse() * chi);
    const double r2 = tr.t * tr.t - 2 * w.sigma * chi2;
    const double scale = std::max({tr.t * tr.t, std::abs(2 * w.sigma * chi2), 1e-300});
    if (r2 < -1e-9 * scale) throw RegularizationError("negative radial radicand: invalid regularizing field");
    tr.r = std::sqrt(std::max(r2, 0.0));
    return tr;
}

/// ξ_μ = -∂_μσ + iε ∂_μ f (lower index).
inline CVec4 regularized_xi(const WorldFunctionData& w, const RegField& rf, double eps) {
    return -(w.g_x * w.grad1).cast<Complex>() + Complex(0, eps) * rf.gradient(eps);
}

/// c_{μν} = (1/2i)(ξ_μ ξ̄_ν - ξ_ν ξ̄_μ) = Im(ξ_μ ξ̄_ν), lower indices.
inline Mat4 c_exact(const CVec4& xi) {
    Mat4 c;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) c(m, n) = (xi(m) * std::conj(xi(n))).imag();
    return c;
}

/// Leading-order form c_{μν} = ε(σ_ν χ_μ - σ_μ χ_ν).
inline Mat4 c_truncated(const WorldFunctionData& w, const Vec4& chi, double eps) {
    const Vec4 s = w.g_x * w.grad1;
    return eps * (chi * s.transpose() - s * chi.transpose());
}

/// c_{μν} c^{μν} with indices raised by g_x.
inline double c_contract(const Mat4& c, const Mat4& g) {
    const Mat4 gi = g.inverse();
    return (c.cwiseProduct(gi * c * gi)).sum();
}

inline TemporalRadial temporal_radial(const WorldFunctionData& w, const RegField& rf) {
    return temporal_radial(w, rf.chi);
}

/// c_{μν}c^{μν} + 2ε²r² with the leading-order c; vanishes identically up to rounding.
inline double check_cc_nonpositive(const WorldFunctionData& w, const RegField& rf, double eps) {
    const auto tr = temporal_radial(w, rf.chi);
    return c_contract(c_truncated(w, rf.chi, eps), w.g_x) + 2 * eps * eps * tr.r * tr.r;
}

/// Same with c built from the full regularized ξ.
inline double check_cc_exact(const WorldFunctionData& w, const RegField& rf, double eps) {
    const auto tr = temporal_radial(w, rf.chi);
    return c_contract(c_exact(regularized_xi(w, rf, eps)), w.g_x) + 2 * eps * eps * tr.r * tr.r;
}

/// σ^ε(·, y) = σ - iε Σ εⁿ f⁽ⁿ⁾ from the hierarchy, for the symbol identity checks.
inline SymbolContext regfield_context(const MetricChart& c, const RegFieldConfig& cfg, const Vec4& y, double m,
                                      double eps) {
    auto solver = std::make_shared<RegFieldSolver>(c, cfg);
    SymbolContext ctx;
    ctx.chart = c;
    ctx.m = m;
    ctx.eps = eps;
    ctx.sig_eps = [solver, y, eps](const Vec4& x) {
        Complex f = 0.0, p = 1.0;
        for (int n = 0; n <= solver->config().order; ++n, p *= eps) f += p * solver->order_value(n, x, y);
        return world_function(solver->chart(), x, y).sigma - Complex(0, eps) * f;
    };
    ctx.grad_sig_eps = [solver, y, eps](const Vec4& x) {
        const auto w = world_function(solver->chart(), x, y);
        CVec4 d = (w.g_x * w.grad1).cast<Complex>();
        Complex p = 1.0;
        for (int n = 0; n <= solver->config().order; ++n, p *= eps)
            d -= Complex(0, eps) * p * solver->order_gradient(n, x, y);
        return d;
    };
    return ctx;
}

}  // namespace cfs
