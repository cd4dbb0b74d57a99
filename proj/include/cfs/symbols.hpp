#pragma once

#include "cfs/bessel.hpp"
#include "cfs/geometry.hpp"

#include <cmath>
#include <functional>

namespace cfs {

/// A regularized light-cone symbol T^(n) with its ν-grading.
struct SymbolValue {
    int n = 0;
    Complex value;
    double nu = 0.0;
    double degree = 0.0;
};

inline double symbol_nu(int n) { return 1.0 - n; }

/// σ^ε = σ - iεf.
inline Complex sigma_eps(double sigma, Complex f, double eps) {
    if (!(eps > 0)) throw DomainError("eps must be positive");
    const Complex s = sigma - Complex(0, eps) * f;
    if (s == Complex(0.0, 0.0)) throw RegularizationError("regularized interval vanishes");
    return s;
}

/// z^ε = m sqrt(-2σ^ε), principal root; a signed zero imaginary part is normalized to +0.
inline Complex symbol_argument(Complex sig_eps, double m) {
    Complex w = -2.0 * sig_eps;
    if (w.imag() == 0.0) w = Complex(w.real(), 0.0);
    return m * std::sqrt(w);
}

/// T^(n) = -((-2m²)^ν / 16π³) K_ν(z)/z^ν with ν = 1 - n, z = m sqrt(-2σ^ε).
inline SymbolValue t_symbol(int n, Complex sig_eps, double m) {
    if (!(m > 0)) throw DomainError("mass must be positive");
    if (n < -4 || n > 4) throw DomainError("symbol order outside [-4, 4]");
    const double pi = std::acos(-1.0);
    const int nu = 1 - n;
    const Complex z = symbol_argument(sig_eps, m);
    const double pref = std::pow(-2.0 * m * m, nu) / (16 * pi * pi * pi);
    SymbolValue t;
    t.n = n;
    t.nu = nu;
    t.degree = nu;
    t.value = -pref * bessel_k(nu, z) * std::pow(z, -nu);
    return t;
}

inline Complex t_value(int n, Complex sig_eps, double m) { return t_symbol(n, sig_eps, m).value; }

/// Relative residual of -(σ^ε/2) T^(n-1) = (n + 1 - d/2) T^(n) + m² T^(n+1), d = 4.
inline double check_t_recurrence(int n, Complex sig_eps, double m) {
    const Complex lhs = -0.5 * sig_eps * t_value(n - 1, sig_eps, m);
    const Complex rhs = double(n - 1) * t_value(n, sig_eps, m) + m * m * t_value(n + 1, sig_eps, m);
    const double scale = std::max({std::abs(lhs), std::abs(double(n - 1) * t_value(n, sig_eps, m)),
                                   std::abs(m * m * t_value(n + 1, sig_eps, m))});
    return std::abs(lhs - rhs) / scale;
}


/// σ^ε(·, y) as a function of the first slot, with its gradient, for identity checks.
struct SymbolContext {
    MetricChart chart;
    double m = 1.0;
    double eps = 0.05;
    std::function<Complex(const Vec4&)> sig_eps;
    /// ∂_μ σ^ε, lower index
    std::function<CVec4(const Vec4&)> grad_sig_eps;
};

/// Minkowski with f = y⁰ - x⁰ + sign·iε/2.
inline SymbolContext minkowski_context(const Vec4& y, double m, double eps, int sign = -1) {
    SymbolContext c;
    c.chart = minkowski();
    c.m = m;
    c.eps = eps;
    c.sig_eps = [=](const Vec4& x) {
        const Vec4 xi = y - x;
        const Complex f = xi(0) + Complex(0, 0.5 * sign * eps);
        return 0.5 * minkowski_dot(xi, xi) - Complex(0, eps) * f;
    };
    c.grad_sig_eps = [=](const Vec4& x) {
        CVec4 d = (-(eta() * (y - x))).cast<Complex>();
        d(0) += Complex(0, eps);
        return d;
    };
    return c;
}

/// Relative residual of ∂_μ T⁽ⁿ⁾ = -(∂_μσ^ε/2) T⁽ⁿ⁻¹⁾ with central differences of step h.
inline double check_t_derivative(int n, const SymbolContext& c, const Vec4& x, double h) {
    const Complex s0 = c.sig_eps(x);
    const CVec4 ds = c.grad_sig_eps(x);
    const Complex tm = t_value(n - 1, s0, c.m);
    double num = 0, den = 0;
    for (int k = 0; k < 4; ++k) {
        Vec4 e = Vec4::Zero();
        e(k) = h;
        const Complex fd = (t_value(n, c.sig_eps(x + e), c.m) - t_value(n, c.sig_eps(x - e), c.m)) / (2 * h);
        const Complex ex = -0.5 * ds(k) * tm;
        num = std::max(num, std::abs(fd - ex));
        den = std::max(den, std::abs(ex));
    }
    return num / den;
}

namespace detail {

/// Coordinate d'Alembertian g^{μν}(∂_μ∂_ν φ - Γ^λ_{μν} ∂_λ φ) by second-order differences.
inline Complex fd_box(const std::function<Complex(const Vec4&)>& phi, const MetricChart& c, const Vec4& x,
                      double h) {
    const Mat4 gi = c.metric(x).inverse();
    const auto G = christoffel(c, x);
    const Complex p0 = phi(x);
    CVec4 d1;
    CMat4 d2;
    std::array<Complex, 4> pp, pm;
    for (int k = 0; k < 4; ++k) {
        Vec4 e = Vec4::Zero();
        e(k) = h;
        pp[k] = phi(x + e);
        pm[k] = phi(x - e);
        d1(k) = (pp[k] - pm[k]) / (2 * h);
        d2(k, k) = (pp[k] - 2.0 * p0 + pm[k]) / (h * h);
    }
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            d2(a, b) = d2(b, a) = 0.0;
            if (gi(a, b) == 0.0) continue;
            Vec4 ea = Vec4::Zero(), eb = Vec4::Zero();
            ea(a) = h;
            eb(b) = h;
            d2(a, b) = d2(b, a) =
                (phi(x + ea + eb) - phi(x + ea - eb) - phi(x - ea + eb) + phi(x - ea - eb)) / (4 * h * h);
        }
    Complex box = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            if (gi(a, b) == 0.0) continue;
            Complex v = d2(a, b);
            for (int l = 0; l < 4; ++l) v -= G[l](a, b) * d1(l);
            box += gi(a, b) * v;
        }
    return box;
}

}  // namespace detail

/// Relative residual of (-□ - m²) T⁽ⁿ⁾ = (n + (□σ^ε - 4)/2) T⁽ⁿ⁻¹⁾, □ by differences of step h.
inline double check_t_kleingordon(int n, const SymbolContext& c, const Vec4& x, double h) {
    std::vector<std::pair<Vec4, Complex>> cache;
    auto se = [&](const Vec4& p) {
        for (const auto& [q, v] : cache)
            if (q == p) return v;
        cache.emplace_back(p, c.sig_eps(p));
        return cache.back().second;
    };
    const Complex s0 = se(x);
    const Complex boxT = detail::fd_box([&](const Vec4& p) { return t_value(n, se(p), c.m); }, c.chart, x, h);
    const Complex boxS = detail::fd_box(se, c.chart, x, h);
    const Complex T = t_value(n, s0, c.m);
    const Complex lhs = -boxT - c.m * c.m * T;
    const Complex rhs = (double(n) + 0.5 * (boxS - 4.0)) * t_value(n - 1, s0, c.m);
    const double scale = std::max({std::abs(boxT), c.m * c.m * std::abs(T), std::abs(rhs)});
    return std::abs(lhs - rhs) / scale;
}

}  // namespace cfs
