#pragma once

#include "cfs/action.hpp"
#include "cfs/sdw.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

namespace cfs::verify {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

/// Least-squares log-log slope.
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& r) {
    const double n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < h.size(); ++i) {
        const double a = std::log(h[i]), b = std::log(r[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace detail {

inline std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

inline Vec4 random_offset(std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> n(0, 1);
    Vec4 v(n(rng), n(rng), n(rng), n(rng));
    std::uniform_real_distribution<double> u(0.2, 1.0);
    return v.normalized() * scale * u(rng);
}

struct Pair {
    BiTensorFrame f;
    RegField rf;
};

inline Pair make_pair(const RegFieldSolver& s, const Vec4& x, const Vec4& y, double eps) {
    const auto g = solve_geodesic(s.chart(), x, y, false);
    return {make_frame(g), solve_regfield(s, g, eps)};
}

inline double maxabs(const SpinMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline RegFieldConfig lower_sign() {
    RegFieldConfig cfg;
    cfg.sign = -1;
    return cfg;
}

}  // namespace detail

// 1. Minkowski closed forms
inline CheckResult flat_closed_forms() {
    const double tol = 1e-10;
    const auto c = minkowski();
    std::mt19937_64 rng(101);
    double es = 0, ed = 0, eu = 0;
    for (int i = 0; i < 100; ++i) {
        const Vec4 x = detail::random_offset(rng, 0.45), y = x + detail::random_offset(rng, 0.5);
        const auto f = make_frame(c, x, y);
        es = std::max(es, std::abs(f.wf.sigma - 0.5 * minkowski_dot(y - x, y - x)));
        ed = std::max(ed, std::abs(f.delta - 1.0));
        eu = std::max(eu, detail::maxabs(f.U - SpinMatrix::Identity()));
    }
    CheckResult r;
    r.pass = std::max({es, ed, eu}) < tol;
    r.detail = detail::fmt("sigma %.2e  delta %.2e  U %.2e (tol %.0e)", es, ed, eu, tol);
    return r;
}

// 2. fundamental identity and eikonal on de Sitter and Schwarzschild
inline CheckResult bitensor_identities() {
    const double tol = 1e-6;
    CheckResult r;
    r.pass = true;
    std::mt19937_64 rng(202);
    for (const char* name : {"desitter", "schwarzschild"}) {
        const auto c = make_chart(name);
        const Vec4 p = reference_point(c);
        double fi = 0, ek = 0;
        for (int i = 0; i < 100; ++i) {
            const Vec4 x = p + detail::random_offset(rng, 0.05), y = x + detail::random_offset(rng, c.normal_radius);
            const auto w = world_function(c, x, y);
            fi = std::max(fi, check_fundamental_identity(w));
            ek = std::max(ek, eikonal_residual(w));
        }
        r.pass = r.pass && fi < tol && ek < tol;
        r.detail += detail::fmt("%s: identity %.2e eikonal %.2e; ", name, fi, ek);
    }
    r.detail += detail::fmt("tol %.0e", tol);
    return r;
}

inline double van_vleck_remainder_slope(const MetricChart& c, const std::vector<double>& s) {
    const Vec4 dir = Vec4(1, 0.3, 0.2, -0.1).normalized();
    const Vec4 x = reference_point(c);
    const auto cb = curvature_at(c, x);
    std::vector<double> r;
    for (double h : s) {
        const auto w = world_function(c, x, x + h * dir);
        r.push_back(std::abs(std::sqrt(van_vleck(w)) - 1 - w.grad1.dot(cb.ricci * w.grad1) / 12));
    }
    return loglog_slope(s, r);
}

// 3. Δ^{1/2} - 1 - R_{μν}σ^μσ^ν/12 on de Sitter
inline CheckResult van_vleck_expansion() {
    const double target = 3.0, tol = 0.3;
    const std::vector<double> s{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    const double k = van_vleck_remainder_slope(de_sitter(), s);
    const double kf = van_vleck_remainder_slope(make_chart("flrw"), s);
    CheckResult r;
    r.pass = std::abs(k - target) <= tol;
    r.detail = detail::fmt("de Sitter slope %.3f (want %.1f +- %.1f); flrw slope %.3f", k, target, tol, kf);
    return r;
}

// 4. T-symbol recurrence, derivative and Klein-Gordon identities
inline CheckResult symbol_identities() {
    const double rec_tol = 1e-12, order = 2.0, order_tol = 0.3;
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(-2, 2), um(0.2, 3);
    std::uniform_int_distribution<int> un(-3, 3);
    double rec = 0;
    for (int i = 0; i < 1000; ++i) rec = std::max(rec, check_t_recurrence(un(rng), Complex(u(rng), u(rng)), um(rng)));
    const std::vector<double> hs{8e-3, 4e-3, 2e-3, 1e-3};
    double worst = 0;
    auto fit = [&](const SymbolContext& ctx, int n, const Vec4& x, const std::vector<double>& h) {
        std::vector<double> rd, rk;
        for (double t : h) {
            rd.push_back(check_t_derivative(n, ctx, x, t));
            rk.push_back(check_t_kleingordon(n, ctx, x, t));
        }
        worst = std::max({worst, std::abs(loglog_slope(h, rd) - order), std::abs(loglog_slope(h, rk) - order)});
    };
    const Vec4 x(0, 0.1, 0, 0), y(0.25, 0.2, 0.1, -0.05);
    for (double m : {1.0, 2.0})
        for (int n : {0, 1}) fit(minkowski_context(y, m, 0.05, -1), n, x, hs);
    fit(regfield_context(de_sitter(), detail::lower_sign(), Vec4(0.08, 0.05, 0.02, -0.01), 1.0, 0.01), 0,
        Vec4(0, 0.02, 0, 0), {4e-3, 2e-3, 1e-3});
    CheckResult r;
    r.pass = rec < rec_tol && worst <= order_tol;
    r.detail = detail::fmt("recurrence %.2e (tol %.0e); max |slope-2| %.3f (tol %.1f)", rec, rec_tol, worst,
                           order_tol);
    return r;
}

// 5. SDW coincidence limits and first order in V
inline CheckResult sdw_checks() {
    const double coin_tol = 1e-4, floor_tol = 1e-6, oracle_tol = 1e-6;
    CheckResult r;
    double coin = 0;
    for (const char* name : {"desitter", "flrw"}) {
        const auto c = make_chart(name);
        SDWSolver s(c, nullptr);
        const Vec4 x = reference_point(c);
        const double R = curvature_at(c, x).scalar;
        coin = std::max(coin, detail::maxabs(s.coefficient(1, x, x) + R / 12 * SpinMatrix::Identity()));
    }
    const Vec4 x(0.15, 0.1, -0.05, 0.04), y(0.02, -0.04, 0.05, -0.02);
    const auto free = sdw_coefficients(SDWSolver(minkowski(), zero_potential()), x, y, 2);
    const double fl = std::max(detail::maxabs(free.coeffs[1]), detail::maxabs(free.coeffs[2]));
    // sympy series for V = 0.3 + 0.2t - 0.1X + 0.5t² - 0.2X² + 0.1tY + 0.3Z²
    const double a1 = -0.317821666666666666666666666667, a2 = -0.133333333333333333333333333333;
    SDWConfig cfg;
    cfg.linear_in_potential = true;
    SDWSolver sv(minkowski(),
                 scalar_potential([](const Vec4& p) {
                     const double t = p(0), X = p(1), Y = p(2), Z = p(3);
                     return 0.3 + 0.2 * t - 0.1 * X + 0.5 * t * t - 0.2 * X * X + 0.1 * t * Y + 0.3 * Z * Z;
                 }),
                 cfg);
    const auto q = sdw_coefficients(sv, x, y, 2);
    const double orc = std::max(std::abs(q.coeffs[1](0, 0) - a1), std::abs(q.coeffs[2](0, 0) - a2));
    r.pass = coin < coin_tol && fl < floor_tol && orc < oracle_tol;
    r.detail = detail::fmt("a1+R/12 %.2e (tol %.0e); free a1,a2 %.2e (tol %.0e); quadratic V %.2e (tol %.0e)", coin,
                           coin_tol, fl, floor_tol, orc, oracle_tol);
    return r;
}

// 6. regularizing field hierarchy
inline CheckResult regfield_checks() {
    const double val_tol = 1e-10, trunc_tol = 1e-12, slope_tol = 0.3;
    CheckResult r;
    RegFieldConfig cfg;
    cfg.order = 2;
    const Vec4 x(0, 0.1, -0.2, 0.05), y = x + Vec4(0.3, -0.1, 0.05, 0.2);
    const auto rf = solve_regfield(minkowski(), cfg, x, y, 0.01);
    const double ev = std::max(std::abs(rf.orders[0] - (y(0) - x(0))), std::abs(rf.orders[1] - Complex(0, 0.5)));
    const double et = std::abs(rf.orders[2]);
    r.pass = ev < val_tol && et < trunc_tol;
    r.detail = detail::fmt("minkowski f %.2e (tol %.0e), order 2 %.2e (tol %.0e); slopes", ev, val_tol, et, trunc_tol);
    RegFieldConfig c1;
    const double want = c1.order + 1;
    for (const char* name : {"desitter", "flrw", "schwarzschild"}) {
        const auto c = make_chart(name);
        RegFieldSolver s(c, c1);
        Vec4 p = reference_point(c);
        p(0) = 0;
        const auto g = solve_geodesic(c, p, p + Vec4(0.09, 0.03, -0.02, 0.01));
        const auto w = world_function(g);
        const auto f = solve_regfield(s, g, 0.01);
        std::vector<double> e, res;
        for (double eps : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
            e.push_back(eps);
            res.push_back(std::abs(nonlinear_residual(f, w, eps)));
        }
        const double k = loglog_slope(e, res);
        r.pass = r.pass && std::abs(k - want) <= slope_tol;
        r.detail += detail::fmt(" %s %.3f", name, k);
    }
    r.detail += detail::fmt(" (want %.0f +- %.1f)", want, slope_tol);
    return r;
}

// 7. c·c + 2ε²r² = O(ε³)
inline CheckResult cc_bound(int pairs = 1000) {
    const double target = 3.0, tol = 0.3;
    const std::vector<double> eps{1e-2, 3e-2, 1e-1};
    CheckResult r;
    r.pass = true;
    for (const char* name : {"desitter", "flrw", "schwarzschild"}) {
        const auto c = make_chart(name);
        RegFieldSolver s(c, RegFieldConfig{});
        double K = 0, lead = 0;
        std::vector<double> slopes;
        for (const auto& [x, y] : sample_pairs(c, pairs, 707)) {
            const auto g = solve_geodesic(c, x, y, false);
            const auto w = world_function(g);
            const auto f = solve_regfield(s, g, eps[0]);
            std::vector<double> v;
            for (double e : eps) {
                v.push_back(std::abs(check_cc_exact(w, f, e)));
                K = std::max(K, v.back() / (e * e * e));
            }
            lead = std::max(lead, std::abs(check_cc_nonpositive(w, f, eps[0])));
            if (v.front() > 0) slopes.push_back(loglog_slope(eps, v));
        }
        std::sort(slopes.begin(), slopes.end());
        const double med = slopes[slopes.size() / 2];
        r.pass = r.pass && std::isfinite(K) && std::abs(med - target) <= tol;
        r.detail += detail::fmt("%s K %.3g median slope %.3f [%.3f, %.3f] lead %.1e; ", name, K, med, slopes.front(),
                                slopes.back(), lead);
    }
    r.detail += detail::fmt("want %.0f +- %.1f", target, tol);
    return r;
}

// 8. |λ₊| = |λ₋| at leading degree
inline CheckResult criticality() {
    const double tol = 1e-8;
    CheckResult r;
    r.pass = true;
    for (const char* name : {"minkowski", "desitter", "flrw", "schwarzschild"}) {
        const auto c = make_chart(name);
        const auto rep = leading_criticality_check(c, sample_pairs(c, 100, 808), {0.03, 0.01, 0.003}, 1.0, {}, tol);
        r.pass = r.pass && rep.pass && rep.pairs == 100;
        r.detail += detail::fmt("%s gap %.1e L %.1e; ", name, rep.max_modulus_gap, rep.max_lagrangian);
    }
    r.detail += detail::fmt("tol %.0e, L tol %.0e |lambda|^2", tol, tol * tol);
    return r;
}

// 9. analytic eigenvalues vs 4x4 eigensolve
inline CheckResult analytic_spectrum() {
    const double tol = 1e-6;
    const std::vector<double> sweep{1e-1, 1e-2, 1e-3, 1e-4};
    CheckResult r;
    std::vector<double> worst(sweep.size(), 0.0);
    int used = 0;
    for (const char* name : {"minkowski", "desitter", "flrw"}) {
        const auto c = make_chart(name);
        RegFieldSolver s(c, RegFieldConfig{});
        for (const auto& [x, y] : sample_pairs(c, 100, 909)) {
            const auto g = solve_geodesic(c, x, y, false);
            const auto f = make_frame(g);
            for (size_t i = 0; i < sweep.size(); ++i) {
                const auto rf = solve_regfield(s, g, sweep[i]);
                const auto ch = closed_chain(p_leading(f, rf, 1.0, sweep[i]));
                if (ch.degenerate) continue;
                const auto [lp, lm] = analytic_eigenvalues(f, rf, sweep[i], 1.0);
                worst[i] = std::max({worst[i], std::abs(ch.lambda_plus - lp) / std::abs(lp),
                                     std::abs(ch.lambda_minus - lm) / std::abs(lm)});
                used += i == sweep.size() - 1;
            }
        }
    }
    r.pass = worst.back() < tol && used > 0;
    r.detail = "rel err";
    for (size_t i = 0; i < sweep.size(); ++i) r.detail += detail::fmt(" eps=%.0e %.1e", sweep[i], worst[i]);
    r.detail += detail::fmt(" over %d pairs (tol %.0e at smallest)", used, tol);
    return r;
}

// 10. tangent integrals: trace, κ(ε) ~ ε²
inline CheckResult tangent_integral_checks(bool diagnostic = true) {
    const double slope = 2.0, slope_tol = 0.15, err_factor = 3.0, budget = 600.0;
    const std::vector<double> sweep{1e-2, 4.64e-3, 2.15e-3, 1e-3};
    CheckResult r;
    r.pass = true;
    for (const char* name : {"minkowski", "desitter", "flrw"}) {
        const auto c = make_chart(name);
        const Vec4 x = reference_point(c);
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<CTensors> ts;
        bool trace_ok = true;
        for (double e : sweep) {
            ts.push_back(tangent_integrals(c, x, e, 1.0, detail::lower_sign()));
            const auto& t = ts.back();
            trace_ok = trace_ok && std::abs(c_trace(t.C0, c, x)) <= err_factor * t.err0.sum() &&
                       std::abs(c_trace(t.C1, c, x)) <= err_factor * t.err1.sum();
        }
        const auto k = kappa_extract(ts);
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.pass = r.pass && trace_ok && std::abs(k.slope - slope) <= slope_tol && dt < budget;
        r.detail += detail::fmt("%s slope %.3f kappa(1e-2) %.4f trace %s %.0fs; ", name, k.slope, k.kappa[0],
                                trace_ok ? "ok" : "BAD", dt);
    }
    r.detail += detail::fmt("want %.0f +- %.2f", slope, slope_tol);
    if (diagnostic) {
        // physical region |ξ|_E <= 40/m instead of 40ε
        TangentConfig q;
        q.scale_with_eps = false;
        std::vector<CTensors> ts;
        for (double e : sweep) ts.push_back(tangent_integrals(minkowski(), Vec4::Zero(), e, 1.0, detail::lower_sign(), q));
        r.detail += detail::fmt("; fixed-radius slope %.3f", kappa_extract(ts).slope);
    }
    return r;
}

// 11. trace-free Ricci classification and Λ
inline CheckResult einstein_classification() {
    const double crit_tol = 1e-8, noncrit = 1e-3, lambda_tol = 1e-8, H = 0.7;
    CheckResult r;
    double crit = 0;
    for (const char* name : {"desitter", "schwarzschild"}) {
        const auto c = make_chart(name);
        crit = std::max(crit, einstein_residual(c, reference_point(c)).norm);
    }
    const auto f = make_chart("flrw");
    const double fn = einstein_residual(f, reference_point(f)).norm;
    const std::vector<Vec4> pts{Vec4(0.1, 0, 0, 0), Vec4(-0.2, 0.3, 0.1, 0), Vec4(0.3, -0.1, 0.2, 0.4)};
    const auto ds = lambda_reconstruct(de_sitter(H), pts);
    const auto mk = lambda_reconstruct(minkowski(), pts);
    const bool lam_ok = ds.constancy < lambda_tol && std::abs(ds.lambda - 3 * H * H) < lambda_tol &&
                        std::abs(mk.lambda) < lambda_tol && mk.constancy < lambda_tol;
    r.pass = crit < crit_tol && fn > noncrit && lam_ok;
    r.detail = detail::fmt("critical %.1e (tol %.0e); flrw %.3e (> %.0e); de Sitter H=%.1f Lambda %.6f (want %.6f) "
                           "spread %.1e; minkowski %.1e",
                           crit, crit_tol, fn, noncrit, H, ds.lambda, 3 * H * H, ds.constancy, mk.lambda);
    return r;
}

// 12. matter: conservation and first-order spectrum
inline CheckResult matter_pipeline() {
    const double div_tol = 1e-6, pert_tol = 1e-5, eps = 0.02;
    CheckResult r;
    PlaneWave a, b;
    a.k = Eigen::Vector3d(0.3, -0.2, 0.5);
    a.seed = Spinor(Complex(1, 0), Complex(0, 0.5), Complex(0.2, 0), Complex(0, -0.3));
    b.k = Eigen::Vector3d(-0.4, 0.1, 0.2);
    b.seed = Spinor(Complex(0, 0), Complex(1, 0), Complex(0, 0.1), Complex(0.4, 0));
    b.amplitude = Complex(0.6, 0.3);
    const auto mf = plane_waves({a, b}, 1.0);
    double div = 0;
    for (const Vec4& x : {Vec4(0, 0, 0, 0), Vec4(0.2, -0.3, 0.1, 0.4), Vec4(-0.5, 0.1, 0.7, -0.2)})
        div = std::max(div, stress_divergence(mf, minkowski(), x, 1e-3));
    std::mt19937 gen(1212);
    std::normal_distribution<double> n;
    const auto c = de_sitter();
    RegFieldSolver s(c, RegFieldConfig{});
    double worst = 0;
    int used = 0;
    for (const auto& [x, y] : sample_pairs(c, 100, 1212)) {
        const auto p = detail::make_pair(s, x, y, eps);
        const auto k = p_leading(p.f, p.rf, 1.0, eps);
        const auto ch = closed_chain(k);
        if (ch.degenerate) continue;
        SpinMatrix B;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) B(i, j) = Complex(n(gen), n(gen));
        const SpinMatrix dP = detail::maxabs(k.P) * B;
        const SpinMatrix dA = dP * spin_adjoint(k.P) + k.P * spin_adjoint(dP);
        const auto pr = delta_spectrum(ch, dA, p.f, k.xi, eps);
        const auto [fp, fm] = fd_delta_lambda(ch.A, dA, 1e-6);
        const double sc = std::max(std::abs(pr.dl_plus), std::abs(pr.dl_minus));
        worst = std::max({worst, std::abs(fp - pr.dl_plus) / sc, std::abs(fm - pr.dl_minus) / sc});
        ++used;
    }
    r.pass = div < div_tol && worst < pert_tol && used >= 90;
    r.detail = detail::fmt("divergence %.1e (tol %.0e); delta spectrum vs FD %.1e over %d (tol %.0e)", div, div_tol,
                           worst, used, pert_tol);
    return r;
}

struct Suite {
    const char* name;
    /// wall-clock budget in seconds, 0 for none
    double budget;
    std::function<CheckResult()> run;
};

inline const std::vector<Suite>& suites() {
    static const std::vector<Suite> s{
        {"flat closed forms", 5, flat_closed_forms},
        {"bi-tensor identities", 120, bitensor_identities},
        {"van Vleck expansion", 0, van_vleck_expansion},
        {"T-symbol identities", 0, symbol_identities},
        {"SDW coefficients", 0, sdw_checks},
        {"regularizing field", 0, regfield_checks},
        {"c.c bound", 0, [] { return cc_bound(); }},
        {"leading criticality", 0, criticality},
        {"analytic spectrum", 0, analytic_spectrum},
        {"tangent integrals", 0, [] { return tangent_integral_checks(); }},
        {"Einstein classification", 0, einstein_classification},
        {"matter pipeline", 0, matter_pipeline},
    };
    return s;
}

/// Runs criterion id (1-based) under its time budget; exceptions become failures.
inline CheckResult run_check(int id) {
    if (id < 1 || id > int(suites().size())) throw DomainError("suite id out of range");
    const auto& su = suites()[id - 1];
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
        r = su.run();
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (su.budget > 0) {
        r.pass = r.pass && r.seconds < su.budget;
        r.detail += detail::fmt(" [budget %.0fs]", su.budget);
    }
    r.id = id;
    r.name = su.name;
    return r;
}

}  // namespace cfs::verify
