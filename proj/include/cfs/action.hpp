#pragma once

#include "cfs/projector.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace cfs {

/// L = (1/4n) Σ_{i,j} (|λ_i| - |λ_j|)², n = 2.
inline double lagrangian(const std::array<Complex, 4>& l) {
    double s = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double d = std::abs(l[i]) - std::abs(l[j]);
            s += d * d;
        }
    return s / 8;
}

/// (Σ |λ_i|)².
inline double spectral_weight(const std::array<Complex, 4>& l) {
    double s = 0;
    for (const auto& v : l) s += std::abs(v);
    return s * s;
}

/// Pairs (x, y) with x on Σ = {x⁰ = 0} at the chart's reference point and y - x uniform in
/// [-scale, scale]⁴ (inside the default normal radius 0.1), keeping |y⁰ - x⁰| >= dt_min·scale (chords nearly tangent to Σ have no usable crossing).
inline std::vector<std::pair<Vec4, Vec4>> sample_pairs(const MetricChart& c, int n, unsigned seed,
                                                       double scale = 0.045, double dt_min = 0.25) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0), t(dt_min, 1.0);
    std::bernoulli_distribution coin;
    Vec4 x = reference_point(c);
    x(0) = 0;
    std::vector<std::pair<Vec4, Vec4>> out;
    for (int i = 0; i < n; ++i) {
        Vec4 d(t(gen) * (coin(gen) ? 1 : -1), u(gen), u(gen), u(gen));
        out.push_back({x, x + scale * d});
    }
    return out;
}

struct CriticalityReport {
    int pairs = 0;
    int evaluations = 0;
    /// max ||λ₊| - |λ₋|| / |λ₊|
    double max_modulus_gap = 0;
    /// max L / |λ₊|²
    double max_lagrangian = 0;
    bool pass = false;
};

/// Leading-degree closed chains over the given pairs and ε values.
inline CriticalityReport leading_criticality_check(const MetricChart& c,
                                                   const std::vector<std::pair<Vec4, Vec4>>& pairs,
                                                   const std::vector<double>& eps_sweep, double m,
                                                   const RegFieldConfig& cfg = {}, double tol = 1e-8,
                                                   const DiracRep& rep = dirac_rep()) {
    if (pairs.empty() || eps_sweep.empty()) throw DomainError("criticality check needs pairs and eps values");
    CriticalityReport r;
    RegFieldSolver solver(c, cfg);
    for (const auto& [x, y] : pairs) {
        const auto g = solve_geodesic(c, x, y);
        const auto f = make_frame(g, rep);
        const auto rf = solve_regfield(solver, g, eps_sweep.front());
        for (double eps : eps_sweep) {
            const auto s = closed_chain(p_leading(f, rf, m, eps, false, rep), rep);
            const double lp = std::abs(s.lambda_plus);
            r.max_modulus_gap = std::max(r.max_modulus_gap, std::abs(lp - std::abs(s.lambda_minus)) / lp);
            r.max_lagrangian = std::max(r.max_lagrangian, lagrangian(s.eigenvalues) / (lp * lp));
            ++r.evaluations;
        }
        ++r.pairs;
    }
    r.pass = r.max_modulus_gap < tol && r.max_lagrangian < tol * tol;
    return r;
}

/// δP_geom = -(i/6) R^{TF}_{μν} γ^μ ξ^ν U T⁽⁰⁾.
inline SpinMatrix delta_p_geom(const BiTensorFrame& f, const RegField& rf, double m, double eps,
                               const DiracRep& rep = dirac_rep()) {
    return p_next(f, rf, m, eps, rep).part("ricci_tf")->value;
}

/// A Dirac field with its covariant derivative (lower index).
struct MatterField {
    double m = 1.0;
    std::function<Spinor(const Vec4&)> u;
    std::function<std::array<Spinor, 4>(const Vec4&)> du;
};

struct PlaneWave {
    /// spatial momentum
    Eigen::Vector3d k = Eigen::Vector3d::Zero();
    /// projected onto the positive-energy solutions with (p̸ + m)
    Spinor seed = Spinor::Unit(0);
    Complex amplitude = 1.0;
};

/// Superposition of positive-energy Minkowski plane waves w e^{-ip·x}, (p̸ - m)w = 0.
inline MatterField plane_waves(const std::vector<PlaneWave>& waves, double m, const DiracRep& rep = dirac_rep()) {
    if (!(m > 0)) throw DomainError("mass must be positive");
    struct Mode {
        Vec4 p_low;
        Spinor w;
    };
    std::vector<Mode> modes;
    for (const auto& pw : waves) {
        const Vec4 p(std::sqrt(pw.k.squaredNorm() + m * m), pw.k(0), pw.k(1), pw.k(2));
        const Vec4 pl = eta() * p;
        const SpinMatrix ps = slash(pl.cast<Complex>(), rep.gamma);
        Spinor w = (ps + m * SpinMatrix::Identity()) * pw.seed;
        if (w.norm() == 0) throw DomainError("plane-wave seed is annihilated by the projector");
        modes.push_back({pl, pw.amplitude * w / w.norm()});
    }
    MatterField mf;
    mf.m = m;
    mf.u = [modes](const Vec4& x) {
        Spinor s = Spinor::Zero();
        for (const auto& md : modes) s += md.w * std::exp(Complex(0, -md.p_low.dot(x)));
        return s;
    };
    mf.du = [modes](const Vec4& x) {
        std::array<Spinor, 4> d;
        for (auto& v : d) v.setZero();
        for (const auto& md : modes) {
            const Spinor s = md.w * std::exp(Complex(0, -md.p_low.dot(x)));
            for (int mu = 0; mu < 4; ++mu) d[mu] += Complex(0, -md.p_low(mu)) * s;
        }
        return d;
    };
    return mf;
}

inline MatterField zero_field(double m = 1.0) {
    MatterField mf;
    mf.m = m;
    mf.u = [](const Vec4&) { return Spinor::Zero().eval(); };
    mf.du = [](const Vec4&) {
        std::array<Spinor, 4> d;
        for (auto& v : d) v.setZero();
        return d;
    };
    return mf;
}

/// ‖(iγ^μ∇_μ - m)u‖ / (‖iγ^μ∇_μ u‖ + m‖u‖), 0 for u = 0.
inline double dirac_residual(const MatterField& mf, const MetricChart& c, const Vec4& x,
                             const DiracRep& rep = dirac_rep()) {
    const auto g = gamma_at(tetrad_at(c, x), rep);
    const auto d = mf.du(x);
    Spinor k = Spinor::Zero();
    for (int mu = 0; mu < 4; ++mu) k += Complex(0, 1) * (g[mu] * d[mu]);
    const Spinor u = mf.u(x);
    const double scale = k.norm() + mf.m * u.norm();
    return scale > 0 ? (k - mf.m * u).norm() / scale : 0.0;
}

struct CurrentStress {
    /// j_μ
    Vec4 j = Vec4::Zero();
    /// T_{μν}, first index on γ
    Mat4 T = Mat4::Zero();
    Mat4 T_tf = Mat4::Zero();
    double trace = 0;
    /// largest imaginary part dropped from j and T
    double imag = 0;
    double onshell_residual = 0;
    bool off_shell = false;
};

/// j_μ = ≺u|γ_μ u≻, T_{μν} = (i/2)(≺u|γ_μ∇_ν u≻ - ≺∇_ν u|γ_μ u≻).
inline CurrentStress dirac_current_stress(const MatterField& mf, const MetricChart& c, const Vec4& x,
                                          const DiracRep& rep = dirac_rep(), double onshell_tol = 1e-6) {
    CurrentStress cs;
    const Mat4 gl = c.metric(x);
    const auto gu = gamma_at(tetrad_at(c, x), rep);
    std::array<CMat4, 4> g;
    for (int mu = 0; mu < 4; ++mu) {
        g[mu].setZero();
        for (int nu = 0; nu < 4; ++nu) g[mu] += gl(mu, nu) * gu[nu];
    }
    const Spinor u = mf.u(x);
    const auto d = mf.du(x);
    for (int mu = 0; mu < 4; ++mu) {
        const Complex jm = spin_product(u, g[mu] * u, rep);
        cs.j(mu) = jm.real();
        cs.imag = std::max(cs.imag, std::abs(jm.imag()));
        for (int nu = 0; nu < 4; ++nu) {
            const Complex t =
                Complex(0, 0.5) * (spin_product(u, g[mu] * d[nu], rep) - spin_product(d[nu], g[mu] * u, rep));
            cs.T(mu, nu) = t.real();
            cs.imag = std::max(cs.imag, std::abs(t.imag()));
        }
    }
    cs.trace = (gl.inverse() * cs.T).trace();
    cs.T_tf = cs.T - 0.25 * cs.trace * gl;
    cs.onshell_residual = dirac_residual(mf, c, x, rep);
    cs.off_shell = cs.onshell_residual > onshell_tol;
    return cs;
}

/// max_ν |g^{λμ}∇_λ T_{μν}| / max |T| by fourth-order differences with step h.
inline double stress_divergence(const MatterField& mf, const MetricChart& c, const Vec4& x, double h,
                                const DiracRep& rep = dirac_rep()) {
    const Mat4 gi = c.metric(x).inverse();
    const auto G = christoffel(c, x);
    const Mat4 T0 = dirac_current_stress(mf, c, x, rep).T;
    std::array<Mat4, 4> dT;
    for (int l = 0; l < 4; ++l) {
        const Vec4 e = h * Vec4::Unit(l);
        auto T = [&](const Vec4& p) { return dirac_current_stress(mf, c, p, rep).T; };
        dT[l] = (-T(x + 2 * e) + 8 * T(x + e) - 8 * T(x - e) + T(x - 2 * e)) / (12 * h);
    }
    double worst = 0;
    for (int nu = 0; nu < 4; ++nu) {
        double div = 0;
        for (int l = 0; l < 4; ++l)
            for (int mu = 0; mu < 4; ++mu) {
                if (gi(l, mu) == 0.0) continue;
                double cov = dT[l](mu, nu);
                for (int k = 0; k < 4; ++k) cov -= G[k](l, mu) * T0(k, nu) + G[k](l, nu) * T0(mu, k);
                div += gi(l, mu) * cov;
            }
        worst = std::max(worst, std::abs(div));
    }
    const double scale = T0.cwiseAbs().maxCoeff();
    return scale > 0 ? worst / scale : worst;
}

/// ∇_ν j_μ at x, stored as (ν, μ).
inline Mat4 current_gradient(const MatterField& mf, const MetricChart& c, const Vec4& x,
                             const DiracRep& rep = dirac_rep()) {
    const auto G = christoffel(c, x);
    const Vec4 j0 = dirac_current_stress(mf, c, x, rep).j;
    Mat4 d;
    for (int n = 0; n < 4; ++n) {
        const double h = c.box_step(n);
        const Vec4 e = h * Vec4::Unit(n);
        auto J = [&](const Vec4& p) { return dirac_current_stress(mf, c, p, rep).j; };
        const Vec4 dj = (-J(x + 2 * e) + 8 * J(x + e) - 8 * J(x - e) + J(x - 2 * e)) / (12 * h);
        for (int mu = 0; mu < 4; ++mu) {
            double v = dj(mu);
            for (int k = 0; k < 4; ++k) v -= G[k](n, mu) * j0(k);
            d(n, mu) = v;
        }
    }
    return d;
}

/// Vectorial matter perturbation (1/8π)(j_μ + s σ^ν(½∇_ν j_μ + i T_{μν})) γ^μ U.
/// s = -1 is the Taylor expansion u(y) = u(x) - σ^ν∇_ν u(x) + ...; s = +1 flips the sign of the first-order term.
inline SpinMatrix delta_p_matter_vec(const MatterField& mf, const BiTensorFrame& f, double taylor_sign = -1.0,
                                     const DiracRep& rep = dirac_rep()) {
    const MetricChart& c = f.geodesic.chart;
    const Vec4& x = f.geodesic.x;
    const auto cs = dirac_current_stress(mf, c, x, rep);
    const Vec4& s = f.wf.grad1;
    CVec4 v = cs.j.cast<Complex>();
    if (!s.isZero()) {
        const Mat4 dj = current_gradient(mf, c, x, rep);
        for (int mu = 0; mu < 4; ++mu) {
            Complex add = 0;
            for (int nu = 0; nu < 4; ++nu) add += s(nu) * (0.5 * dj(nu, mu) + Complex(0, 1) * cs.T(mu, nu));
            v(mu) += taylor_sign * add;
        }
    }
    const double pi = std::acos(-1.0);
    return slash(v, gammas_at_x(f, rep)) * f.U / (8 * pi);
}

struct PerturbationResult {
    /// A_{μν} = ¼ A^λ_λ g_{μν} + A_{[μν]} (lower, coordinates); the symmetric trace-free part is not visible in δA
    Mat4 A_re = Mat4::Zero(), A_im = Mat4::Zero();
    Complex A_trace = 0.0;
    /// ‖δA - A_{μν}γ^μγ^ν‖ / ‖δA‖: vector, axial and pseudoscalar content
    double nonbilinear = 0;
    /// (1/2) Tr[Λ± δA]
    Complex dl_plus = 0.0, dl_minus = 0.0;
    /// A^μ_μ ∓ c_{μν}A^{μν}/(εr)
    Complex dl_plus_closed = 0.0, dl_minus_closed = 0.0;
    /// Re(λ̄ δλ)/|λ|
    double dabs_plus = 0, dabs_minus = 0;
};

inline PerturbationResult delta_spectrum(const ChainSpectrum& s, const SpinMatrix& dA, const BiTensorFrame& f,
                                         const CVec4& xi, double eps, const DiracRep& rep = dirac_rep()) {
    if (s.degenerate) throw RegularizationError("delta_spectrum needs a non-degenerate closed chain");
    PerturbationResult r;
    const Mat4 g = f.wf.g_x, gi = g.inverse();
    const auto gam = gammas_at_x(f, rep);
    r.A_trace = dA.trace() / 4.0;
    CMat4 A = CMat4::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            SpinMatrix sl = SpinMatrix::Zero();  // Σ_{ab}
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q)
                    if (p != q) sl += g(a, p) * g(b, q) * sigma_munu(gam, p, q);
            A(a, b) = Complex(0, 1.0 / 8) * (sl * dA).trace();
        }
    SpinMatrix model = r.A_trace * SpinMatrix::Identity();
    // -i A_{ab} Σ^{ab}
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (a != b) model += Complex(0, -1) * A(a, b) * sigma_munu(gam, a, b);
    const double nd = dA.cwiseAbs().maxCoeff();
    r.nonbilinear = nd > 0 ? (dA - model).cwiseAbs().maxCoeff() / nd : 0.0;
    const CMat4 full = A + 0.25 * r.A_trace * g.cast<Complex>();
    r.A_re = full.real();
    r.A_im = full.imag();
    r.dl_plus = 0.5 * (s.proj_plus * dA).trace();
    r.dl_minus = 0.5 * (s.proj_minus * dA).trace();
    const Mat4 c = c_exact(xi);
    const double er = std::sqrt(std::max(-c_contract(c, g) / 2, 0.0));
    Complex cA = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) cA += c(a, b) * (gi.cast<Complex>() * A * gi.cast<Complex>())(a, b);
    r.dl_plus_closed = r.A_trace - cA / er;
    r.dl_minus_closed = r.A_trace + cA / er;
    r.dabs_plus = (std::conj(s.lambda_plus) * r.dl_plus).real() / std::abs(s.lambda_plus);
    r.dabs_minus = (std::conj(s.lambda_minus) * r.dl_minus).real() / std::abs(s.lambda_minus);
    return r;
}

/// d/dt of the pair means of spec(A + t δA) at t = 0, central difference.
inline std::pair<Complex, Complex> fd_delta_lambda(const SpinMatrix& A, const SpinMatrix& dA, double t,
                                                   const DiracRep& rep = dirac_rep()) {
    const SpinMatrix I = SpinMatrix::Identity();
    const auto p = closed_chain(A + t * dA, I, rep);
    const auto m = closed_chain(A - t * dA, I, rep);
    return {(p.lambda_plus - m.lambda_plus) / (2 * t), (p.lambda_minus - m.lambda_minus) / (2 * t)};
}

struct TangentConfig {
    /// outer radius of the integration region: m|ξ|_E, or |ξ|_E/ε with scale_with_eps
    double cutoff = 40.0;
    bool scale_with_eps = true;
    /// C∞ taper from taper·cutoff to cutoff (the matter weight oscillates without decay in timelike
    /// directions; a sharp edge leaves an O(cutoff^{-1/2}) remainder); 1 gives a sharp cutoff
    double taper = 0.5;
    /// panels are accepted when |I30 - I15| <= rel_tol |I30| on the dominant component
    double rel_tol = 1e-5;
    int threads = 0;  // 0: CFS_THREADS
};

/// The integrals are purely imaginary for the default data; C0, C1 hold Im C.
struct CTensors {
    /// upper-index coordinate components
    Mat4 C0 = Mat4::Zero(), C1 = Mat4::Zero();
    /// components in the χ-adapted orthonormal frame
    Mat4 C0_frame = Mat4::Zero(), C1_frame = Mat4::Zero();
    /// |I30 - I15| per component (coordinate bound and frame)
    Mat4 err0 = Mat4::Zero(), err1 = Mat4::Zero();
    Mat4 err0_frame = Mat4::Zero(), err1_frame = Mat4::Zero();
    double eps = 0, m = 1;
    Vec4 x = Vec4::Zero();
    /// e_a^μ, e_0 = χ^♯/|χ|
    Mat4 frame = Mat4::Identity();
    double chi_norm = 1;
    Complex alpha1 = 0.0;
    /// largest |Re C| / |Im C|; C is imaginary up to quadrature when σ^ε(-τ) = conj σ^ε(τ)
    double real_part = 0;
};

/// Orthonormal frame with e_0 along the raised covector χ.
inline Mat4 chi_frame(const MetricChart& c, const Vec4& x, const Vec4& chi_low, double* norm = nullptr) {
    const Mat4 g = c.metric(x);
    const Vec4 up = g.inverse() * chi_low;
    const double n2 = up.dot(g * up);
    if (!(n2 > 0)) throw RegularizationError("χ is not timelike");
    Mat4 E;
    E.col(0) = up / std::sqrt(n2);
    const Vec4 etad(1, -1, -1, -1);
    for (int a = 1; a < 4; ++a) {
        Vec4 v = Vec4::Unit(a);
        for (int b = 0; b < a; ++b) {
            const Vec4 eb = E.col(b);
            v -= etad(b) * eb.dot(g * v) * eb;
        }
        const double q = v.dot(g * v);
        if (!(q < 0)) throw SignatureError("frame completion failed");
        E.col(a) = v / std::sqrt(-q);
    }
    if (norm) *norm = std::sqrt(n2);
    return E;
}

/// Tangent-space integrals C0 (weight Re[T⁽⁻¹⁾ conj T⁽⁰⁾]/6) and C1 (weight Re[T⁽⁻¹⁾]/8π) of
/// |T⁽⁻¹⁾|² ξ·ξ̄ ((ξ·ξ)χ^μξ^ν - t ξ^μξ^ν) over T_xM, flat tangent model, f(ξ) = χ·ξ + ε α⁽¹⁾,
/// ξ = ξ_flat - iεχ, t = χ·ξ.
inline CTensors tangent_integrals(const MetricChart& c, const Vec4& x, double eps, double m,
                                  const RegFieldConfig& rcfg = {}, const TangentConfig& q = {}) {
    if (!(eps > 0) || !(m > 0)) throw DomainError("tangent integrals need eps > 0 and m > 0");
    c.require_interior(x);
    CTensors out;
    out.eps = eps;
    out.m = m;
    out.x = x;
    const Vec4 chi = Vec4::Unit(0);  // χ = -∂ Re f⁽⁰⁾ from the Σ data
    double n = 1;
    out.frame = chi_frame(c, x, chi, &n);
    out.chi_norm = n;
    const Complex a1 = rcfg.alpha(1, c, x);
    out.alpha1 = a1;
    {
        const double u0 = -a1.real() / n;
        if (u0 * u0 + 2 * a1.imag() >= 0)
            throw RegularizationError("σ^ε vanishes at a real tangent vector for this α⁽¹⁾ (use sign = -1)");
    }
    const double pi = std::acos(-1.0);
    const double Rmax = q.scale_with_eps ? q.cutoff : q.cutoff / (m * eps);

    // octahedron average (nodes ±e_i, exact through degree 3) of S^{ab}/ε³ with the regularized
    // ξ^a = ε(u - in, vω), χ^a = (n, 0, 0, 0), t = χ·ξ; real and imaginary parts
    auto S = [n](double u, double v) {
        Mat4 re = Mat4::Zero(), im = Mat4::Zero();
        const Complex x0(u, -n);
        const Complex xx = x0 * x0 - v * v;
        const Complex t = n * x0;
        for (int k = 0; k < 3; ++k)
            for (double sg : {1.0, -1.0}) {
                CVec4 xi(x0, 0, 0, 0);
                xi(k + 1) = sg * v;
                CVec4 ch(n, 0, 0, 0);
                const CMat4 s = (xx * ch * xi.transpose() - t * xi * xi.transpose()) / 6.0;
                re += s.real();
                im += s.imag();
            }
        return std::pair{re, im};
    };
    // 1 below q.taper, 0 at 1, smooth in between
    auto window = [&q](double r) {
        if (r <= q.taper) return 1.0;
        if (r >= 1.0) return 0.0;
        const double y = (r - q.taper) / (1.0 - q.taper);
        const double a = std::exp(-1.0 / y), b = std::exp(-1.0 / (1.0 - y));
        return b / (a + b);
    };
    // weights W0, W1 at (u, v), including the radial measure 4π ρ² dτ dρ
    auto W = [&](double u, double v) -> std::pair<double, double> {
        const Complex se = eps * eps * (0.5 * (u * u - v * v) - Complex(0, n * u) - Complex(0, 1) * a1);
        const Complex tm = t_value(-1, se, m);
        const Complex t0 = t_value(0, se, m);
        const double xx = eps * eps * (u * u - v * v + n * n);
        const double base = std::norm(tm) * xx * 4 * pi * v * v * std::pow(eps, 4) * window(std::hypot(u, v) / Rmax);
        return {base * (tm * std::conj(t0)).real() / 6, base * tm.real() / (8 * pi)};
    };
    // v panels
    std::vector<double> vb{0.0, 0.25, 0.5};
    while (vb.back() < Rmax) vb.push_back(std::min(2 * vb.back(), Rmax));
    // the region is the Euclidean disc u² + v² <= Rmax²
    auto u_breaks = [&](double v) {
        const double U = std::sqrt(std::max(Rmax * Rmax - v * v, 0.0));
        std::vector<double> b{-U, 0.0, U};
        const double w = std::max(n, 1.0);
        for (double sg : {-1.0, 1.0})
            for (double d : {-30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0}) b.push_back(sg * v + d * w);
        for (double r = v + 60 * w; r < U; r *= 2) {
            b.push_back(r);
            b.push_back(-r);
        }
        std::vector<double> out;
        for (double t : b)
            if (t >= -U && t <= U) out.push_back(t);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    struct Acc {
        Mat4 hi0 = Mat4::Zero(), hi1 = Mat4::Zero(), lo0 = Mat4::Zero(), lo1 = Mat4::Zero();
        Mat4 re0 = Mat4::Zero(), re1 = Mat4::Zero();
    };
    // inner integral ∫ du W(u,v) S(u,v) for a fixed v, with both rules
    auto inner = [&](double v, bool high) -> std::array<Mat4, 4> {
        Mat4 a0 = Mat4::Zero(), a1m = Mat4::Zero(), r0 = Mat4::Zero(), r1 = Mat4::Zero();
        const auto br = u_breaks(v);
        auto run = [&](const auto& xs, const auto& ws, double lo, double hi) {
            const double hw = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
            auto node = [&](double u, double wt) {
                const auto [w0, w1] = W(u, v);
                const auto [sr, si] = S(u, v);
                a0 += wt * hw * w0 * si;
                a1m += wt * hw * w1 * si;
                r0 += wt * hw * w0 * sr;
                r1 += wt * hw * w1 * sr;
            };
            for (size_t i = 0; i < xs.size(); ++i) {
                if (xs[i] == 0.0) {
                    node(mid, ws[i]);
                    continue;
                }
                node(mid + hw * xs[i], ws[i]);
                node(mid - hw * xs[i], ws[i]);
            }
        };
        using G30 = boost::math::quadrature::gauss<double, 30>;
        using G15 = boost::math::quadrature::gauss<double, 15>;
        for (size_t k = 0; k + 1 < br.size(); ++k) {
            if (high)
                run(G30::abscissa(), G30::weights(), br[k], br[k + 1]);
            else
                run(G15::abscissa(), G15::weights(), br[k], br[k + 1]);
        }
        return {a0, a1m, r0, r1};
    };
    const int P = int(vb.size()) - 1;
    std::vector<Acc> part(P);
    auto work = [&](int p) {
        const double lo = vb[p], hi = vb[p + 1];
        const double hw = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        auto outer = [&](const auto& xs, const auto& ws, bool high, Mat4& r0, Mat4& r1) {
            auto node = [&](double v, double wt) {
                const auto i = inner(v, high);
                r0 += wt * hw * i[0];
                r1 += wt * hw * i[1];
                if (high) {
                    part[p].re0 += wt * hw * i[2];
                    part[p].re1 += wt * hw * i[3];
                }
            };
            for (size_t i = 0; i < xs.size(); ++i) {
                if (xs[i] == 0.0) {
                    node(mid, ws[i]);
                    continue;
                }
                node(mid + hw * xs[i], ws[i]);
                node(mid - hw * xs[i], ws[i]);
            }
        };
        using G30 = boost::math::quadrature::gauss<double, 30>;
        using G15 = boost::math::quadrature::gauss<double, 15>;
        outer(G30::abscissa(), G30::weights(), true, part[p].hi0, part[p].hi1);
        outer(G15::abscissa(), G15::weights(), false, part[p].lo0, part[p].lo1);
    };
    const int T = std::max(1, q.threads > 0 ? q.threads : thread_count());
    if (T == 1) {
        for (int p = 0; p < P; ++p) work(p);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < T; ++t)
            pool.emplace_back([&, t] {
                for (int p = t; p < P; p += T) work(p);
            });
        for (auto& th : pool) th.join();
    }
    // fixed-order reduction
    Acc tot;
    for (const auto& a : part) {
        tot.hi0 += a.hi0;
        tot.hi1 += a.hi1;
        tot.lo0 += a.lo0;
        tot.lo1 += a.lo1;
        tot.re0 += a.re0;
        tot.re1 += a.re1;
    }
    const double e3 = eps * eps * eps;  // S scaling
    out.C0_frame = e3 * tot.hi0;
    out.C1_frame = e3 * tot.hi1;
    out.err0_frame = e3 * (tot.hi0 - tot.lo0).cwiseAbs();
    out.err1_frame = e3 * (tot.hi1 - tot.lo1).cwiseAbs();
    const double rs0 = (e3 * tot.re0).cwiseAbs().maxCoeff(), rs1 = (e3 * tot.re1).cwiseAbs().maxCoeff();
    out.real_part = std::max(rs0 / out.C0_frame.cwiseAbs().maxCoeff(), rs1 / out.C1_frame.cwiseAbs().maxCoeff());
    const Mat4& E = out.frame;
    out.C0 = E * out.C0_frame * E.transpose();
    out.C1 = E * out.C1_frame * E.transpose();
    const Mat4 Ea = E.cwiseAbs();
    out.err0 = Ea * out.err0_frame * Ea.transpose();
    out.err1 = Ea * out.err1_frame * Ea.transpose();
    const double s0 = out.C0_frame.cwiseAbs().maxCoeff(), s1 = out.C1_frame.cwiseAbs().maxCoeff();
    if (out.err0_frame.maxCoeff() > q.rel_tol * s0 || out.err1_frame.maxCoeff() > q.rel_tol * s1)
        throw AccuracyError("tangent-space quadrature error above tolerance");
    return out;
}

/// g_{μν} C^{μν}.
inline double c_trace(const Mat4& C, const MetricChart& c, const Vec4& x) {
    return c.metric(x).cwiseProduct(C).sum();
}

/// κ = Σ C1·C0 / Σ C0·C0 over frame components.
inline double kappa_of(const CTensors& t) {
    const double n0 = t.C0_frame.squaredNorm();
    if (!(std::sqrt(n0) > 10 * t.err0_frame.norm())) throw IllConditionedError("C0 is below its quadrature error");
    return t.C1_frame.cwiseProduct(t.C0_frame).sum() / n0;
}

struct KappaFit {
    std::vector<double> eps, kappa;
    double slope = 0;
};

inline KappaFit kappa_extract(const std::vector<CTensors>& sweep) {
    if (sweep.size() < 2) throw DomainError("kappa_extract needs at least two eps values");
    KappaFit k;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& t : sweep) {
        k.eps.push_back(t.eps);
        k.kappa.push_back(kappa_of(t));
        const double lx = std::log(t.eps), ly = std::log(std::abs(k.kappa.back()));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double N = double(sweep.size());
    k.slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
    return k;
}

struct EinsteinResidual {
    Mat4 ricci_tf = Mat4::Zero();
    /// R^{TF} - κ T^{TF} (lower, coordinates)
    Mat4 residual = Mat4::Zero();
    /// Frobenius norm of the orthonormal-frame components
    double norm = 0;
    double ricci_tf_norm = 0;
    /// |j| in the frame, reported but not part of the residual
    double current_norm = 0;
    /// C0^{μν} R^{TF}_{μν} - C1^{μν} T^{TF}_{μν}, when C is supplied
    std::optional<double> linearized;
};

inline EinsteinResidual einstein_residual(const MetricChart& c, const Vec4& x, double kappa = 0,
                                          const std::optional<CurrentStress>& matter = std::nullopt,
                                          const std::optional<CTensors>& C = std::nullopt) {
    EinsteinResidual r;
    r.ricci_tf = curvature_at(c, x).ricci_tf;
    r.residual = r.ricci_tf;
    Mat4 ttf = Mat4::Zero();
    if (matter) {
        ttf = matter->T_tf;
        // the stress tensor enters symmetrized
        ttf = 0.5 * (ttf + ttf.transpose()).eval();
        r.residual -= kappa * ttf;
    }
    const Mat4 E = frame_at(c, x);
    r.norm = (E.transpose() * r.residual * E).norm();
    r.ricci_tf_norm = (E.transpose() * r.ricci_tf * E).norm();
    if (matter) r.current_norm = (E.transpose() * matter->j).norm();
    if (C) r.linearized = C->C0.cwiseProduct(r.ricci_tf).sum() - C->C1.cwiseProduct(ttf).sum();
    return r;
}

struct LambdaResult {
    double lambda = 0;
    /// max |Λ(x_i) - Λ(x_0)|
    double constancy = 0;
    std::vector<double> values;
};

/// Λ = (d-2)/(2d) R + (κ/d) T at each point.
inline LambdaResult lambda_reconstruct(const MetricChart& c, const std::vector<Vec4>& points, double kappa = 0,
                                       const std::vector<double>& stress_trace = {}) {
    if (points.empty()) throw DomainError("lambda_reconstruct needs sample points");
    if (!stress_trace.empty() && stress_trace.size() != points.size())
        throw DomainError("one stress trace per sample point");
    LambdaResult r;
    for (size_t i = 0; i < points.size(); ++i) {
        const double R = curvature_at(c, points[i]).scalar;
        const double T = stress_trace.empty() ? 0.0 : stress_trace[i];
        r.values.push_back(0.25 * R + 0.25 * kappa * T);
    }
    r.lambda = r.values.front();
    for (double v : r.values) r.constancy = std::max(r.constancy, std::abs(v - r.values.front()));
    return r;
}

}  // namespace cfs
