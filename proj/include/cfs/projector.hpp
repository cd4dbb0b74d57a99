#pragma once

#include "cfs/bitensor.hpp"
#include "cfs/regfield.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <string>
#include <vector>

namespace cfs {

struct KernelPart {
    std::string label;
    int degree = 0;
    SpinMatrix value = SpinMatrix::Zero();
};

struct ProjectorKernel {
    /// P(x,y): S_y → S_x
    SpinMatrix P = SpinMatrix::Zero();
    /// ξ_μ = -∂_μσ + iε∂_μ f, lower index
    CVec4 xi = CVec4::Zero();
    Complex sig_eps = 0.0;
    std::vector<KernelPart> parts;

    const KernelPart* part(const std::string& label) const {
        for (const auto& p : parts)
            if (p.label == label) return &p;
        return nullptr;
    }
};

/// Coordinate Dirac matrices γ^μ at the first point of the frame.
inline std::array<CMat4, 4> gammas_at_x(const BiTensorFrame& f, const DiracRep& rep = dirac_rep()) {
    return gamma_at(tetrad_at(f.geodesic.chart, f.geodesic.x), rep);
}

/// P⁽⁰⁾ = (i/2) ξ̸ U(x,y) T⁽⁻¹⁾(σ^ε); with include_mass the flat m T⁽⁰⁾ U term is added.
inline ProjectorKernel p_leading(const BiTensorFrame& f, const RegField& rf, double m, double eps,
                                 bool include_mass = false, const DiracRep& rep = dirac_rep()) {
    ProjectorKernel k;
    k.xi = regularized_xi(f.wf, rf, eps);
    k.sig_eps = sigma_eps(f.wf.sigma, rf.value(eps), eps);
    const auto g = gammas_at_x(f, rep);
    KernelPart lead{"leading", 3, Complex(0, 0.5) * slash(k.xi, g) * f.U * t_value(-1, k.sig_eps, m)};
    k.P = lead.value;
    k.parts.push_back(lead);
    if (include_mass) {
        KernelPart mass{"mass", 1, m * t_value(0, k.sig_eps, m) * f.U};
        k.P += mass.value;
        k.parts.push_back(mass);
    }
    return k;
}

/// Adds -(i/6) R^{TF}_{μν} γ^μ ξ^ν U T⁽⁰⁾ to a leading kernel.
inline ProjectorKernel p_next(const ProjectorKernel& lead, const BiTensorFrame& f, double m,
                              const DiracRep& rep = dirac_rep()) {
    ProjectorKernel k = lead;
    const MetricChart& c = f.geodesic.chart;
    const Vec4& x = f.geodesic.x;
    const Mat4 rtf = curvature_at(c, x).ricci_tf;
    const CVec4 xi_up = f.wf.g_x.inverse().cast<Complex>() * k.xi;
    const CVec4 v = rtf.cast<Complex>() * xi_up;  // R^{TF}_{μν} ξ^ν
    const auto g = gammas_at_x(f, rep);
    KernelPart p{"ricci_tf", 2, Complex(0, -1.0 / 6) * slash(v, g) * f.U * t_value(0, k.sig_eps, m)};
    k.P += p.value;
    k.parts.push_back(p);
    return k;
}

inline ProjectorKernel p_next(const BiTensorFrame& f, const RegField& rf, double m, double eps,
                              const DiracRep& rep = dirac_rep()) {
    return p_next(p_leading(f, rf, m, eps, false, rep), f, m, rep);
}

/// P(y,x) = P(x,y)*.
inline SpinMatrix p_adjoint(const ProjectorKernel& k, const DiracRep& rep = dirac_rep()) {
    return spin_adjoint(k.P, rep);
}

/// max |P(y,x) - P(x,y)*| / max |P(x,y)| for a kernel computed directly in the swapped order.
inline double conjugate_kernel_defect(const ProjectorKernel& xy, const ProjectorKernel& yx,
                                      const DiracRep& rep = dirac_rep()) {
    return (yx.P - spin_adjoint(xy.P, rep)).cwiseAbs().maxCoeff() / xy.P.cwiseAbs().maxCoeff();
}

struct ChainSpectrum {
    SpinMatrix A = SpinMatrix::Zero();
    /// eigenvalues in (Re, Im) order
    std::array<Complex, 4> eigenvalues{};
    Complex lambda_plus = 0.0, lambda_minus = 0.0;
    /// spread within each pair, relative to |λ|
    double pair_spread = 0.0;
    bool degenerate = false;
    SpinMatrix proj_plus = SpinMatrix::Zero(), proj_minus = SpinMatrix::Zero();
    /// χ_L Λ₊, χ_R Λ₊, χ_L Λ₋, χ_R Λ₋
    std::array<SpinMatrix, 4> chiral{};
};

/// χ_{L/R} = (1 ∓ γ⁵)/2.
inline std::pair<SpinMatrix, SpinMatrix> chiral_projectors(const DiracRep& rep = dirac_rep()) {
    const SpinMatrix I = SpinMatrix::Identity();
    const SpinMatrix g5 = rep.gamma5();
    return {0.5 * (I - g5), 0.5 * (I + g5)};
}

/// A = P(x,y) P(y,x), direct eigensolve, pairing by the sign of Im λ.
inline ChainSpectrum closed_chain(const SpinMatrix& Pxy, const SpinMatrix& Pyx, const DiracRep& rep = dirac_rep(),
                                  double degenerate_tol = 1e-10) {
    ChainSpectrum s;
    s.A = Pxy * Pyx;
    Eigen::ComplexEigenSolver<SpinMatrix> es(s.A, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("closed-chain eigensolve failed");
    std::array<Complex, 4> ev;
    for (int i = 0; i < 4; ++i) ev[i] = es.eigenvalues()(i);
    std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) { return a.imag() > b.imag(); });
    s.lambda_plus = 0.5 * (ev[0] + ev[1]);
    s.lambda_minus = 0.5 * (ev[2] + ev[3]);
    const double scale = std::max(std::abs(s.lambda_plus), std::abs(s.lambda_minus));
    s.pair_spread = std::max(std::abs(ev[0] - ev[1]), std::abs(ev[2] - ev[3])) / scale;
    s.eigenvalues = ev;
    // real parts within rounding count as equal
    const double tie = 1e-12 * scale;
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [tie](Complex a, Complex b) {
        return std::abs(a.real() - b.real()) > tie ? a.real() < b.real() : a.imag() < b.imag();
    });
    const Complex gap = s.lambda_plus - s.lambda_minus;
    if (!(std::abs(gap) > degenerate_tol * scale)) {
        s.degenerate = true;
        return s;
    }
    const SpinMatrix I = SpinMatrix::Identity();
    // A is diagonalizable with two double eigenvalues: (A - λ∓)/(λ± - λ∓)
    s.proj_plus = (s.A - s.lambda_minus * I) / gap;
    s.proj_minus = (s.lambda_plus * I - s.A) / gap;
    const auto [L, R] = chiral_projectors(rep);
    s.chiral = {L * s.proj_plus, R * s.proj_plus, L * s.proj_minus, R * s.proj_minus};
    return s;
}

inline ChainSpectrum closed_chain(const ProjectorKernel& k, const DiracRep& rep = dirac_rep()) {
    return closed_chain(k.P, p_adjoint(k, rep), rep);
}

/// λ± = (|T⁽⁻¹⁾|²/4)(ξ^μ ξ̄_μ ± 2iεr).
inline std::pair<Complex, Complex> analytic_eigenvalues(const BiTensorFrame& f, const RegField& rf, double eps,
                                                        double m) {
    const CVec4 xi = regularized_xi(f.wf, rf, eps);
    const Complex xx = (xi.transpose() * f.wf.g_x.inverse().cast<Complex>() * xi.conjugate())(0);
    const double r = temporal_radial(f.wf, rf).r;
    const double a = std::norm(t_value(-1, sigma_eps(f.wf.sigma, rf.value(eps), eps), m)) / 4;
    return {a * (xx + Complex(0, 2 * eps * r)), a * (xx - Complex(0, 2 * eps * r))};
}

/// Λ± = ½ ± c_{μν}Σ^{μν}/(4iεr') with c from the full ξ and εr' = sqrt(-c·c/2).
inline std::pair<SpinMatrix, SpinMatrix> eigenspace_projectors(const BiTensorFrame& f, const CVec4& xi,
                                                               const DiracRep& rep = dirac_rep()) {
    const Mat4 c = c_exact(xi);
    const double cc = c_contract(c, f.wf.g_x);
    const double er = std::sqrt(std::max(-cc / 2, 0.0));
    if (!(er > 1e-10 * xi.squaredNorm())) throw RegularizationError("c·c vanishes: degenerate closed chain");
    const auto g = gammas_at_x(f, rep);
    SpinMatrix cs = SpinMatrix::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (a != b) cs += c(a, b) * sigma_munu(g, a, b);
    const SpinMatrix I = SpinMatrix::Identity();
    const SpinMatrix d = cs / Complex(0, 4 * er);
    return {0.5 * I + d, 0.5 * I - d};
}

/// Largest deviation from the projector algebra: Λ₊ + Λ₋ = 1, Λ² = Λ, Λ₊Λ₋ = 0.
inline double projector_algebra_defect(const ChainSpectrum& s) {
    const SpinMatrix I = SpinMatrix::Identity();
    const auto& P = s.proj_plus;
    const auto& M = s.proj_minus;
    return std::max({(P + M - I).cwiseAbs().maxCoeff(), (P * P - P).cwiseAbs().maxCoeff(),
                     (M * M - M).cwiseAbs().maxCoeff(), (P * M).cwiseAbs().maxCoeff()});
}

}  // namespace cfs
