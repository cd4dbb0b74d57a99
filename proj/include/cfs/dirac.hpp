#pragma once

#include "cfs/types.hpp"

namespace cfs {

/// A flat Dirac representation: gamma[a] with {γ^a, γ^b} = 2η^{ab}.
/// The spin inner product is ≺u|v≻ = u† γ^0 v in every representation
/// provided here (γ^0 Hermitian, γ^i anti-Hermitian).
struct DiracRep {
    std::array<CMat4, 4> gamma;
    std::string name;

    /// γ^5 = i γ^0 γ^1 γ^2 γ^3.
    CMat4 gamma5() const {
        return Complex(0, 1) * gamma[0] * gamma[1] * gamma[2] * gamma[3];
    }
};

namespace detail {
inline std::array<Eigen::Matrix2cd, 3> pauli() {
    const Complex i(0, 1);
    Eigen::Matrix2cd s1, s2, s3;
    s1 << 0, 1, 1, 0;
    s2 << 0, -i, i, 0;
    s3 << 1, 0, 0, -1;
    return {s1, s2, s3};
}
}  // namespace detail

/// Standard Dirac basis.
inline const DiracRep& dirac_rep() {
    static const DiracRep rep = [] {
        DiracRep r;
        r.name = "dirac";
        const auto s = detail::pauli();
        const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
        const Eigen::Matrix2cd Z = Eigen::Matrix2cd::Zero();
        r.gamma[0] << I, Z, Z, -I;
        for (int k = 0; k < 3; ++k) r.gamma[k + 1] << Z, s[k], -s[k], Z;
        return r;
    }();
    return rep;
}

/// Weyl (chiral) basis, used to test representation covariance.
inline const DiracRep& chiral_rep() {
    static const DiracRep rep = [] {
        DiracRep r;
        r.name = "chiral";
        const auto s = detail::pauli();
        const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
        const Eigen::Matrix2cd Z = Eigen::Matrix2cd::Zero();
        r.gamma[0] << Z, I, I, Z;
        for (int k = 0; k < 3; ++k) r.gamma[k + 1] << Z, s[k], -s[k], Z;
        return r;
    }();
    return rep;
}

/// Adjoint with respect to the spin inner product: M* = γ^0 M† γ^0.
inline SpinMatrix spin_adjoint(const SpinMatrix& m, const DiracRep& rep = dirac_rep()) {
    return rep.gamma[0] * m.adjoint() * rep.gamma[0];
}

/// ≺u|v≻ = u† γ^0 v.
inline Complex spin_product(const Spinor& u, const Spinor& v, const DiracRep& rep = dirac_rep()) {
    return u.dot(rep.gamma[0] * v);
}

/// Σ^{μν} = (i/2)[γ^μ, γ^ν] for any set of four gamma matrices.
inline SpinMatrix sigma_munu(const std::array<CMat4, 4>& g, int mu, int nu) {
    return Complex(0, 0.5) * (g[mu] * g[nu] - g[nu] * g[mu]);
}

/// Slash of a complex covector: v_μ γ^μ.
inline SpinMatrix slash(const CVec4& v, const std::array<CMat4, 4>& g) {
    SpinMatrix s = SpinMatrix::Zero();
    for (int mu = 0; mu < 4; ++mu) s += v(mu) * g[mu];
    return s;
}

}  // namespace cfs
