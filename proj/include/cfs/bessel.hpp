#pragma once

#include "cfs/types.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace cfs {

namespace detail {

using LComplex = std::complex<long double>;

/// K_0 and K_1 by the ascending series (digamma form), in extended precision.
inline void bessel_k01_series(Complex zd, Complex& k0, Complex& k1) {
    const LComplex z(zd.real(), zd.imag());
    const LComplex h = z / 2.0L, q = h * h;
    const LComplex lg = std::log(h);
    const long double gamma_e = 0.57721566490153286060651209L;
    // K_0 = -(ln(z/2) + γ) I_0 + Σ H_k q^k/(k!)^2
    // K_1 = 1/z + ln(z/2) I_1 - (z/4) Σ (ψ(k+1)+ψ(k+2)) q^k/(k!(k+1)!)
    LComplex term0 = 1.0L, s0 = 0.0L, i0 = 0.0L;
    LComplex term1 = h, s1 = 0.0L, i1 = 0.0L;
    long double harm = 0.0L;  // H_k
    for (int k = 0; k < 400; ++k) {
        if (k > 0) {
            term0 *= q / (long double)(k * k);
            term1 *= q / (long double)(k * (k + 1));
            harm += 1.0L / k;
        }
        const long double psi1 = harm - gamma_e;                 // ψ(k+1)
        const long double psi2 = harm + 1.0L / (k + 1) - gamma_e;  // ψ(k+2)
        i0 += term0;
        s0 += harm * term0;
        i1 += term1;
        s1 += (psi1 + psi2) * term1;
        if (k > 3 && std::abs(term0) * (1 + harm) < 1e-22L * std::abs(i0) &&
            std::abs(term1) * (2 + harm) < 1e-22L * std::abs(i1))
            break;
    }
    const LComplex K0 = -(lg + gamma_e) * i0 + s0;
    const LComplex K1 = 1.0L / z + lg * i1 - 0.5L * s1;
    k0 = Complex((double)K0.real(), (double)K0.imag());
    k1 = Complex((double)K1.real(), (double)K1.imag());
}

/// K_0 and K_1 by Steed's continued fraction (Temme's CF2 at μ = 0).
inline void bessel_k01_cf(Complex z, Complex& k0, Complex& k1) {
    const double pi = std::acos(-1.0);
    Complex b = 2.0 * (1.0 + z);
    Complex d = 1.0 / b;
    Complex h = d, delh = d;
    Complex q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25;
    Complex q = a1, c = a1;
    double a = -a1;
    Complex s = 1.0 + q * delh;
    int i = 1;
    for (; i < 100000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const Complex qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const Complex dels = q * delh;
        s += dels;
        if (std::abs(dels) < 1e-17 * std::abs(s)) break;
    }
    if (i >= 100000) throw ConvergenceError("bessel_k continued fraction did not converge");
    h = a1 * h;
    k0 = std::sqrt(pi / (2.0 * z)) * std::exp(-z) / s;
    k1 = k0 * (0.5 + z - h) / z;
}

}  // namespace detail

/// Modified Bessel function of the second kind K_ν(z), principal branch.
/// ν must be an integer or half-integer.
inline Complex bessel_k(double nu, Complex z) {
    if (z.imag() == 0.0 && z.real() <= 0.0)
        throw BranchCutError("bessel_k argument on the non-positive real axis");
    const double anu = std::abs(nu);
    const double pi = std::acos(-1.0);
    const double twice = 2 * anu;
    if (std::abs(twice - std::round(twice)) > 1e-12) throw DomainError("bessel_k supports integer and half-integer orders");

    if (std::abs(anu - std::round(anu)) > 0.25) {
        // K_{n+1/2}(z) = sqrt(π/2z) e^{-z} Σ_k (n+k)!/(k!(n-k)!) (2z)^{-k}
        const int n = (int)std::floor(anu);
        Complex sum = 0.0, term = 1.0;
        for (int k = 0; k <= n; ++k) {
            if (k > 0) term *= double((n + k) * (n - k + 1)) / (double(k) * 2.0) / z;
            sum += term;
        }
        return std::sqrt(pi / (2.0 * z)) * std::exp(-z) * sum;
    }

    const int n = (int)std::lround(anu);
    Complex k0, k1;
    if (std::abs(z) <= 9.0 || z.real() < 0.0)
        detail::bessel_k01_series(z, k0, k1);
    else
        detail::bessel_k01_cf(z, k0, k1);
    if (n == 0) return k0;
    Complex km = k0, kc = k1;
    for (int j = 1; j < n; ++j) {
        const Complex kp = km + (2.0 * j) / z * kc;
        km = kc;
        kc = kp;
    }
    return kc;
}

}  // namespace cfs
