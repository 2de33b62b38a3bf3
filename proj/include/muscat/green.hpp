#ifndef MUSCAT_GREEN_HPP
#define MUSCAT_GREEN_HPP

#include "muscat/medium.hpp"
#include "muscat/types.hpp"

#include <cmath>

// Fundamental solutions of the Navier equation: the dynamic Kupradze tensor,
// its static (Kelvin) limit, and the two far-field kernels.
//
// The Kupradze tensor
//     (1/mu) Phi_ks I + (1/omega^2) grad grad^T [Phi_ks - Phi_kp],
// with Phi_k(r) = exp(i k r) / (4 pi r), reduces for the radial difference to
// the closed form A(r) I + B(r) rhat rhat^T where, writing u = kappa r,
//     A = Phi_ks/mu + [g(u_s) - g(u_p)] / (4 pi omega^2 r^3),
//     B =            [f(u_s) - f(u_p)] / (4 pi omega^2 r^3),
//     g(u) = e^{iu} (iu - 1),   f(u) = e^{iu} (3 - 3iu - u^2).
// Both g and f differences cancel to O(u^2); below kappa_s r = 1e-4 they are
// evaluated by their Taylor series in (iu) to avoid the cancellation.

namespace muscat {

namespace detail {

inline constexpr double kupradze_series_threshold = 1e-4;

// g(u) = sum_k g_k (iu)^k with g_k = 1/(k-1)! - 1/k!
// f(u) = sum_k f_k (iu)^k with f_k = 3/k! - 3/(k-1)! + 1/(k-2)!
// The k = 0, 1 terms cancel in the s-p differences, so sums start at k = 2.
inline void kupradze_series(double us, double up, complex& sum_g, complex& sum_f) {
    sum_g = complex(0.0, 0.0);
    sum_f = complex(0.0, 0.0);
    const complex ius(0.0, us), iup(0.0, up);
    complex pow_s = ius * ius, pow_p = iup * iup;
    double fact_km2 = 1.0, fact_km1 = 1.0, fact_k = 2.0; // (k-2)!, (k-1)!, k! at k = 2
    for (int k = 2; k <= 12; ++k) {
        const double gk = 1.0 / fact_km1 - 1.0 / fact_k;
        const double fk = 3.0 / fact_k - 3.0 / fact_km1 + 1.0 / fact_km2;
        const complex diff = pow_s - pow_p;
        sum_g += gk * diff;
        sum_f += fk * diff;
        pow_s *= ius;
        pow_p *= iup;
        fact_km2 = fact_km1;
        fact_km1 = fact_k;
        fact_k *= static_cast<double>(k + 1);
    }
}

} // namespace detail

// Dynamic fundamental tensor Gamma^omega(x, y). Symmetric, depends on x - y
// only through r and rhat rhat^T.
inline CMat3 kupradze(const Vec3& x, const Vec3& y, const ElasticMedium& m) {
    if (m.omega <= 0.0)
        throw parameter_error("kupradze: omega = 0 is the static case; use kelvin instead");
    const Vec3 d = x - y;
    const double r = d.norm();
    if (r == 0.0) throw parameter_error("kupradze: evaluation at the singular point x = y");

    const double us = m.kappa_s * r;
    const double up = m.kappa_p * r;
    const double w2 = m.omega * m.omega;
    const complex phi_s = std::exp(imag_unit * us) / (4.0 * pi * r);

    complex A, B;
    if (us < detail::kupradze_series_threshold) {
        complex sum_g, sum_f;
        detail::kupradze_series(us, up, sum_g, sum_f);
        const double scale = 1.0 / (4.0 * pi * w2 * r * r * r);
        A = phi_s / m.mu + sum_g * scale;
        B = sum_f * scale;
    } else {
        const complex es = std::exp(imag_unit * us);
        const complex ep = std::exp(imag_unit * up);
        const double scale = 1.0 / (4.0 * pi * w2 * r * r * r);
        A = phi_s / m.mu +
            (es * (imag_unit * us - 1.0) - ep * (imag_unit * up - 1.0)) * scale;
        B = (es * (3.0 - 3.0 * imag_unit * us - us * us) -
             ep * (3.0 - 3.0 * imag_unit * up - up * up)) *
            scale;
    }

    const Vec3 rhat = d / r;
    CMat3 out = A * CMat3::Identity();
    out += B * (rhat * rhat.transpose()).cast<complex>();
    return out;
}

// Static (omega -> 0) limit: the Kelvin tensor
//     Gamma^0 = a I / r + b rhat rhat^T / r,
//     a = (lambda + 3 mu) / (8 pi mu (lambda + 2 mu)),
//     b = (lambda + mu)   / (8 pi mu (lambda + 2 mu)).
inline Mat3 kelvin(const Vec3& x, const Vec3& y, double lambda, double mu) {
    if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0))
        throw parameter_error("kelvin: Lame constraints mu > 0, 3*lambda + 2*mu > 0 violated");
    const Vec3 d = x - y;
    const double r = d.norm();
    if (r == 0.0) throw parameter_error("kelvin: evaluation at the singular point x = y");
    const double denom = 8.0 * pi * mu * (lambda + 2.0 * mu);
    const double a = (lambda + 3.0 * mu) / denom;
    const double b = (lambda + mu) / denom;
    const Vec3 rhat = d / r;
    return (a / r) * Mat3::Identity() + (b / r) * (rhat * rhat.transpose());
}

enum class WavePart { P, S };

// Far-field kernels of the Kupradze tensor: the coefficients of
// e^{i kappa |x|} / |x| along a fixed observation direction xhat.
inline CMat3 far_kernel(WavePart part, const Direction& xhat, const Vec3& y,
                        const ElasticMedium& m) {
    if (m.omega <= 0.0) throw parameter_error("far_kernel: requires omega > 0");
    const Vec3& xh = xhat.vec();
    const Mat3 proj = xh * xh.transpose();
    if (part == WavePart::P) {
        const complex phase = std::exp(-imag_unit * m.kappa_p * xh.dot(y));
        return (phase / (4.0 * pi * m.c_p * m.c_p)) * proj.cast<complex>();
    }
    const complex phase = std::exp(-imag_unit * m.kappa_s * xh.dot(y));
    return (phase / (4.0 * pi * m.c_s * m.c_s)) * (Mat3::Identity() - proj).cast<complex>();
}

} // namespace muscat

#endif
