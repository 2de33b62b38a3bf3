#ifndef MUSCAT_MEDIUM_HPP
#define MUSCAT_MEDIUM_HPP

#include "muscat/types.hpp"

#include <cmath>
#include <string>
#include <utility>

// Homogeneous isotropic elastic background: Lame constants, wave speeds and
// wavenumbers, plane incident waves and the shear polarization frame.

namespace muscat {

struct ElasticMedium {
    double lambda = 0.0;
    double mu = 0.0;
    double omega = 0.0;
    // derived
    double c_p = 0.0;    // pressure speed sqrt(lambda + 2 mu)
    double c_s = 0.0;    // shear speed sqrt(mu)
    double kappa_p = 0.0;
    double kappa_s = 0.0;

    double shear_wavelength() const {
        if (kappa_s <= 0.0) throw parameter_error("shear_wavelength: requires omega > 0");
        return 2.0 * pi / kappa_s;
    }
};

inline ElasticMedium make_medium(double lambda, double mu, double omega) {
    if (!(mu > 0.0))
        throw parameter_error("make_medium: mu > 0 violated (mu = " + std::to_string(mu) + ")");
    if (!(3.0 * lambda + 2.0 * mu > 0.0))
        throw parameter_error("make_medium: 3*lambda + 2*mu > 0 violated (3*lambda + 2*mu = " +
                              std::to_string(3.0 * lambda + 2.0 * mu) + ")");
    if (!(omega >= 0.0))
        throw parameter_error("make_medium: omega >= 0 violated (omega = " +
                              std::to_string(omega) + ")");
    ElasticMedium m;
    m.lambda = lambda;
    m.mu = mu;
    m.omega = omega;
    m.c_p = std::sqrt(lambda + 2.0 * mu);
    m.c_s = std::sqrt(mu);
    m.kappa_p = omega / m.c_p;
    m.kappa_s = omega / m.c_s;
    return m;
}

namespace detail {
// Below this squared in-plane radius a direction counts as a pole of the
// rotation formula (which divides by r^2).
inline constexpr double pole_r2_threshold = 1e-14;
}

// Rotation taking the direction theta to e3. At the poles the formula is
// singular; the convention is theta = +e3 -> identity and
// theta = -e3 -> diag(1, -1, -1).
inline Mat3 rotation_to_e3(const Direction& theta) {
    const Vec3& t = theta.vec();
    const double r2 = t.x() * t.x() + t.y() * t.y();
    if (r2 < detail::pole_r2_threshold) {
        Mat3 R = Mat3::Identity();
        if (t.z() < 0.0) {
            R(1, 1) = -1.0;
            R(2, 2) = -1.0;
        }
        return R;
    }
    const double tx = t.x(), ty = t.y(), tz = t.z();
    Mat3 R;
    R(0, 0) = (ty * ty + tx * tx * tz) / r2;
    R(0, 1) = -tx * ty * (1.0 - tz) / r2;
    R(0, 2) = -tx;
    R(1, 0) = R(0, 1);
    R(1, 1) = (tx * tx + ty * ty * tz) / r2;
    R(1, 2) = -ty;
    R(2, 0) = tx;
    R(2, 1) = ty;
    R(2, 2) = tz;
    return R;
}

// Horizontal and vertical shear directions (R3^T e1, R3^T e2). Together with
// theta they form a right-handed orthonormal triple.
inline std::pair<Direction, Direction> shear_polarizations(const Direction& theta) {
    const Mat3 R = rotation_to_e3(theta);
    const Vec3 h = R.transpose().col(0);
    const Vec3 v = R.transpose().col(1);
    return {Direction::normalized(h), Direction::normalized(v)};
}

// Incident plane-wave kind: pressure, one of the two shear polarizations, or
// a normalized shear combination alpha * h + beta * v.
class WaveKind {
public:
    enum class Tag { P, SH, SV, S };

    static WaveKind P() { return WaveKind(Tag::P, 0.0, 0.0); }
    static WaveKind SH() { return WaveKind(Tag::SH, 0.0, 0.0); }
    static WaveKind SV() { return WaveKind(Tag::SV, 0.0, 0.0); }
    static WaveKind S(double alpha, double beta) {
        if (alpha == 0.0 && beta == 0.0)
            throw parameter_error("WaveKind::S: (alpha, beta) = (0, 0) is not a shear wave");
        return WaveKind(Tag::S, alpha, beta);
    }

    Tag tag() const { return tag_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

private:
    WaveKind(Tag t, double a, double b) : tag_(t), alpha_(a), beta_(b) {}
    Tag tag_;
    double alpha_, beta_;
};

// Unit-amplitude plane incident wave evaluated at x. Pressure waves carry the
// polarization theta and wavenumber kappa_p; shear waves carry a polarization
// orthogonal to theta and wavenumber kappa_s.
inline CVec3 incident_field(const WaveKind& kind, const Direction& theta, const Vec3& x,
                            const ElasticMedium& m) {
    const Vec3& t = theta.vec();
    switch (kind.tag()) {
    case WaveKind::Tag::P:
        return std::exp(imag_unit * m.kappa_p * t.dot(x)) * t.cast<complex>();
    case WaveKind::Tag::SH: {
        const auto [h, v] = shear_polarizations(theta);
        (void)v;
        return std::exp(imag_unit * m.kappa_s * t.dot(x)) * h.vec().cast<complex>();
    }
    case WaveKind::Tag::SV: {
        const auto [h, v] = shear_polarizations(theta);
        (void)h;
        return std::exp(imag_unit * m.kappa_s * t.dot(x)) * v.vec().cast<complex>();
    }
    case WaveKind::Tag::S: {
        const auto [h, v] = shear_polarizations(theta);
        const Vec3 comb = kind.alpha() * h.vec() + kind.beta() * v.vec();
        return std::exp(imag_unit * m.kappa_s * t.dot(x)) * (comb / comb.norm()).cast<complex>();
    }
    }
    throw parameter_error("incident_field: unknown wave kind");
}

} // namespace muscat

#endif
