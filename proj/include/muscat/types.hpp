#ifndef MUSCAT_TYPES_HPP
#define MUSCAT_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <stdexcept>
#include <string>

namespace muscat {

using complex = std::complex<double>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr complex imag_unit{0.0, 1.0};

// Base of the toolkit's exception hierarchy.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid arguments, violated preconditions, malformed configuration.
struct parameter_error : error {
    using error::error;
};

// Singular systems, degenerate data, failed factorizations.
struct numerical_error : error {
    using error::error;
};

// File and serialization problems.
struct io_error : error {
    using error::error;
};

// Unit observation/incidence direction on the sphere.
class Direction {
public:
    explicit Direction(const Vec3& v) : v_(v) {
        if (std::abs(v.norm() - 1.0) > 1e-12)
            throw parameter_error("Direction: |v| = " + std::to_string(v.norm()) +
                                  " deviates from 1 by more than 1e-12");
    }

    static Direction normalized(const Vec3& v) {
        const double n = v.norm();
        if (n == 0.0) throw parameter_error("Direction: cannot normalize the zero vector");
        return Direction(Vec3(v / n));
    }

    const Vec3& vec() const { return v_; }
    operator const Vec3&() const { return v_; }
    double x() const { return v_.x(); }
    double y() const { return v_.y(); }
    double z() const { return v_.z(); }

private:
    Vec3 v_;
};

namespace detail {

// Deterministic uniform in [0,1) built from the raw 64-bit stream. The
// standard distributions are implementation-defined, which would break
// bit-identical outputs across standard libraries.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on the deterministic uniforms.
inline double standard_normal(std::mt19937_64& gen) {
    const double u1 = uniform01(gen);
    const double u2 = uniform01(gen);
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * pi * u2);
}

// Standard complex Gaussian, E|g|^2 = 1.
inline complex standard_complex_normal(std::mt19937_64& gen) {
    const double re = standard_normal(gen);
    const double im = standard_normal(gen);
    return complex(re, im) / std::sqrt(2.0);
}

} // namespace detail

} // namespace muscat

#endif
