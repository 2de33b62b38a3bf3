#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "muscat/green.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace muscat;

namespace {

// Free-space Helmholtz fundamental solution, the oracle's only ingredient.
complex helmholtz_phi(double kappa, const Vec3& x, const Vec3& y) {
    const double r = (x - y).norm();
    return std::exp(imag_unit * kappa * r) / (4.0 * pi * r);
}

// Independent finite-difference oracle for one Kupradze entry:
// (1/mu) Phi_ks delta_ij + (1/omega^2) d_i d_j [Phi_ks - Phi_kp],
// second derivatives by nested central differences of Phi itself.
complex kupradze_entry_fd(int i, int j, const Vec3& x, const Vec3& y, const ElasticMedium& m,
                          double h) {
    auto psi = [&](const Vec3& p) {
        return helmholtz_phi(m.kappa_s, p, y) - helmholtz_phi(m.kappa_p, p, y);
    };
    complex dd;
    if (i == j) {
        const Vec3 ei = Vec3::Unit(i);
        dd = (psi(x + h * ei) - 2.0 * psi(x) + psi(x - h * ei)) / (h * h);
    } else {
        const Vec3 ei = Vec3::Unit(i), ej = Vec3::Unit(j);
        dd = (psi(x + h * ei + h * ej) - psi(x + h * ei - h * ej) - psi(x - h * ei + h * ej) +
              psi(x - h * ei - h * ej)) /
             (4.0 * h * h);
    }
    complex out = dd / (m.omega * m.omega);
    if (i == j) out += helmholtz_phi(m.kappa_s, x, y) / m.mu;
    return out;
}

} // namespace

TEST_CASE("kupradze agrees with the finite-difference oracle") {
    const ElasticMedium m = make_medium(0.0, 1.0, 1.0);
    const Vec3 y = Vec3::Zero();
    const Vec3 x(2, 0, 0);
    const CMat3 G = kupradze(x, y, m);
    const complex oracle = kupradze_entry_fd(0, 0, x, y, m, 1e-4);
    CHECK(std::abs(G(0, 0) - oracle) <= 1e-6 * std::abs(oracle));

    // off-diagonal entries at a generic separation
    const Vec3 x2(0.9, -0.4, 0.7);
    const CMat3 G2 = kupradze(x2, y, m);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const complex o = kupradze_entry_fd(i, j, x2, y, m, 1e-4);
            CHECK(std::abs(G2(i, j) - o) <= 1e-5 * G2.norm());
        }
}

TEST_CASE("kupradze reciprocity on random pairs") {
    const ElasticMedium m = make_medium(2.0, 1.0, pi);
    std::mt19937_64 gen(11);
    for (int i = 0; i < 100; ++i) {
        const Vec3 x = testing::random_point(gen, 2.0);
        Vec3 y = testing::random_point(gen, 2.0);
        if ((x - y).norm() < 1e-6) y += Vec3(0.5, 0, 0);
        const CMat3 A = kupradze(x, y, m);
        const CMat3 B = kupradze(y, x, m);
        CHECK((A - B.transpose()).norm() <= 1e-14 * A.norm());
        CHECK((A - A.transpose()).norm() <= 1e-14 * A.norm());
    }
}

TEST_CASE("kupradze singularity and static-case errors") {
    const ElasticMedium m = make_medium(2.0, 1.0, 1.0);
    CHECK_THROWS_AS(kupradze(Vec3(1, 2, 3), Vec3(1, 2, 3), m), parameter_error);
    const ElasticMedium still = make_medium(2.0, 1.0, 0.0);
    CHECK_THROWS_WITH_AS(kupradze(Vec3(1, 0, 0), Vec3::Zero(), still),
                         doctest::Contains("kelvin"), parameter_error);
}

TEST_CASE("kupradze converges to kelvin at rate O(omega)") {
    const double lambda = 2.0, mu = 1.0;
    const Vec3 x(0.7, 0.3, 0.2), y = Vec3::Zero();
    const Mat3 K = kelvin(x, y, lambda, mu);
    double prev = 0.0;
    double errs[3];
    const double omegas[3] = {1e-2, 1e-3, 1e-4};
    for (int k = 0; k < 3; ++k) {
        const ElasticMedium m = make_medium(lambda, mu, omegas[k]);
        const CMat3 G = kupradze(x, y, m);
        errs[k] = (G - K.cast<complex>()).cwiseAbs().maxCoeff();
        (void)prev;
    }
    // one digit per decade of omega
    CHECK(errs[0] / errs[1] == doctest::Approx(10.0).epsilon(0.2));
    CHECK(errs[1] / errs[2] == doctest::Approx(10.0).epsilon(0.2));
    const double K_rate = errs[0] / omegas[0];
    for (int k = 0; k < 3; ++k) CHECK(errs[k] <= 1.5 * K_rate * omegas[k]);
}

TEST_CASE("small-argument series branch joins the direct formula smoothly") {
    // Below kappa_s * r = 1e-4 the series path is taken; the difference to
    // kelvin must stay linear in omega across the switch.
    const double lambda = 2.0, mu = 1.0;
    const Vec3 x(0.8, 0, 0), y = Vec3::Zero();
    const Mat3 K = kelvin(x, y, lambda, mu);
    const double w_series = 1e-4;  // kappa_s * r = 8e-5  -> series
    const double w_direct = 1.5e-4; // kappa_s * r = 1.2e-4 -> direct
    const CMat3 Gs = kupradze(x, y, make_medium(lambda, mu, w_series));
    const CMat3 Gd = kupradze(x, y, make_medium(lambda, mu, w_direct));
    const CMat3 slope_s = (Gs - K.cast<complex>()) / w_series;
    const CMat3 slope_d = (Gd - K.cast<complex>()) / w_direct;
    CHECK((slope_s - slope_d).norm() <= 1e-3 * slope_s.norm());
}

TEST_CASE("kupradze columns satisfy the Navier equation") {
    const ElasticMedium m = make_medium(2.0, 1.0, pi);
    const Vec3 y = Vec3::Zero();
    const Vec3 x(1.1, -0.6, 0.8);
    const double h = 1e-3;
    for (int k = 0; k < 3; ++k) {
        auto column = [&](const Vec3& p) { return CVec3(kupradze(p, y, m).col(k)); };
        const double res = testing::navier_residual(column, x, m, h);
        const double scale = m.omega * m.omega * column(x).norm();
        CHECK(res < 1e-4 * scale);
    }
}

TEST_CASE("kelvin closed-form values") {
    SUBCASE("lambda = 0, mu = 1 diagonal entry") {
        const Mat3 K = kelvin(Vec3(1, 0, 0), Vec3::Zero(), 0.0, 1.0);
        CHECK(K(0, 0) == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-14));
        // a = 3/(16 pi) on the transverse diagonal
        CHECK(K(1, 1) == doctest::Approx(3.0 / (16.0 * pi)).epsilon(1e-14));
    }
    SUBCASE("axis-aligned separation has no off-diagonal coupling") {
        const Mat3 K = kelvin(Vec3(0, 2, 0), Vec3::Zero(), 2.0, 1.0);
        CHECK(K(1, 2) == 0.0);
        CHECK(K(0, 1) == 0.0);
    }
    SUBCASE("homogeneity of degree -1") {
        const Mat3 K1 = kelvin(Vec3(0.3, 0.4, 0.5), Vec3::Zero(), 2.0, 1.0);
        const Mat3 K2 = kelvin(2.0 * Vec3(0.3, 0.4, 0.5), Vec3::Zero(), 2.0, 1.0);
        CHECK((K2 - 0.5 * K1).norm() < 1e-14 * K1.norm());
    }
    SUBCASE("singular point rejected") {
        CHECK_THROWS_AS(kelvin(Vec3::Zero(), Vec3::Zero(), 2.0, 1.0), parameter_error);
    }
}

TEST_CASE("far_kernel closed forms and projector identities") {
    const ElasticMedium m = make_medium(2.0, 1.0, 1.0); // c_p = 2
    SUBCASE("P kernel at y = 0") {
        const CMat3 K = far_kernel(WavePart::P, Direction(Vec3(1, 0, 0)), Vec3::Zero(), m);
        CMat3 expected = CMat3::Zero();
        expected(0, 0) = 1.0 / (16.0 * pi);
        CHECK((K - expected).norm() < 1e-15);
    }
    SUBCASE("S kernel annihilates the radial direction") {
        std::mt19937_64 gen(3);
        for (int i = 0; i < 20; ++i) {
            const Direction xh = testing::random_direction(gen);
            const Vec3 y = testing::random_point(gen, 2.0);
            const CMat3 K = far_kernel(WavePart::S, xh, y, m);
            CHECK((xh.vec().transpose().cast<complex>() * K).norm() < 1e-14 * K.norm());
        }
    }
}

TEST_CASE("far kernels are the leading far-field of kupradze") {
    const ElasticMedium m = make_medium(2.0, 1.0, pi);
    const Direction xh = Direction::normalized(Vec3(1.0, 0.8, -0.4));
    const Vec3 y(0.2, -0.1, 0.3);
    double prev_err = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double R = std::pow(10.0, 2 + k);
        const Vec3 x = R * xh.vec();
        const CMat3 G = kupradze(x, y, m);
        const CMat3 model =
            far_kernel(WavePart::P, xh, y, m) * std::exp(imag_unit * m.kappa_p * R) / R +
            far_kernel(WavePart::S, xh, y, m) * std::exp(imag_unit * m.kappa_s * R) / R;
        const double err = R * (G - model).norm();
        if (k > 0) CHECK(err < prev_err / 5.0); // ~1/R decay of the remainder
        prev_err = err;
    }
}
