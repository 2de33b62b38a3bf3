#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "muscat/sizing.hpp"
#include "test_helpers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace muscat;
using testing::synthetic_scene;

namespace {

Mat3 spd(std::mt19937_64& gen, double scale) {
    Mat3 A;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = 2.0 * detail::uniform01(gen) - 1.0;
    return scale * (A * A.transpose() + 3.0 * Mat3::Identity());
}

const std::vector<Vec3> kCenters = {Vec3(0.412, 0.237, -0.289), Vec3(-0.381, -0.414, 0.296),
                                    Vec3(0.067, 0.453, 0.448)};

Scene standard_scene() {
    const ElasticMedium med = make_medium(2.0, 1.0, 2.0 * pi);
    std::mt19937_64 gen(59);
    return synthetic_scene(med, kCenters, {spd(gen, 0.05), spd(gen, 0.05), spd(gen, 0.05)});
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

TEST_CASE("recover_B inverts the factorization on noiseless data") {
    const Scene scene = standard_scene();
    const DirectionSet ds = direction_set(30, DirectionScheme::fibonacci());
    const Eigen::MatrixXcd Bcal_true = assemble_system(scene).inverse();

    for (const char* name : {"PP", "ShSh", "PSv", "SvP"}) {
        const Channel ch = parse_channel(name);
        const ResponseMatrix rm = response_matrix(scene, ch, ds);
        const RecoveredScattering rs = recover_B(rm, ds, kCenters, scene.medium);
        CHECK((rs.Bcal - Bcal_true).norm() <= 1e-8 * Bcal_true.norm());
        CHECK(rs.cond_Ht >= 1.0);
        CHECK(rs.cond_Hr >= 1.0);
    }
}

TEST_CASE("single scatterer: Bcal is minus the capacitance") {
    const ElasticMedium med = make_medium(2.0, 1.0, 2.0 * pi);
    const double c = 0.37;
    const Scene scene = synthetic_scene(med, {Vec3(0.1, -0.2, 0.05)}, {c * Mat3::Identity()});
    const DirectionSet ds = direction_set(12, DirectionScheme::fibonacci());
    const ResponseMatrix rm =
        response_matrix(scene, Channel{Polarization::P, Polarization::P}, ds);
    const RecoveredScattering rs = recover_B(rm, ds, {Vec3(0.1, -0.2, 0.05)}, med);
    CHECK((rs.Bcal + c * Eigen::MatrixXcd::Identity(3, 3)).norm() <= 1e-10);

    const auto caps = extract_capacitances(rs);
    REQUIRE(caps.size() == 1);
    CHECK(std::abs(caps[0].cap.C(0, 0) - c) <= 1e-10);
    CHECK(caps[0].imag_fraction <= 1e-10);
    CHECK(caps[0].spd);
    CHECK(caps[0].cap.provenance == CapacitanceMatrix::Provenance::Recovered);
}

TEST_CASE("perturbing one center degrades the recovery by an order of magnitude") {
    const Scene scene = standard_scene();
    const DirectionSet ds = direction_set(30, DirectionScheme::fibonacci());
    const Eigen::MatrixXcd Bcal_true = assemble_system(scene).inverse();
    const ResponseMatrix rm =
        response_matrix(scene, Channel{Polarization::P, Polarization::P}, ds);

    const double exact_err =
        (recover_B(rm, ds, kCenters, scene.medium).Bcal - Bcal_true).norm() / Bcal_true.norm();

    std::vector<Vec3> wrong = kCenters;
    wrong[1] += Vec3(0.1, 0, 0) * scene.medium.shear_wavelength(); // 0.1 wavelength
    const double wrong_err =
        (recover_B(rm, ds, wrong, scene.medium).Bcal - Bcal_true).norm() / Bcal_true.norm();
    CHECK(wrong_err >= 10.0 * exact_err);
}

TEST_CASE("capacitance round trip through the far-field data") {
    const Scene scene = standard_scene();
    const DirectionSet ds = direction_set(30, DirectionScheme::fibonacci());
    const ResponseMatrix rm =
        response_matrix(scene, Channel{Polarization::SH, Polarization::SH}, ds);

    SUBCASE("noiseless: 1e-8 relative") {
        const RecoveredScattering rs = recover_B(rm, ds, kCenters, scene.medium);
        const auto caps = extract_capacitances(rs);
        REQUIRE(caps.size() == 3);
        for (int m = 0; m < 3; ++m) {
            const Mat3& truth = scene.capacitances[m].C;
            CHECK((caps[m].cap.C - truth).norm() <= 1e-8 * truth.norm());
            CHECK(caps[m].imag_fraction <= 1e-8);
        }
    }
    SUBCASE("one percent noise: five percent median") {
        std::vector<double> errs;
        for (int seed = 0; seed < 20; ++seed) {
            const ResponseMatrix noisy = add_noise(rm, 0.01, 900 + seed);
            const auto caps = extract_capacitances(recover_B(noisy, ds, kCenters, scene.medium));
            double worst = 0.0;
            for (int m = 0; m < 3; ++m) {
                const Mat3& truth = scene.capacitances[m].C;
                worst = std::max(worst, (caps[m].cap.C - truth).norm() / truth.norm());
            }
            errs.push_back(worst);
        }
        CHECK(median(errs) <= 0.05);
    }
}

TEST_CASE("recover_B input validation") {
    const Scene scene = standard_scene();
    const DirectionSet ds = direction_set(30, DirectionScheme::fibonacci());
    const ResponseMatrix rm =
        response_matrix(scene, Channel{Polarization::P, Polarization::P}, ds);

    SUBCASE("duplicate centers lose rank") {
        std::vector<Vec3> dup = kCenters;
        dup[2] = dup[0];
        CHECK_THROWS_WITH_AS(recover_B(rm, ds, dup, scene.medium),
                             doctest::Contains("rank deficient"), numerical_error);
    }
    SUBCASE("too few directions") {
        const DirectionSet small = direction_set(8, DirectionScheme::fibonacci());
        ResponseMatrix rm_small = rm;
        rm_small.F = Eigen::MatrixXcd::Identity(8, 8);
        rm_small.dirs = small;
        CHECK_THROWS_AS(recover_B(rm_small, small, kCenters, scene.medium), parameter_error);
    }
}

TEST_CASE("non-positive-definite extraction is flagged but returned") {
    RecoveredScattering rs;
    rs.centers = {Vec3::Zero()};
    rs.channel = Channel{Polarization::P, Polarization::P};
    rs.Bcal = (0.4 * Mat3::Identity()).cast<complex>(); // +C instead of -C
    const auto caps = extract_capacitances(rs);
    REQUIRE(caps.size() == 1);
    CHECK_FALSE(caps[0].spd);
    CHECK(!caps[0].warning.empty());
    CHECK((caps[0].cap.C + 0.4 * Mat3::Identity()).norm() <= 1e-12);
}

TEST_CASE("size interval closed form and acoustic bracket") {
    const ElasticMedium med = make_medium(2.0, 1.0, 1.0);
    CapacitanceMatrix cap;
    cap.C = 0.8 * Mat3::Identity();

    const SizeInterval si = size_interval(cap, med, 1.0, 1.0);
    CHECK(si.lower == doctest::Approx(0.2).epsilon(1e-14));  // c / (lambda + 2 mu)
    CHECK(si.upper == doctest::Approx(0.8).epsilon(1e-14));  // c / mu
    CHECK_FALSE(si.inverted);
    CHECK(si.lambda_min == doctest::Approx(0.8));
    CHECK(si.lambda_max == doctest::Approx(0.8));

    SUBCASE("poor constants invert the interval and are flagged") {
        const SizeInterval bad = size_interval(cap, med, 10.0, 1.0);
        CHECK(bad.inverted);
        CHECK(bad.lower > bad.upper);
    }
    SUBCASE("non-SPD capacitance is rejected") {
        CapacitanceMatrix npd;
        npd.C = -Mat3::Identity();
        CHECK_THROWS_AS(size_interval(npd, med, 1.0, 1.0), parameter_error);
    }
}

TEST_CASE("acoustic bracket contains the acoustic capacitance") {
    const ElasticMedium med = make_medium(2.0, 1.0, 1.0);
    const SurfaceMesh shapes[] = {make_sphere(1.0, 2), make_box(Vec3(1, 1, 1), 2),
                                  make_ellipsoid(Vec3(2, 1, 1), 2)};
    for (const auto& mesh : shapes) {
        const double ca = acoustic_capacitance(mesh);
        const CapacitanceMatrix cap = elastic_capacitance(mesh, med.lambda, med.mu);
        const SizeInterval si = size_interval(cap, med, 1.0, 1.0);
        CHECK(si.acoustic_lower <= ca * 1.01);
        CHECK(si.acoustic_upper >= ca * 0.99);
    }
}

TEST_CASE("convex bounds scale linearly with the body size") {
    const ElasticMedium med = make_medium(2.0, 1.0, 1.0);
    CapacitanceMatrix cap;
    Mat3 C;
    C << 1.0, 0.1, 0.0, 0.1, 1.3, 0.05, 0.0, 0.05, 0.9;
    cap.C = C;
    const ConvexBounds b1 = convex_bounds(cap, med, 0.8, 2.0);
    CapacitanceMatrix cap2;
    cap2.C = 2.0 * C; // eps doubled scales every eigenvalue by 2
    const ConvexBounds b2 = convex_bounds(cap2, med, 0.8, 2.0);
    CHECK(b2.R_i_upper == doctest::Approx(2.0 * b1.R_i_upper).epsilon(1e-13));
    CHECK(b2.R_e_lower == doctest::Approx(2.0 * b1.R_e_lower).epsilon(1e-13));
}

TEST_CASE("calibration on the unit sphere pins the binding inequalities") {
    const ElasticMedium med = make_medium(2.0, 1.0, 1.0);
    const SurfaceMesh sphere = make_sphere(1.0, 2);
    const LipConstants lc = calibrate_constants({sphere}, med);
    const CapacitanceMatrix cap = elastic_capacitance(sphere, med.lambda, med.mu);
    const double area = sphere.total_area();
    const auto [Ri, Re] = radii(sphere);

    const SizeInterval si = size_interval(cap, med, lc.c_lip, lc.C_lip);
    CHECK(si.lower <= area * (1.0 + 1e-9));
    CHECK(si.upper >= area * (1.0 - 1e-9));

    const ConvexBounds cb = convex_bounds(cap, med, lc.c_lip, lc.C_lip);
    CHECK(cb.R_i_upper >= Ri * (1.0 - 1e-9));
    CHECK(cb.R_e_lower <= Re * (1.0 + 1e-9));

    // the min/max construction makes at least one inequality tight per constant
    const bool c_tight_perimeter = std::abs(si.lower - area) <= 1e-9 * area;
    const bool c_tight_thickness = std::abs(cb.R_i_upper - Ri) <= 1e-9 * Ri;
    CHECK((c_tight_perimeter || c_tight_thickness));
    const bool C_tight_perimeter = std::abs(si.upper - area) <= 1e-9 * area;
    const bool C_tight_length = std::abs(cb.R_e_lower - Re) <= 1e-9 * Re;
    CHECK((C_tight_perimeter || C_tight_length));
}

TEST_CASE("family calibration keeps every member inside its own bounds") {
    const ElasticMedium med = make_medium(2.0, 1.0, 1.0);
    const std::vector<SurfaceMesh> family = {make_sphere(1.0, 2), make_box(Vec3(1, 1, 1), 2),
                                             make_ellipsoid(Vec3(2, 1, 1), 2)};
    const LipConstants lc = calibrate_constants(family, med);
    for (const auto& mesh : family) {
        const CapacitanceMatrix cap = elastic_capacitance(mesh, med.lambda, med.mu);
        const double area = mesh.total_area();
        const auto [Ri, Re] = radii(mesh);
        const SizeInterval si = size_interval(cap, med, lc.c_lip, lc.C_lip);
        CHECK(si.lower <= area * (1.0 + 1e-9));
        CHECK(si.upper >= area * (1.0 - 1e-9));
        const ConvexBounds cb = convex_bounds(cap, med, lc.c_lip, lc.C_lip);
        CHECK(cb.R_i_upper >= Ri * (1.0 - 1e-9));
        CHECK(cb.R_e_lower <= Re * (1.0 + 1e-9));
    }

    SUBCASE("widening the family can only widen the intervals") {
        std::vector<SurfaceMesh> wider = family;
        wider.push_back(make_ellipsoid(Vec3(4, 1, 1), 2));
        const LipConstants lw = calibrate_constants(wider, med);
        CHECK(lw.c_lip <= lc.c_lip * (1.0 + 1e-12));
        CHECK(lw.C_lip >= lc.C_lip * (1.0 - 1e-12));
    }
    SUBCASE("empty family is rejected") {
        CHECK_THROWS_AS(calibrate_constants({}, med), parameter_error);
    }
}
