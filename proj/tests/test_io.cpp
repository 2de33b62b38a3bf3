#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "muscat/io.hpp"

#include <filesystem>
#include <fstream>

using namespace muscat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

} // namespace

TEST_CASE("load_scene builds capacitances once per distinct shape") {
    const std::string path = std::string(MUSCAT_SCENES_DIR) + "/three_spheres.json";
    const SceneSpec spec = load_scene(path);
    REQUIRE(spec.scene.size() == 3);
    CHECK(spec.scene.medium.c_p == doctest::Approx(2.0));
    for (const auto& cm : spec.scene.capacitances) {
        CHECK(cm.is_spd());
        // shared reference shape: identical scaled capacitance
        CHECK((cm.C - spec.scene.capacitances[0].C).norm() == 0.0);
    }
    CHECK(spec.shapes[0].kind == ShapeDescriptor::Kind::Sphere);
    CHECK_FALSE(spec.domain_diameter.has_value());

    const SceneSpec mixed = load_scene(std::string(MUSCAT_SCENES_DIR) + "/mixed_bodies.json");
    REQUIRE(mixed.scene.size() == 3);
    REQUIRE(mixed.domain_diameter.has_value());
    CHECK(*mixed.domain_diameter == 4.0);
}

TEST_CASE("load_scene resolves OFF paths relative to the scene file") {
    TempDir tmp("muscat_io_off_scene");
    save_off(make_sphere(1.0, 1), (tmp.path / "body.off").string());
    write(tmp.path / "scene.json", R"({
      "version": 1,
      "medium": {"lambda": 2.0, "mu": 1.0, "omega": 3.0},
      "scatterers": [
        {"shape": {"kind": "off", "path": "body.off"}, "epsilon": 0.1, "center": [0, 0, 0]}
      ]})");
    const SceneSpec spec = load_scene((tmp.path / "scene.json").string());
    REQUIRE(spec.scene.size() == 1);
    CHECK(spec.scene.scatterers[0].mesh.panel_count() == 80);
    CHECK(spec.scene.capacitances[0].is_spd());
}

TEST_CASE("load_scene rejects malformed inputs") {
    TempDir tmp("muscat_io_bad_scene");
    SUBCASE("bad version") {
        write(tmp.path / "s.json", R"({"version": 7, "medium": {}, "scatterers": []})");
        CHECK_THROWS_AS(load_scene((tmp.path / "s.json").string()), io_error);
    }
    SUBCASE("violated Lame constraint") {
        write(tmp.path / "s.json", R"({
          "version": 1, "medium": {"lambda": -1.0, "mu": 1.0, "omega": 1.0},
          "scatterers": [{"shape": {"kind": "sphere", "radius": 1.0, "refinement": 0},
                          "epsilon": 0.1, "center": [0,0,0]}]})");
        CHECK_THROWS_AS(load_scene((tmp.path / "s.json").string()), parameter_error);
    }
    SUBCASE("missing field carries a message") {
        write(tmp.path / "s.json", R"({"version": 1, "medium": {"lambda": 1.0},
                                       "scatterers": []})");
        CHECK_THROWS_AS(load_scene((tmp.path / "s.json").string()), io_error);
    }
    SUBCASE("truncated JSON") {
        write(tmp.path / "s.json", R"({"version": 1,)");
        CHECK_THROWS_WITH_AS(load_scene((tmp.path / "s.json").string()),
                             doctest::Contains("parse"), io_error);
    }
}

TEST_CASE("grid specification parsing") {
    const ElasticMedium med = make_medium(2.0, 1.0, 2.0 * pi); // shear wavelength 1
    SUBCASE("absolute units") {
        const ImagingGrid g = parse_grid_spec("box=-1,1,-0.5,0.5,0,2;h=0.5", med);
        CHECK(g.counts[0] == 5);
        CHECK(g.counts[1] == 3);
        CHECK(g.counts[2] == 5);
        CHECK((g.point(0, 0, 0) - Vec3(-1, -0.5, 0)).norm() == 0.0);
    }
    SUBCASE("wavelength units scale box and spacing") {
        const ElasticMedium med2 = make_medium(2.0, 1.0, 4.0 * pi); // wavelength 0.5
        const ImagingGrid g = parse_grid_spec("box=0,1,0,1,0,1;h=0.25;unit=wl", med2);
        CHECK(g.h == doctest::Approx(0.125));
        CHECK(g.counts[0] == 5);
    }
    SUBCASE("malformed specs") {
        CHECK_THROWS_AS(parse_grid_spec("h=0.5", med), parameter_error);
        CHECK_THROWS_AS(parse_grid_spec("box=0,1,0,1,0,1", med), parameter_error);
        CHECK_THROWS_AS(parse_grid_spec("box=0,1,0,1;h=0.5", med), parameter_error);
        CHECK_THROWS_AS(parse_grid_spec("box=0,1,0,1,0,1;h=0.5;unit=feet", med),
                        parameter_error);
        CHECK_THROWS_AS(parse_grid_spec("box=1,0,0,1,0,1;h=0.5", med), parameter_error);
    }
}

TEST_CASE("center lists load from peaks files and plain lists") {
    TempDir tmp("muscat_io_centers");
    write(tmp.path / "peaks.json",
          R"({"peaks": [{"position": [1, 2, 3], "value": 9.0},
                        {"position": [-1, 0, 0.5], "value": 5.0}]})");
    const auto a = load_centers((tmp.path / "peaks.json").string());
    REQUIRE(a.size() == 2);
    CHECK((a[0] - Vec3(1, 2, 3)).norm() == 0.0);

    write(tmp.path / "centers.json", R"({"centers": [[0.1, 0.2, 0.3]]})");
    const auto b = load_centers((tmp.path / "centers.json").string());
    REQUIRE(b.size() == 1);
    CHECK((b[0] - Vec3(0.1, 0.2, 0.3)).norm() == 0.0);

    write(tmp.path / "junk.json", R"({"something": 1})");
    CHECK_THROWS_AS(load_centers((tmp.path / "junk.json").string()), io_error);
    write(tmp.path / "empty.json", R"({"centers": []})");
    CHECK_THROWS_AS(load_centers((tmp.path / "empty.json").string()), io_error);
}

TEST_CASE("infinite diagnostics serialize as null") {
    Scene one;
    one.medium = make_medium(2.0, 1.0, pi);
    one.scatterers.push_back({make_sphere(1.0, 0), 0.01, Vec3::Zero()});
    CapacitanceMatrix cm;
    cm.C = Mat3::Identity();
    one.capacitances.push_back(cm);
    const InvertibilityReport rep = check_invertibility(one, 1.0);
    const nlohmann::json j = invertibility_to_json(rep);
    CHECK(j.at("d").is_null());
    CHECK(j.at("N_Omega").get<long>() == 46);
}

TEST_CASE("pseudospectrum CSV export is stable and complete") {
    TempDir tmp("muscat_io_csv");
    Pseudospectrum ps;
    ps.grid = ImagingGrid::from_box(Vec3(0, 0, 0), Vec3(1, 1, 1), 0.5);
    ps.values.assign(static_cast<std::size_t>(ps.grid.size()), 1.25);
    const fs::path p1 = tmp.path / "a.csv";
    const fs::path p2 = tmp.path / "b.csv";
    save_pseudospectrum_csv(ps, p1.string());
    save_pseudospectrum_csv(ps, p2.string());
    std::ifstream f1(p1), f2(p2);
    const std::string s1((std::istreambuf_iterator<char>(f1)), {});
    const std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
    // header + 27 grid points
    CHECK(std::count(s1.begin(), s1.end(), '\n') == 28);
}
