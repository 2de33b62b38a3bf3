#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "muscat/io.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

// End-to-end runs of the command-line tool. The binary path and the sample
// scene directory come from the build system.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "muscat_cli_log.txt";
    const std::string cmd =
        std::string(MUSCAT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    r.output.assign((std::istreambuf_iterator<char>(in)), {});
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const std::string scene = std::string(MUSCAT_SCENES_DIR) + "/three_spheres.json";

} // namespace

TEST_CASE("simulate writes datasets, diagnostics, and is deterministic") {
    TempDir tmp("muscat_cli_simulate");
    const std::string out1 = (tmp.path / "a").string();
    const std::string out2 = (tmp.path / "b").string();
    const std::string common =
        "simulate --scene " + scene + " --channels PP,ShSh --N 20 --noise 0.01 --seed 7 ";

    const RunResult r1 = run_cli(common + "--out " + out1);
    REQUIRE(r1.exit_code == 0);
    CHECK(fs::exists(fs::path(out1) / "dataset_PP.json"));
    CHECK(fs::exists(fs::path(out1) / "dataset_ShSh.json"));
    CHECK(fs::exists(fs::path(out1) / "diagnostics.json"));

    const RunResult r2 = run_cli(common + "--out " + out2);
    REQUIRE(r2.exit_code == 0);
    CHECK(read_file(fs::path(out1) / "dataset_PP.json") ==
          read_file(fs::path(out2) / "dataset_PP.json"));
    CHECK(read_file(fs::path(out1) / "dataset_ShSh.json") ==
          read_file(fs::path(out2) / "dataset_ShSh.json"));

    const json diag = json::parse(read_file(fs::path(out1) / "diagnostics.json"));
    CHECK(diag.at("a").get<double>() > 0.0);
    CHECK(diag.at("N_Omega").get<long>() > 0);
}

TEST_CASE("simulate validates the scene before writing anything") {
    TempDir tmp("muscat_cli_badscene");
    const fs::path bad = tmp.path / "bad_scene.json";
    {
        std::ofstream out(bad);
        out << R"({"version":1,"medium":{"lambda":-1.0,"mu":1.0,"omega":1.0},
                   "scatterers":[{"shape":{"kind":"sphere","radius":1.0,"refinement":0},
                                  "epsilon":0.1,"center":[0,0,0]}]})";
    }
    const std::string out_dir = (tmp.path / "out").string();
    const RunResult r = run_cli("simulate --scene " + bad.string() + " --out " + out_dir);
    CHECK(r.exit_code == 2);
    CHECK(!fs::exists(fs::path(out_dir) / "dataset_PP.json"));
    CHECK(!fs::exists(fs::path(out_dir) / "diagnostics.json"));
}

TEST_CASE("image finds the scatterers and is byte-deterministic") {
    TempDir tmp("muscat_cli_image");
    const std::string sim_out = (tmp.path / "sim").string();
    REQUIRE(run_cli("simulate --scene " + scene + " --channels PP --N 30 --out " + sim_out)
                .exit_code == 0);
    const std::string data = sim_out + "/dataset_PP.json";
    const std::string grid = "\"box=-0.8,0.8,-0.8,0.8,-0.8,0.8;h=0.1;unit=wl\"";

    const std::string img1 = (tmp.path / "img1").string();
    const RunResult r1 =
        run_cli("image --data " + data + " --grid " + grid + " --peak-rho 0.2 --expected-M 3 --out " + img1);
    REQUIRE(r1.exit_code == 0);

    const json peaks = json::parse(read_file(fs::path(img1) / "peaks.json"));
    REQUIRE(peaks.at("peaks").size() == 3);
    const json truth = json::parse(read_file(data)).at("truth").at("centers");
    for (const auto& tz : truth) {
        const muscat::Vec3 z(tz.at(0).get<double>(), tz.at(1).get<double>(),
                             tz.at(2).get<double>());
        double best = 1e9;
        for (const auto& p : peaks.at("peaks")) {
            const auto& q = p.at("position");
            const muscat::Vec3 zp(q.at(0).get<double>(), q.at(1).get<double>(),
                                  q.at(2).get<double>());
            best = std::min(best, (z - zp).norm());
        }
        CHECK(best <= 0.1); // one grid cell
    }

    const std::string img2 = (tmp.path / "img2").string();
    REQUIRE(run_cli("image --data " + data + " --grid " + grid + " --peak-rho 0.2 --expected-M 3 --out " + img2)
                .exit_code == 0);
    CHECK(read_file(fs::path(img1) / "pseudospectrum.csv") ==
          read_file(fs::path(img2) / "pseudospectrum.csv"));

    SUBCASE("empty grid box is a validation error") {
        const RunResult bad = run_cli("image --data " + data +
                                      " --grid \"box=1,-1,0,1,0,1;h=0.1\" --out " +
                                      (tmp.path / "img3").string());
        CHECK(bad.exit_code == 2);
    }
    SUBCASE("an unattainable peak threshold exits with the no-peaks code") {
        const RunResult none = run_cli("image --data " + data + " --grid " + grid +
                                       " --peak-rho 1.5 --out " +
                                       (tmp.path / "img5").string());
        CHECK(none.exit_code == 4);
        CHECK(none.output.find("no peaks") != std::string::npos);
    }
    SUBCASE("mismatched test-vector kind is rejected before compute") {
        const RunResult bad = run_cli("image --data " + data + " --grid " + grid +
                                      " --kind sh --out " + (tmp.path / "img4").string());
        CHECK(bad.exit_code == 2);
    }
}

TEST_CASE("size with truth centers echoes tiny round-trip errors") {
    TempDir tmp("muscat_cli_size");
    const std::string sim_out = (tmp.path / "sim").string();
    REQUIRE(run_cli("simulate --scene " + scene + " --channels PP --N 30 --out " + sim_out)
                .exit_code == 0);
    const std::string data = sim_out + "/dataset_PP.json";

    const std::string sz = (tmp.path / "sz").string();
    const RunResult r =
        run_cli("size --data " + data + " --use-truth --convex --out " + sz);
    REQUIRE(r.exit_code == 0);
    const json rep = json::parse(read_file(fs::path(sz) / "size_report.json"));
    REQUIRE(rep.at("scatterers").size() == 3);
    for (const auto& s : rep.at("scatterers")) {
        CHECK(s.at("round_trip_relative_error").get<double>() <= 1e-8);
        const auto& iv = s.at("perimeter_interval");
        CHECK(iv.at(0).get<double>() <= iv.at(1).get<double>());
        CHECK(s.contains("convex_bounds"));
    }

    SUBCASE("missing centers input is a usage error") {
        const RunResult bad =
            run_cli("size --data " + data + " --out " + (tmp.path / "sz2").string());
        CHECK(bad.exit_code == 2);
        CHECK(bad.output.find("centers") != std::string::npos);
    }
    SUBCASE("duplicate centers are a numerical (rank) failure") {
        const fs::path dup = tmp.path / "dup.json";
        std::ofstream out(dup);
        out << R"({"centers": [[0.4,0.2,-0.3],[0.4,0.2,-0.3],[0.1,0.5,0.5]]})";
        out.close();
        const RunResult bad = run_cli("size --data " + data + " --centers " + dup.string() +
                                      " --out " + (tmp.path / "sz3").string());
        CHECK(bad.exit_code == 3);
        CHECK(bad.output.find("rank deficient") != std::string::npos);
    }
}

TEST_CASE("validate subcommand subsets and failure enumeration") {
    TempDir tmp("muscat_cli_validate");
    const RunResult ok = run_cli("validate --only invertibility_diagnostics --out " +
                                 (tmp.path / "v").string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("[PASS] invertibility_diagnostics") != std::string::npos);
    const json vj = json::parse(read_file(tmp.path / "v" / "validation.json"));
    CHECK(vj.at("failures").get<int>() == 0);

    // forcing the tolerances to zero must enumerate failures with values
    const RunResult forced =
        run_cli("validate --only scaling_law,factorization_identity --tolerance-scale 0");
    CHECK(forced.exit_code == 3);
    CHECK(forced.output.find("[FAIL]") != std::string::npos);

    const RunResult unknown = run_cli("validate --only not_a_check");
    CHECK(unknown.exit_code == 2);
}

TEST_CASE("config file supplies defaults and flags override it") {
    TempDir tmp("muscat_cli_config");
    const fs::path cfg = tmp.path / "run.json";
    const std::string out_cfg = (tmp.path / "from_config").string();
    {
        std::ofstream out(cfg);
        json j;
        j["version"] = 1;
        j["simulate"] = {{"scene", scene}, {"channels", "PP"}, {"N", 12}, {"out", out_cfg}};
        out << j.dump(2);
    }
    const RunResult r = run_cli("--config " + cfg.string() + " simulate");
    REQUIRE(r.exit_code == 0);
    const json ds = json::parse(read_file(fs::path(out_cfg) / "dataset_PP.json"));
    CHECK(ds.at("directions").size() == 12);

    // the flag wins over the config value
    const std::string out_flag = (tmp.path / "from_flag").string();
    const RunResult r2 =
        run_cli("--config " + cfg.string() + " simulate --N 9 --out " + out_flag);
    REQUIRE(r2.exit_code == 0);
    const json ds2 = json::parse(read_file(fs::path(out_flag) / "dataset_PP.json"));
    CHECK(ds2.at("directions").size() == 9);

    // config without a version field is rejected
    const fs::path bad = tmp.path / "bad.json";
    {
        std::ofstream out(bad);
        out << R"({"simulate": {}})";
    }
    CHECK(run_cli("--config " + bad.string() + " validate --only scaling_law").exit_code == 2);
}
