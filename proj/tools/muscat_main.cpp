// Command-line front end: synthesize far-field datasets from a scene,
// localize scatterers on a sampling grid, estimate sizes from recovered
// capacitances, and run the validation suite.
//
// Exit codes: 0 success, 2 validation/configuration error, 3 numerical
// failure (including failed validation checks), 4 imaging found no peaks.

#include "muscat/muscat.hpp"
#include "muscat/validate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;
constexpr int exit_no_peaks = 4;

double scene_spread(const muscat::Scene& scene) {
    std::vector<muscat::Vec3> all;
    for (const auto& s : scene.scatterers)
        for (const auto& v : s.mesh.vertices) all.push_back(s.epsilon * v + s.center);
    return muscat::max_pairwise_distance(all);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string tok;
    std::stringstream ss(csv);
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

// Optional JSON config: {"version": 1, "<command>": {"<flag-name>": value}}.
// Command-line flags override config values.
json load_config_file(const std::string& path) {
    const json j = muscat::detail::parse_json_file(path, "config");
    if (!j.contains("version") || j.at("version").get<int>() != 1)
        throw muscat::parameter_error("config '" + path + "': requires \"version\": 1");
    return j;
}

template <class T>
void config_default(const CLI::App& cmd, const json& cfg, const std::string& command,
                    const std::string& key, T& value) {
    if (cmd.count("--" + key) > 0) return; // explicit flag wins
    if (!cfg.contains(command)) return;
    const json& section = cfg.at(command);
    if (!section.contains(key)) return;
    value = section.at(key).get<T>();
}

muscat::RankRule parse_rank_rule(const std::string& text, bool noiseless) {
    try {
        if (text == "auto")
            return noiseless ? muscat::RankRule::noiseless() : muscat::RankRule::noisy();
        if (text.rfind("fixed:", 0) == 0)
            return muscat::RankRule::fixed(std::stoi(text.substr(6)));
        if (text.rfind("thresh:", 0) == 0)
            return muscat::RankRule::threshold(std::stod(text.substr(7)));
    } catch (const std::logic_error&) {
    }
    throw muscat::parameter_error("rank rule '" + text +
                                  "' (expected auto, fixed:K or thresh:TAU)");
}

muscat::Polarization parse_polarization(const std::string& text) {
    if (text == "p" || text == "P") return muscat::Polarization::P;
    if (text == "sh" || text == "Sh" || text == "SH") return muscat::Polarization::SH;
    if (text == "sv" || text == "Sv" || text == "SV") return muscat::Polarization::SV;
    throw muscat::parameter_error("polarization '" + text + "' (expected p, sh or sv)");
}

struct SimulateArgs {
    std::string scene_path;
    std::string channels = "PP";
    int N = 30;
    std::string scheme = "fibonacci";
    std::uint64_t dirs_seed = 1;
    double noise = 0.0;
    std::uint64_t seed = 0;
    double omega_diam = 0.0; // 0: use the scene spread
    std::string out;
};

int run_simulate(const SimulateArgs& a) {
    using namespace muscat;
    const SceneSpec spec = load_scene(a.scene_path);
    const std::vector<std::string> channel_names = split_list(a.channels);
    if (channel_names.empty()) throw parameter_error("simulate: no channels requested");
    std::vector<Channel> channels;
    for (const auto& name : channel_names) channels.push_back(parse_channel(name));

    DirectionScheme scheme = DirectionScheme::fibonacci();
    if (a.scheme == "random") scheme = DirectionScheme::random(a.dirs_seed);
    else if (a.scheme != "fibonacci")
        throw parameter_error("simulate: scheme must be fibonacci or random");
    const DirectionSet dirs = direction_set(a.N, scheme);

    const double spread = scene_spread(spec.scene);
    double omega_diam = a.omega_diam > 0.0 ? a.omega_diam : spread;
    if (spec.domain_diameter && a.omega_diam == 0.0) omega_diam = *spec.domain_diameter;
    const InvertibilityReport report = check_invertibility(spec.scene, omega_diam);

    SceneTruth truth;
    for (std::size_t i = 0; i < spec.scene.size(); ++i) {
        truth.centers.push_back(spec.scene.scatterers[i].center);
        truth.epsilons.push_back(spec.scene.scatterers[i].epsilon);
        truth.shapes.push_back(spec.shapes[i]);
    }

    // compute everything before writing anything
    std::vector<Dataset> datasets;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        ResponseMatrix rm = response_matrix(spec.scene, channels[c], dirs);
        if (a.noise > 0.0)
            rm = add_noise(rm, a.noise, a.seed + static_cast<std::uint64_t>(c));
        Dataset ds;
        ds.rm = std::move(rm);
        ds.truth = truth;
        datasets.push_back(std::move(ds));
    }

    fs::create_directories(a.out);
    save_json(invertibility_to_json(report), (fs::path(a.out) / "diagnostics.json").string());
    for (const auto& ds : datasets) {
        const std::string name = "dataset_" + to_string(ds.rm.channel) + ".json";
        save_dataset((fs::path(a.out) / name).string(), ds);
        std::printf("wrote %s\n", (fs::path(a.out) / name).string().c_str());
    }
    std::printf("wrote %s\n", (fs::path(a.out) / "diagnostics.json").string().c_str());
    if (!report.t_positive)
        std::printf("note: invertibility indicator t <= 0 at this frequency; see "
                    "diagnostics.json\n");
    return exit_ok;
}

struct ImageArgs {
    std::string data_path;
    std::string grid;
    std::string kind; // empty: the dataset channel's receive side
    std::string component = "union";
    std::string rank = "auto";
    bool gram = false;
    double peak_rho = 0.5;
    double rmin = 0.0;
    int expected_M = 0; // 0: not specified
    std::string out;
};

int run_image(const ImageArgs& a) {
    using namespace muscat;
    const Dataset ds = load_dataset(a.data_path);
    const Polarization kind =
        a.kind.empty() ? ds.rm.channel.receive : parse_polarization(a.kind);
    if (kind != ds.rm.channel.receive)
        throw parameter_error("image: test-vector kind " + std::string(to_string(kind)) +
                              " does not match the dataset receive side " +
                              std::string(to_string(ds.rm.channel.receive)));
    int component = 0;
    if (a.component != "union") {
        try {
            component = std::stoi(a.component);
        } catch (const std::logic_error&) {
            component = 0;
        }
        if (component < 1 || component > 3)
            throw parameter_error("image: --j must be 1, 2, 3 or union");
    }
    const ImagingGrid grid = parse_grid_spec(a.grid, ds.rm.medium);
    const RankRule rule = parse_rank_rule(a.rank, ds.rm.noiseless());

    Pseudospectrum ps = pseudospectrum(ds.rm, grid, kind, component, rule, a.gram);
    PeakParams params;
    params.rho = a.peak_rho;
    params.r_min = a.rmin;
    std::optional<int> expected;
    if (a.expected_M > 0) expected = a.expected_M;
    const LocateResult loc = locate(ps, expected, params);

    fs::create_directories(a.out);
    save_pseudospectrum_csv(ps, (fs::path(a.out) / "pseudospectrum.csv").string());
    save_json(peaks_to_json(ps, rule, params), (fs::path(a.out) / "peaks.json").string());
    std::printf("wrote %s (%ld grid points) and peaks.json (%zu peaks)\n",
                (fs::path(a.out) / "pseudospectrum.csv").string().c_str(), grid.size(),
                loc.peaks.size());
    if (loc.peaks.empty()) {
        std::printf("no peaks: %s\n", loc.diagnostic.c_str());
        return exit_no_peaks;
    }
    return exit_ok;
}

struct SizeArgs {
    std::string data_path;
    std::string centers_path;
    bool use_truth = false;
    bool convex = false;
    double clip = 0.0;  // 0: calibrate
    double Clip = 0.0;
    std::string out;
};

int run_size(const SizeArgs& a) {
    using namespace muscat;
    const Dataset ds = load_dataset(a.data_path);

    std::vector<Vec3> centers;
    if (!a.centers_path.empty()) {
        centers = load_centers(a.centers_path);
    } else if (a.use_truth) {
        if (!ds.truth)
            throw parameter_error("size: --use-truth requested but the dataset has no truth");
        centers = ds.truth->centers;
    } else {
        throw parameter_error("size: centers required (--centers FILE or --use-truth)");
    }

    const RecoveredScattering rs = recover_B(ds.rm, ds.rm.dirs, centers, ds.rm.medium);
    const auto caps = extract_capacitances(rs);

    LipConstants lc;
    if (a.clip > 0.0 && a.Clip > 0.0) {
        lc = {a.clip, a.Clip};
    } else if (a.clip > 0.0 || a.Clip > 0.0) {
        throw parameter_error("size: override both --clip and --Clip or neither");
    } else {
        const std::vector<SurfaceMesh> family = {make_sphere(1.0, 2), make_box(Vec3(1, 1, 1), 2),
                                                 make_ellipsoid(Vec3(2, 1, 1), 2)};
        lc = calibrate_constants(family, ds.rm.medium);
    }

    SizeReport report;
    report.channel = ds.rm.channel;
    report.constants = lc;
    report.cond_Ht = rs.cond_Ht;
    report.cond_Hr = rs.cond_Hr;
    for (std::size_t m = 0; m < caps.size(); ++m) {
        SizeReportEntry entry;
        entry.center = centers[m];
        entry.imag_fraction = caps[m].imag_fraction;
        if (!caps[m].warning.empty()) entry.warnings.push_back(caps[m].warning);
        entry.interval = size_interval(caps[m].cap, ds.rm.medium, lc.c_lip, lc.C_lip);
        if (entry.interval.inverted)
            entry.warnings.push_back("perimeter interval inverted (poor constants?)");
        if (a.convex)
            entry.convex = convex_bounds(caps[m].cap, ds.rm.medium, lc.c_lip, lc.C_lip);

        if (ds.truth) {
            // match against the nearest truth center and echo the forward error
            std::size_t best = 0;
            for (std::size_t t = 1; t < ds.truth->centers.size(); ++t)
                if ((ds.truth->centers[t] - centers[m]).norm() <
                    (ds.truth->centers[best] - centers[m]).norm())
                    best = t;
            const CapacitanceMatrix fwd = elastic_capacitance(
                build_shape(ds.truth->shapes[best]), ds.rm.medium.lambda, ds.rm.medium.mu);
            const Mat3 truth_C = ds.truth->epsilons[best] * fwd.C;
            entry.round_trip_relative_error = (caps[m].cap.C - truth_C).norm() / truth_C.norm();
        }
        report.entries.push_back(std::move(entry));
    }

    fs::create_directories(a.out);
    save_json(size_report_to_json(report), (fs::path(a.out) / "size_report.json").string());
    std::printf("wrote %s\n", (fs::path(a.out) / "size_report.json").string().c_str());
    return exit_ok;
}

struct ValidateArgs {
    std::string only;
    double tolerance_scale = 1.0;
    std::string out;
};

int run_validate(const ValidateArgs& a) {
    using namespace muscat;
    validate::Options options;
    options.tolerance_scale = a.tolerance_scale;
    const auto results = validate::run_acceptance_checks(split_list(a.only), options);
    int failures = 0;
    json jr;
    jr["version"] = 1;
    jr["tolerance_scale"] = a.tolerance_scale;
    jr["checks"] = json::array();
    for (const auto& r : results) {
        std::printf("[%s] %s (%.1fs) %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                    r.details.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
        jr["checks"].push_back({{"name", r.name},
                                {"pass", r.pass},
                                {"seconds", r.seconds},
                                {"details", r.details}});
    }
    jr["failures"] = failures;
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        save_json(jr, (fs::path(a.out) / "validation.json").string());
    }
    std::printf("%zu checks, %d failed\n", results.size(), failures);
    return failures == 0 ? exit_ok : exit_numerical;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"muscat: elastic multiple-scattering synthesis, MUSIC localization and "
                 "capacitance-based sizing"};
    app.require_subcommand(1);

    std::string config_path;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file (flags override its values)")
        ->expected(1);
    app.add_option("--threads", threads, "cap the number of worker threads");

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "synthesize far-field datasets");
    simulate->add_option("--scene", sim.scene_path, "scene JSON file");
    simulate->add_option("--channels", sim.channels, "comma-separated channel list");
    simulate->add_option("--N", sim.N, "number of incident/observation directions");
    simulate->add_option("--scheme", sim.scheme, "direction scheme: fibonacci or random");
    simulate->add_option("--dirs-seed", sim.dirs_seed, "seed for the random scheme");
    simulate->add_option("--noise", sim.noise, "relative noise level");
    simulate->add_option("--seed", sim.seed, "noise seed");
    simulate->add_option("--omega-diam", sim.omega_diam, "diameter of the domain Omega");
    simulate->add_option("--out", sim.out, "output directory");

    ImageArgs img;
    CLI::App* image = app.add_subcommand("image", "MUSIC localization on a sampling grid");
    image->add_option("--data", img.data_path, "dataset JSON file");
    image->add_option("--grid", img.grid, "grid spec box=x0,x1,y0,y1,z0,z1;h=H[;unit=wl]");
    image->add_option("--kind", img.kind, "test-vector kind: p, sh or sv");
    image->add_option("--j", img.component, "test-vector component: 1, 2, 3 or union");
    image->add_option("--rank", img.rank, "signal rank rule: auto, fixed:K or thresh:TAU");
    image->add_flag("--gram", img.gram, "decompose F F^* instead of F");
    image->add_option("--peak-rho", img.peak_rho, "peak threshold fraction of the maximum");
    image->add_option("--rmin", img.rmin, "peak suppression radius (default 2h)");
    image->add_option("--expected-M", img.expected_M, "keep only the top M peaks");
    image->add_option("--out", img.out, "output directory");

    SizeArgs siz;
    CLI::App* size = app.add_subcommand("size", "recover capacitances and size estimates");
    size->add_option("--data", siz.data_path, "dataset JSON file");
    size->add_option("--centers", siz.centers_path, "peaks JSON or {\"centers\": [...]} file");
    size->add_flag("--use-truth", siz.use_truth, "take centers from the dataset truth");
    size->add_flag("--convex", siz.convex, "also report the convex-body radius bounds");
    size->add_option("--clip", siz.clip, "override the lower Lipschitz constant");
    size->add_option("--Clip", siz.Clip, "override the upper Lipschitz constant");
    size->add_option("--out", siz.out, "output directory");

    ValidateArgs val;
    CLI::App* validate_cmd = app.add_subcommand("validate", "run the validation suite");
    validate_cmd->add_option("--only", val.only, "comma-separated subset of check names");
    validate_cmd->add_option("--tolerance-scale", val.tolerance_scale,
                             "scale every tolerance (0 forces failures)");
    validate_cmd->add_option("--out", val.out, "directory for validation.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_validation;
    }

    try {
        if (!config_path.empty()) {
            const json cfg = load_config_file(config_path);
            config_default(*simulate, cfg, "simulate", "scene", sim.scene_path);
            config_default(*simulate, cfg, "simulate", "channels", sim.channels);
            config_default(*simulate, cfg, "simulate", "N", sim.N);
            config_default(*simulate, cfg, "simulate", "scheme", sim.scheme);
            config_default(*simulate, cfg, "simulate", "dirs-seed", sim.dirs_seed);
            config_default(*simulate, cfg, "simulate", "noise", sim.noise);
            config_default(*simulate, cfg, "simulate", "seed", sim.seed);
            config_default(*simulate, cfg, "simulate", "omega-diam", sim.omega_diam);
            config_default(*simulate, cfg, "simulate", "out", sim.out);
            config_default(*image, cfg, "image", "data", img.data_path);
            config_default(*image, cfg, "image", "grid", img.grid);
            config_default(*image, cfg, "image", "kind", img.kind);
            config_default(*image, cfg, "image", "j", img.component);
            config_default(*image, cfg, "image", "rank", img.rank);
            config_default(*image, cfg, "image", "peak-rho", img.peak_rho);
            config_default(*image, cfg, "image", "rmin", img.rmin);
            config_default(*image, cfg, "image", "expected-M", img.expected_M);
            config_default(*image, cfg, "image", "out", img.out);
            config_default(*size, cfg, "size", "data", siz.data_path);
            config_default(*size, cfg, "size", "centers", siz.centers_path);
            config_default(*size, cfg, "size", "clip", siz.clip);
            config_default(*size, cfg, "size", "Clip", siz.Clip);
            config_default(*size, cfg, "size", "out", siz.out);
            config_default(*validate_cmd, cfg, "validate", "only", val.only);
            config_default(*validate_cmd, cfg, "validate", "tolerance-scale",
                           val.tolerance_scale);
            config_default(*validate_cmd, cfg, "validate", "out", val.out);
        }
        if (threads > 0) Eigen::setNbThreads(threads);

        if (simulate->parsed()) {
            if (sim.scene_path.empty()) throw muscat::parameter_error("simulate: --scene required");
            if (sim.out.empty()) throw muscat::parameter_error("simulate: --out required");
            return run_simulate(sim);
        }
        if (image->parsed()) {
            if (img.data_path.empty()) throw muscat::parameter_error("image: --data required");
            if (img.grid.empty()) throw muscat::parameter_error("image: --grid required");
            if (img.out.empty()) throw muscat::parameter_error("image: --out required");
            return run_image(img);
        }
        if (size->parsed()) {
            if (siz.data_path.empty()) throw muscat::parameter_error("size: --data required");
            if (siz.out.empty()) throw muscat::parameter_error("size: --out required");
            return run_size(siz);
        }
        if (validate_cmd->parsed()) return run_validate(val);
        return exit_validation;
    } catch (const muscat::numerical_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_numerical;
    } catch (const muscat::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    }
}
