#ifndef MUSCAT_IO_HPP
#define MUSCAT_IO_HPP

#include "muscat/acquisition.hpp"
#include "muscat/bem.hpp"
#include "muscat/foldy_lax.hpp"
#include "muscat/music.hpp"
#include "muscat/sizing.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

// Scene files, imaging-grid specifications, peak lists and size reports.
// All JSON; complex numbers as [re, im]; lengths in scene units unless a
// grid spec carries the wavelength unit tag.

namespace muscat {

struct SceneSpec {
    Scene scene;
    std::vector<ShapeDescriptor> shapes; // one per scatterer
    std::optional<double> domain_diameter;
};

namespace detail {

inline nlohmann::json parse_json_file(const std::string& path, const char* who) {
    std::ifstream in(path);
    if (!in) throw io_error(std::string(who) + ": cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error(std::string(who) + ": '" + path + "': " + e.what());
    }
}

inline Vec3 vec3_from_json(const nlohmann::json& j) {
    return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

} // namespace detail

// Scene file: {version, medium{lambda, mu, omega}, scatterers:[{shape,
// epsilon, center}], domain_diameter?}. Capacitances are computed with the
// boundary-element solver, once per distinct shape descriptor, and scaled by
// each scatterer's epsilon. OFF paths resolve relative to the scene file.
inline SceneSpec load_scene(const std::string& path) {
    namespace fs = std::filesystem;
    const nlohmann::json j = detail::parse_json_file(path, "load_scene");
    try {
        if (!j.contains("version"))
            throw io_error("load_scene: '" + path + "': missing 'version'");
        if (j.at("version").get<int>() != 1)
            throw io_error("load_scene: '" + path + "': unsupported version");

        SceneSpec spec;
        const auto& jm = j.at("medium");
        spec.scene.medium = make_medium(jm.at("lambda").get<double>(),
                                        jm.at("mu").get<double>(),
                                        jm.at("omega").get<double>());
        if (j.contains("domain_diameter"))
            spec.domain_diameter = j.at("domain_diameter").get<double>();

        std::vector<ShapeDescriptor> distinct;
        std::vector<SurfaceMesh> meshes;
        std::vector<CapacitanceMatrix> reference_caps;
        for (const auto& js : j.at("scatterers")) {
            ShapeDescriptor sd = detail::shape_from_json(js.at("shape"));
            if (sd.kind == ShapeDescriptor::Kind::Off && !fs::path(sd.off_path).is_absolute())
                sd.off_path = (fs::path(path).parent_path() / sd.off_path).string();

            std::size_t idx = distinct.size();
            for (std::size_t k = 0; k < distinct.size(); ++k)
                if (distinct[k] == sd) {
                    idx = k;
                    break;
                }
            if (idx == distinct.size()) {
                distinct.push_back(sd);
                meshes.push_back(build_shape(sd));
                reference_caps.push_back(elastic_capacitance(meshes.back(),
                                                             spec.scene.medium.lambda,
                                                             spec.scene.medium.mu));
            }

            Scatterer sc;
            sc.mesh = meshes[idx];
            sc.epsilon = js.at("epsilon").get<double>();
            sc.center = detail::vec3_from_json(js.at("center"));
            if (!(sc.epsilon > 0.0))
                throw io_error("load_scene: '" + path + "': epsilon must be > 0");
            spec.scene.scatterers.push_back(std::move(sc));
            spec.shapes.push_back(sd);

            CapacitanceMatrix cm = reference_caps[idx];
            cm.C *= spec.scene.scatterers.back().epsilon;
            spec.scene.capacitances.push_back(cm);
        }
        validate_scene(spec.scene);
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("load_scene: '" + path + "': " + e.what());
    }
}

// Grid specification "box=x0,x1,y0,y1,z0,z1;h=H[;unit=abs|wl]"; with
// unit=wl every length is a multiple of the shear wavelength.
inline ImagingGrid parse_grid_spec(const std::string& spec, const ElasticMedium& medium) {
    double box[6];
    bool have_box = false;
    double h = 0.0;
    std::string unit = "abs";

    auto to_number = [](const std::string& tok) {
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used == tok.size()) return v;
        } catch (const std::logic_error&) {
        }
        throw parameter_error("grid spec: '" + tok + "' is not a number");
    };

    std::stringstream ss(spec);
    std::string field;
    while (std::getline(ss, field, ';')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos)
            throw parameter_error("grid spec: field '" + field + "' is not key=value");
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "box") {
            std::stringstream vs(value);
            std::string tok;
            int k = 0;
            while (std::getline(vs, tok, ',')) {
                if (k >= 6) throw parameter_error("grid spec: box needs exactly 6 numbers");
                box[k++] = to_number(tok);
            }
            if (k != 6) throw parameter_error("grid spec: box needs exactly 6 numbers");
            have_box = true;
        } else if (key == "h") {
            h = to_number(value);
        } else if (key == "unit") {
            if (value != "abs" && value != "wl")
                throw parameter_error("grid spec: unit must be 'abs' or 'wl'");
            unit = value;
        } else {
            throw parameter_error("grid spec: unknown field '" + key + "'");
        }
    }
    if (!have_box || !(h > 0.0))
        throw parameter_error("grid spec: requires box=... and h=...");
    double scale = 1.0;
    if (unit == "wl") scale = medium.shear_wavelength();
    return ImagingGrid::from_box(scale * Vec3(box[0], box[2], box[4]),
                                 scale * Vec3(box[1], box[3], box[5]), scale * h);
}

// ---------------------------------------------------------------------------
// Pseudospectrum exports.

inline void save_pseudospectrum_csv(const Pseudospectrum& ps, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("save_pseudospectrum_csv: cannot open '" + path + "'");
    out << "x,y,z,value\n";
    char line[160];
    for (long p = 0; p < ps.grid.size(); ++p) {
        const Vec3 z = ps.grid.point(p);
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", z.x(), z.y(), z.z(),
                      ps.values[static_cast<std::size_t>(p)]);
        out << line;
    }
    if (!out) throw io_error("save_pseudospectrum_csv: write to '" + path + "' failed");
}

inline nlohmann::json peaks_to_json(const Pseudospectrum& ps, const RankRule& rule,
                                    const PeakParams& params) {
    nlohmann::json j;
    j["version"] = 1;
    j["kind"] = to_string(ps.kind);
    j["component"] = ps.component == 0 ? nlohmann::json("union") : nlohmann::json(ps.component);
    if (rule.mode == RankRule::Mode::Fixed)
        j["rank_rule"] = {{"mode", "fixed"}, {"k", rule.k}};
    else
        j["rank_rule"] = {{"mode", "threshold"}, {"tau", rule.tau}};
    j["peak_params"] = {{"rho", params.rho},
                        {"r_min", params.r_min > 0.0 ? params.r_min : 2.0 * ps.grid.h}};
    j["grid"] = {{"lo", {ps.grid.lo.x(), ps.grid.lo.y(), ps.grid.lo.z()}},
                 {"h", ps.grid.h},
                 {"counts", {ps.grid.counts[0], ps.grid.counts[1], ps.grid.counts[2]}}};
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : ps.peaks)
        arr.push_back({{"position", {p.position.x(), p.position.y(), p.position.z()}},
                       {"value", p.value}});
    j["peaks"] = std::move(arr);
    return j;
}

// Accepts either a peaks file ({"peaks": [{"position": ...}]}) or a plain
// center list ({"centers": [[x,y,z], ...]}).
inline std::vector<Vec3> load_centers(const std::string& path) {
    const nlohmann::json j = detail::parse_json_file(path, "load_centers");
    std::vector<Vec3> out;
    try {
        if (j.contains("peaks")) {
            for (const auto& p : j.at("peaks"))
                out.push_back(detail::vec3_from_json(p.at("position")));
        } else if (j.contains("centers")) {
            for (const auto& c : j.at("centers")) out.push_back(detail::vec3_from_json(c));
        } else {
            throw io_error("load_centers: '" + path + "': expected 'peaks' or 'centers'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error("load_centers: '" + path + "': " + e.what());
    }
    if (out.empty()) throw io_error("load_centers: '" + path + "': no centers found");
    return out;
}

// ---------------------------------------------------------------------------
// Invertibility diagnostics and size reports.

inline nlohmann::json invertibility_to_json(const InvertibilityReport& rep) {
    auto finite_or_null = [](double v) {
        return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    };
    nlohmann::json j;
    j["version"] = 1;
    j["a"] = rep.a;
    j["d"] = finite_or_null(rep.d);
    j["d_max"] = finite_or_null(rep.d_max);
    j["diam_Omega"] = rep.diam_Omega;
    j["N_Omega"] = rep.N_Omega;
    j["t"] = finite_or_null(rep.t);
    j["ratio_a_over_d"] = rep.ratio_a_over_d;
    j["sqrt_M_minus_1_ratio"] = rep.sqrt_ratio;
    j["thresholds"] = {{"c0", rep.c0}, {"c1", rep.c1}};
    j["t_positive"] = rep.t_positive;
    j["separation_ok"] = rep.separation_ok;
    j["ratio_ok"] = rep.ratio_ok;
    j["remainder_estimate"] = rep.remainder_estimate;
    return j;
}

struct SizeReportEntry {
    Vec3 center;
    SizeInterval interval;
    std::optional<ConvexBounds> convex;
    double imag_fraction = 0.0;
    std::optional<double> round_trip_relative_error;
    std::vector<std::string> warnings;
};

struct SizeReport {
    Channel channel;
    LipConstants constants;
    double cond_Ht = 0.0, cond_Hr = 0.0;
    std::vector<SizeReportEntry> entries;
};

inline nlohmann::json size_report_to_json(const SizeReport& rep) {
    nlohmann::json j;
    j["version"] = 1;
    j["channel"] = to_string(rep.channel);
    j["constants"] = {{"c_lip", rep.constants.c_lip}, {"C_lip", rep.constants.C_lip}};
    j["conditioning"] = {{"Ht", rep.cond_Ht}, {"Hr", rep.cond_Hr}};
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : rep.entries) {
        nlohmann::json je;
        je["center"] = {e.center.x(), e.center.y(), e.center.z()};
        je["eigenvalues"] = {e.interval.lambda_min, e.interval.lambda_max};
        je["acoustic_bracket"] = {e.interval.acoustic_lower, e.interval.acoustic_upper};
        je["perimeter_interval"] = {e.interval.lower, e.interval.upper};
        je["interval_inverted"] = e.interval.inverted;
        je["imag_fraction"] = e.imag_fraction;
        if (e.convex)
            je["convex_bounds"] = {{"R_i_upper", e.convex->R_i_upper},
                                   {"R_e_lower", e.convex->R_e_lower}};
        if (e.round_trip_relative_error)
            je["round_trip_relative_error"] = *e.round_trip_relative_error;
        je["warnings"] = e.warnings;
        arr.push_back(std::move(je));
    }
    j["scatterers"] = std::move(arr);
    return j;
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("save_json: cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw io_error("save_json: write to '" + path + "' failed");
}

} // namespace muscat

#endif
