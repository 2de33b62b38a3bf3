#ifndef MUSCAT_ACQUISITION_HPP
#define MUSCAT_ACQUISITION_HPP

#include "muscat/foldy_lax.hpp"
#include "muscat/medium.hpp"
#include "muscat/mesh.hpp"
#include "muscat/types.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

// Measurement synthesis: direction sampling on the sphere, the N x N
// response matrix of a transmit/receive channel, the propagation matrices
// H^p, H^sh, H^sv, additive noise, and dataset persistence (JSON, complex
// numbers stored as [re, im]).

namespace muscat {

struct DirectionSet {
    std::vector<Direction> dirs;
    std::string scheme; // "fibonacci" or "random"
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(dirs.size()); }
};

namespace detail {

inline constexpr double pole_clearance = 1e-6;

inline bool clear_of_poles(const std::vector<Direction>& dirs) {
    const Vec3 e3(0, 0, 1);
    for (const auto& d : dirs)
        if ((d.vec() - e3).norm() < pole_clearance || (d.vec() + e3).norm() < pole_clearance)
            return false;
    return true;
}

inline void rotate_set(std::vector<Direction>& dirs, double angle) {
    Mat3 R;
    R = Eigen::AngleAxisd(angle, Vec3::UnitX());
    for (auto& d : dirs) d = Direction::normalized(R * d.vec());
}

} // namespace detail

struct DirectionScheme {
    enum class Kind { Fibonacci, Random } kind = Kind::Fibonacci;
    std::uint64_t seed = 0;

    static DirectionScheme fibonacci() { return {Kind::Fibonacci, 0}; }
    static DirectionScheme random(std::uint64_t seed) { return {Kind::Random, seed}; }
};

// N near-uniform unit vectors. The whole set is rotated by a fixed angle if
// any member falls within 1e-6 of +-e3.
inline DirectionSet direction_set(int N, const DirectionScheme& scheme) {
    if (N < 1) throw parameter_error("direction_set: N must be >= 1");
    DirectionSet out;
    out.seed = scheme.seed;
    out.dirs.reserve(N);
    if (scheme.kind == DirectionScheme::Kind::Fibonacci) {
        out.scheme = "fibonacci";
        const double golden_angle = pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < N; ++i) {
            const double z = 1.0 - (2.0 * i + 1.0) / N;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden_angle * i;
            out.dirs.push_back(
                Direction::normalized(Vec3(rho * std::cos(phi), rho * std::sin(phi), z)));
        }
    } else {
        out.scheme = "random";
        std::mt19937_64 gen(scheme.seed);
        for (int i = 0; i < N; ++i) {
            const double z = 2.0 * detail::uniform01(gen) - 1.0;
            const double phi = 2.0 * pi * detail::uniform01(gen);
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            out.dirs.push_back(
                Direction::normalized(Vec3(rho * std::cos(phi), rho * std::sin(phi), z)));
        }
    }
    int guard = 0;
    while (!detail::clear_of_poles(out.dirs)) {
        detail::rotate_set(out.dirs, 0.0123);
        if (++guard > 64)
            throw numerical_error("direction_set: could not rotate the set clear of the poles");
    }
    return out;
}

// Propagation matrix of one polarization: 3M x N, block (m, l) equal to
// pol(theta_l) * exp(i (omega / c) theta_l . z_m).
struct HMatrix {
    Eigen::MatrixXcd H;
    Polarization kind = Polarization::P;
    std::vector<Vec3> centers;
};

inline HMatrix build_H(Polarization kind, const DirectionSet& dirs,
                       const std::vector<Vec3>& centers, const ElasticMedium& med) {
    if (centers.empty()) throw parameter_error("build_H: centers must be nonempty");
    if (!(med.omega > 0.0)) throw parameter_error("build_H: requires omega > 0");
    const int M = static_cast<int>(centers.size());
    const int N = dirs.size();
    const double c = kind == Polarization::P ? med.c_p : med.c_s;
    const double kappa = med.omega / c;
    HMatrix out;
    out.kind = kind;
    out.centers = centers;
    out.H.resize(3 * M, N);
    for (int l = 0; l < N; ++l) {
        const Vec3 pol = detail::receive_polarization(kind, dirs.dirs[l]);
        for (int m = 0; m < M; ++m) {
            const complex phase =
                std::exp(imag_unit * kappa * dirs.dirs[l].vec().dot(centers[m]));
            out.H.block<3, 1>(3 * m, l) = phase * pol.cast<complex>();
        }
    }
    return out;
}

struct NoiseDescriptor {
    double level = 0.0;
    std::uint64_t seed = 0;
};

struct ResponseMatrix {
    Eigen::MatrixXcd F;
    Channel channel;
    DirectionSet dirs;
    ElasticMedium medium;
    std::optional<NoiseDescriptor> noise;

    int size() const { return static_cast<int>(F.rows()); }
    bool noiseless() const { return !noise || noise->level == 0.0; }
};

// F_jl = scalar far field of the channel for receiver theta_j and incident
// direction theta_l. One factorization of the system and one solve per
// incident direction, reused across all receivers.
inline ResponseMatrix response_matrix(const Scene& scene, const Channel& channel,
                                      const DirectionSet& dirs) {
    const int N = dirs.size();
    if (N < 1) throw parameter_error("response_matrix: empty direction set");
    if (!(scene.medium.omega > 0.0))
        throw parameter_error("response_matrix: requires omega > 0");
    const FoldyLaxOperator op(scene);
    const int M = static_cast<int>(scene.size());
    const WaveKind kind = wave_kind_of(channel.transmit);
    const ElasticMedium& med = scene.medium;
    const double kappa_rx = channel.receive == Polarization::P ? med.kappa_p : med.kappa_s;

    // receive projections: pol(theta_j)^T exp(-i kappa theta_j . z_m)
    Eigen::MatrixXcd receive(N, 3 * M);
    for (int j = 0; j < N; ++j) {
        const Vec3 pol = detail::receive_polarization(channel.receive, dirs.dirs[j]);
        for (int m = 0; m < M; ++m) {
            const complex phase = std::exp(
                -imag_unit * kappa_rx * dirs.dirs[j].vec().dot(scene.scatterers[m].center));
            receive.block<1, 3>(j, 3 * m) = phase * pol.transpose().cast<complex>();
        }
    }

    ResponseMatrix out;
    out.channel = channel;
    out.dirs = dirs;
    out.medium = med;
    out.F.resize(N, N);
    for (int l = 0; l < N; ++l) {
        const FoldyLaxSolution sol = op.solve(kind, dirs.dirs[l]);
        Eigen::VectorXcd q(3 * M);
        for (int m = 0; m < M; ++m) q.segment<3>(3 * m) = sol.Q[m];
        out.F.col(l) = receive * q;
    }
    return out;
}

// F' = F + level * (||F||_F / N) * G with independent standard complex
// Gaussian entries; deterministic for a fixed seed.
inline ResponseMatrix add_noise(const ResponseMatrix& rm, double level, std::uint64_t seed) {
    if (level < 0.0) throw parameter_error("add_noise: level must be >= 0");
    ResponseMatrix out = rm;
    out.noise = NoiseDescriptor{level, seed};
    if (level == 0.0) return out;
    const int N = rm.size();
    const double scale = level * rm.F.norm() / static_cast<double>(N);
    std::mt19937_64 gen(seed);
    for (int j = 0; j < N; ++j)
        for (int l = 0; l < N; ++l)
            out.F(j, l) += scale * detail::standard_complex_normal(gen);
    return out;
}

// ---------------------------------------------------------------------------
// Dataset persistence.

struct SceneTruth {
    std::vector<Vec3> centers;
    std::vector<double> epsilons;
    std::vector<ShapeDescriptor> shapes;
};

struct Dataset {
    static constexpr int current_version = 1;
    int version = current_version;
    ResponseMatrix rm;
    std::optional<SceneTruth> truth;
};

namespace detail {

inline nlohmann::json shape_to_json(const ShapeDescriptor& s) {
    nlohmann::json j;
    switch (s.kind) {
    case ShapeDescriptor::Kind::Sphere:
        j["kind"] = "sphere";
        j["radius"] = s.radius;
        j["refinement"] = s.refinement;
        break;
    case ShapeDescriptor::Kind::Ellipsoid:
        j["kind"] = "ellipsoid";
        j["semi_axes"] = {s.semi_axes.x(), s.semi_axes.y(), s.semi_axes.z()};
        j["refinement"] = s.refinement;
        break;
    case ShapeDescriptor::Kind::Box:
        j["kind"] = "box";
        j["half_widths"] = {s.half_widths.x(), s.half_widths.y(), s.half_widths.z()};
        j["refinement"] = s.refinement;
        break;
    case ShapeDescriptor::Kind::Off:
        j["kind"] = "off";
        j["path"] = s.off_path;
        break;
    }
    return j;
}

inline ShapeDescriptor shape_from_json(const nlohmann::json& j) {
    ShapeDescriptor s;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sphere") {
        s.kind = ShapeDescriptor::Kind::Sphere;
        s.radius = j.at("radius").get<double>();
        s.refinement = j.value("refinement", 2);
    } else if (kind == "ellipsoid") {
        s.kind = ShapeDescriptor::Kind::Ellipsoid;
        const auto& ax = j.at("semi_axes");
        s.semi_axes = Vec3(ax.at(0).get<double>(), ax.at(1).get<double>(), ax.at(2).get<double>());
        s.refinement = j.value("refinement", 2);
    } else if (kind == "box") {
        s.kind = ShapeDescriptor::Kind::Box;
        const auto& hw = j.at("half_widths");
        s.half_widths =
            Vec3(hw.at(0).get<double>(), hw.at(1).get<double>(), hw.at(2).get<double>());
        s.refinement = j.value("refinement", 2);
    } else if (kind == "off") {
        s.kind = ShapeDescriptor::Kind::Off;
        s.off_path = j.at("path").get<std::string>();
    } else {
        throw io_error("shape_from_json: unknown shape kind '" + kind + "'");
    }
    return s;
}

} // namespace detail

inline nlohmann::json dataset_to_json(const Dataset& ds) {
    nlohmann::json j;
    j["version"] = ds.version;
    j["medium"] = {{"lambda", ds.rm.medium.lambda},
                   {"mu", ds.rm.medium.mu},
                   {"omega", ds.rm.medium.omega}};
    j["channel"] = to_string(ds.rm.channel);
    nlohmann::json dirs = nlohmann::json::array();
    for (const auto& d : ds.rm.dirs.dirs) dirs.push_back({d.x(), d.y(), d.z()});
    j["directions"] = std::move(dirs);
    j["direction_scheme"] = {{"scheme", ds.rm.dirs.scheme}, {"seed", ds.rm.dirs.seed}};
    nlohmann::json F = nlohmann::json::array();
    for (int r = 0; r < ds.rm.F.rows(); ++r)
        for (int c = 0; c < ds.rm.F.cols(); ++c)
            F.push_back({ds.rm.F(r, c).real(), ds.rm.F(r, c).imag()});
    j["F"] = std::move(F);
    if (ds.rm.noise)
        j["noise"] = {{"level", ds.rm.noise->level}, {"seed", ds.rm.noise->seed}};
    if (ds.truth) {
        nlohmann::json t;
        t["centers"] = nlohmann::json::array();
        for (const auto& z : ds.truth->centers) t["centers"].push_back({z.x(), z.y(), z.z()});
        t["epsilons"] = ds.truth->epsilons;
        t["shapes"] = nlohmann::json::array();
        for (const auto& s : ds.truth->shapes) t["shapes"].push_back(detail::shape_to_json(s));
        j["truth"] = std::move(t);
    }
    return j;
}

inline Dataset dataset_from_json(const nlohmann::json& j, const std::string& where) {
    Dataset ds;
    if (!j.contains("version"))
        throw io_error("load_dataset: " + where + ": missing 'version' field");
    ds.version = j.at("version").get<int>();
    if (ds.version != Dataset::current_version)
        throw io_error("load_dataset: " + where + ": unsupported version " +
                       std::to_string(ds.version));
    const auto& jm = j.at("medium");
    ds.rm.medium = make_medium(jm.at("lambda").get<double>(), jm.at("mu").get<double>(),
                               jm.at("omega").get<double>());
    ds.rm.channel = parse_channel(j.at("channel").get<std::string>());
    for (const auto& d : j.at("directions"))
        ds.rm.dirs.dirs.push_back(Direction::normalized(
            Vec3(d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>())));
    if (j.contains("direction_scheme")) {
        ds.rm.dirs.scheme = j["direction_scheme"].value("scheme", "");
        ds.rm.dirs.seed = j["direction_scheme"].value("seed", 0ULL);
    }
    const int N = ds.rm.dirs.size();
    const auto& F = j.at("F");
    if (static_cast<int>(F.size()) != N * N)
        throw io_error("load_dataset: " + where + ": F has " + std::to_string(F.size()) +
                       " entries, expected " + std::to_string(N * N));
    ds.rm.F.resize(N, N);
    int idx = 0;
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c, ++idx)
            ds.rm.F(r, c) = complex(F.at(idx).at(0).get<double>(), F.at(idx).at(1).get<double>());
    if (j.contains("noise"))
        ds.rm.noise =
            NoiseDescriptor{j["noise"].at("level").get<double>(),
                            j["noise"].value("seed", 0ULL)};
    if (j.contains("truth")) {
        SceneTruth t;
        for (const auto& z : j["truth"].at("centers"))
            t.centers.push_back(
                Vec3(z.at(0).get<double>(), z.at(1).get<double>(), z.at(2).get<double>()));
        t.epsilons = j["truth"].at("epsilons").get<std::vector<double>>();
        for (const auto& s : j["truth"].at("shapes"))
            t.shapes.push_back(detail::shape_from_json(s));
        if (t.epsilons.size() != t.centers.size() || t.shapes.size() != t.centers.size())
            throw io_error("load_dataset: " + where + ": truth arrays have mismatched lengths");
        ds.truth = std::move(t);
    }
    return ds;
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw io_error("save_dataset: cannot open '" + path + "' for writing");
    out << dataset_to_json(ds).dump(2) << "\n";
    if (!out) throw io_error("save_dataset: write to '" + path + "' failed");
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_dataset: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error("load_dataset: '" + path + "': " + e.what());
    }
    try {
        return dataset_from_json(j, "'" + path + "'");
    } catch (const nlohmann::json::exception& e) {
        throw io_error("load_dataset: '" + path + "': " + e.what());
    }
}

} // namespace muscat

#endif
