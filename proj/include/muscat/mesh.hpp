#ifndef MUSCAT_MESH_HPP
#define MUSCAT_MESH_HPP

#include "muscat/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

// Triangulated closed surfaces for the reference bodies: built-in shapes
// (icosphere, ellipsoid, box), OFF import/export, manifold validation, and
// the inscribed/circumscribed radii used by the size estimates.

namespace muscat {

struct SurfaceMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    // derived per-triangle data, filled by update_geometry()
    std::vector<double> areas;
    std::vector<Vec3> normals;   // outward unit normals
    std::vector<Vec3> centroids;

    void update_geometry() {
        const std::size_t n = triangles.size();
        areas.resize(n);
        normals.resize(n);
        centroids.resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            const Vec3& a = vertices[triangles[t][0]];
            const Vec3& b = vertices[triangles[t][1]];
            const Vec3& c = vertices[triangles[t][2]];
            const Vec3 cr = (b - a).cross(c - a);
            const double cn = cr.norm();
            areas[t] = 0.5 * cn;
            normals[t] = cn > 0.0 ? Vec3(cr / cn) : Vec3::Zero();
            centroids[t] = (a + b + c) / 3.0;
        }
    }

    double total_area() const {
        double s = 0.0;
        for (double a : areas) s += a;
        return s;
    }

    double signed_volume() const {
        double v = 0.0;
        for (const auto& t : triangles)
            v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]])) / 6.0;
        return v;
    }

    std::size_t panel_count() const { return triangles.size(); }
};

// Closed orientable 2-manifold with consistent outward orientation and no
// degenerate panels. Throws parameter_error naming the first violation.
inline void validate_mesh(const SurfaceMesh& mesh) {
    if (mesh.vertices.size() < 4 || mesh.triangles.empty())
        throw parameter_error("validate_mesh: too few vertices or triangles");
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k)
            if (t[k] < 0 || t[k] >= static_cast<int>(mesh.vertices.size()))
                throw parameter_error("validate_mesh: triangle index out of range");

    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const auto e = std::make_pair(t[k], t[(k + 1) % 3]);
            if (e.first == e.second)
                throw parameter_error("validate_mesh: triangle with repeated vertex");
            if (++directed[e] > 1)
                throw parameter_error("validate_mesh: directed edge used twice "
                                      "(non-manifold or inconsistent orientation)");
        }
    }
    for (const auto& [e, cnt] : directed) {
        const auto rev = std::make_pair(e.second, e.first);
        auto it = directed.find(rev);
        if (it == directed.end())
            throw parameter_error("validate_mesh: open edge (" + std::to_string(e.first) + "," +
                                  std::to_string(e.second) + ")");
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Vec3& a = mesh.vertices[mesh.triangles[t][0]];
        const Vec3& b = mesh.vertices[mesh.triangles[t][1]];
        const Vec3& c = mesh.vertices[mesh.triangles[t][2]];
        if ((b - a).cross(c - a).norm() <= 0.0)
            throw parameter_error("validate_mesh: zero-area triangle " + std::to_string(t));
    }
    if (!(mesh.signed_volume() > 0.0))
        throw parameter_error("validate_mesh: signed volume <= 0 (orientation not outward)");
}

namespace detail {

// One 4-way midpoint refinement pass; optional projection is applied to
// newly created midpoints (used to push icosphere vertices onto the sphere).
template <class Project>
inline void subdivide_once(SurfaceMesh& mesh, Project&& project, bool do_project) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int i, int j) {
        const auto key = std::minmax(i, j);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        Vec3 p = 0.5 * (mesh.vertices[i] + mesh.vertices[j]);
        if (do_project) p = project(p);
        const int idx = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(p);
        midpoint.emplace(key, idx);
        return idx;
    };
    std::vector<std::array<int, 3>> out;
    out.reserve(mesh.triangles.size() * 4);
    for (const auto& t : mesh.triangles) {
        const int ab = mid(t[0], t[1]);
        const int bc = mid(t[1], t[2]);
        const int ca = mid(t[2], t[0]);
        out.push_back({t[0], ab, ca});
        out.push_back({t[1], bc, ab});
        out.push_back({t[2], ca, bc});
        out.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(out);
}

inline SurfaceMesh icosahedron() {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    SurfaceMesh m;
    m.vertices = {
        {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& v : m.vertices) v.normalize();
    m.triangles = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    return m;
}

} // namespace detail

// Icosphere: refinement r has 20 * 4^r triangles, all vertices on the sphere.
inline SurfaceMesh make_sphere(double radius, int refinement) {
    if (!(radius > 0.0)) throw parameter_error("make_sphere: radius must be > 0");
    if (refinement < 0) throw parameter_error("make_sphere: refinement must be >= 0");
    SurfaceMesh m = detail::icosahedron();
    auto project = [radius](const Vec3& p) { return Vec3(radius * p.normalized()); };
    for (auto& v : m.vertices) v = project(v);
    for (int i = 0; i < refinement; ++i) detail::subdivide_once(m, project, true);
    m.update_geometry();
    return m;
}

// Icosphere scaled componentwise by the semi-axes.
inline SurfaceMesh make_ellipsoid(const Vec3& semi_axes, int refinement) {
    if (!(semi_axes.minCoeff() > 0.0))
        throw parameter_error("make_ellipsoid: semi-axes must be > 0");
    SurfaceMesh m = make_sphere(1.0, refinement);
    for (auto& v : m.vertices) v = v.cwiseProduct(semi_axes);
    m.update_geometry();
    return m;
}

// Axis-aligned box of the given half-widths; refinement r has 12 * 4^r
// triangles (flat subdivision, no projection).
inline SurfaceMesh make_box(const Vec3& half_widths, int refinement) {
    if (!(half_widths.minCoeff() > 0.0))
        throw parameter_error("make_box: half-widths must be > 0");
    if (refinement < 0) throw parameter_error("make_box: refinement must be >= 0");
    SurfaceMesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({(i & 1) ? half_widths.x() : -half_widths.x(),
                              (i & 2) ? half_widths.y() : -half_widths.y(),
                              (i & 4) ? half_widths.z() : -half_widths.z()});
    const int quads[6][4] = {
        {1, 3, 7, 5}, // +x
        {0, 4, 6, 2}, // -x
        {2, 6, 7, 3}, // +y
        {0, 1, 5, 4}, // -y
        {4, 5, 7, 6}, // +z
        {0, 2, 3, 1}, // -z
    };
    for (const auto& q : quads) {
        m.triangles.push_back({q[0], q[1], q[2]});
        m.triangles.push_back({q[0], q[2], q[3]});
    }
    auto no_project = [](const Vec3& p) { return p; };
    for (int i = 0; i < refinement; ++i) detail::subdivide_once(m, no_project, false);
    m.update_geometry();
    return m;
}

// D = eps * B + z.
inline SurfaceMesh scale_translate(const SurfaceMesh& body, double eps, const Vec3& z) {
    if (!(eps > 0.0)) throw parameter_error("scale_translate: eps must be > 0");
    SurfaceMesh out = body;
    for (auto& v : out.vertices) v = eps * v + z;
    out.update_geometry();
    return out;
}

// Parity test along a fixed generic ray.
inline bool point_inside(const SurfaceMesh& mesh, const Vec3& p) {
    const Vec3 dir = Vec3(0.5773502691896258, 0.5773502691896257, 0.5773502691896259).normalized();
    int crossings = 0;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3 e1 = mesh.vertices[t[1]] - a;
        const Vec3 e2 = mesh.vertices[t[2]] - a;
        const Vec3 pv = dir.cross(e2);
        const double det = e1.dot(pv);
        if (std::abs(det) < 1e-14) continue;
        const Vec3 tv = p - a;
        const double u = tv.dot(pv) / det;
        if (u < 0.0 || u > 1.0) continue;
        const Vec3 qv = tv.cross(e1);
        const double v = dir.dot(qv) / det;
        if (v < 0.0 || u + v > 1.0) continue;
        const double dist = e2.dot(qv) / det;
        if (dist > 0.0) ++crossings;
    }
    return (crossings % 2) == 1;
}

inline double max_pairwise_distance(const std::vector<Vec3>& pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            best = std::max(best, (pts[i] - pts[j]).norm());
    return best;
}

// (R_i, R_e): radius of the largest inscribed ball and of the smallest
// enclosing ball. R_e is exact for polyhedra (half the vertex diameter).
// R_i assumes a convex body: the distance from an interior point to the
// boundary is then the minimum over the face-plane distances, a concave
// function maximized by Monte-Carlo seeding plus a shrinking pattern search.
inline std::pair<double, double> radii(const SurfaceMesh& mesh) {
    const double R_e = 0.5 * max_pairwise_distance(mesh.vertices);

    struct Plane {
        Vec3 n;
        double d;
    };
    std::vector<Plane> planes;
    planes.reserve(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        planes.push_back({mesh.normals[t], mesh.normals[t].dot(mesh.vertices[mesh.triangles[t][0]])});

    auto depth = [&](const Vec3& x) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& pl : planes) best = std::min(best, pl.d - pl.n.dot(x));
        return best;
    };

    Vec3 lo = mesh.vertices[0], hi = mesh.vertices[0];
    for (const auto& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }

    Vec3 centroid = Vec3::Zero();
    for (const auto& v : mesh.vertices) centroid += v;
    centroid /= static_cast<double>(mesh.vertices.size());

    Vec3 best_x = centroid;
    double best = depth(centroid);
    std::mt19937_64 gen(0x51ab5eedULL);
    for (int s = 0; s < 10000; ++s) {
        Vec3 x;
        for (int k = 0; k < 3; ++k)
            x[k] = lo[k] + (hi[k] - lo[k]) * detail::uniform01(gen);
        const double f = depth(x);
        if (f > best) {
            best = f;
            best_x = x;
        }
    }

    // Pattern-search polish over axis and diagonal directions; the objective
    // is concave so the shrinking-step search converges to the maximum.
    std::vector<Vec3> dirs;
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dz = -1; dz <= 1; ++dz)
                if (dx || dy || dz) dirs.push_back(Vec3(dx, dy, dz).normalized());
    double step = 0.25 * (hi - lo).norm();
    while (step > 1e-9) {
        bool improved = false;
        for (const auto& d : dirs) {
            const Vec3 x = best_x + step * d;
            const double f = depth(x);
            if (f > best) {
                best = f;
                best_x = x;
                improved = true;
            }
        }
        if (!improved) step *= 0.5;
    }
    return {best, R_e};
}

// ---------------------------------------------------------------------------
// OFF import/export: counts header, vertex lines, triangle lines.

inline void save_off(const SurfaceMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("save_off: cannot open '" + path + "' for writing");
    out << "OFF\n" << mesh.vertices.size() << " " << mesh.triangles.size() << " 0\n";
    out.precision(17);
    for (const auto& v : mesh.vertices) out << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    if (!out) throw io_error("save_off: write to '" + path + "' failed");
}

inline SurfaceMesh load_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_off: cannot open '" + path + "'");
    std::string line;
    long lineno = 0;
    auto next_content_line = [&]() -> std::string {
        while (std::getline(in, line)) {
            ++lineno;
            const auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            return line;
        }
        throw io_error("load_off: '" + path + "' truncated after line " + std::to_string(lineno));
    };

    std::string header = next_content_line();
    std::size_t nv = 0, nf = 0, ne = 0;
    {
        std::istringstream ss(header);
        std::string magic;
        ss >> magic;
        if (magic == "OFF") {
            std::istringstream cs(next_content_line());
            if (!(cs >> nv >> nf >> ne))
                throw io_error("load_off: '" + path + "' line " + std::to_string(lineno) +
                               ": expected 'nv nf ne' counts");
        } else {
            std::istringstream cs(header);
            if (!(cs >> nv >> nf >> ne))
                throw io_error("load_off: '" + path + "' line " + std::to_string(lineno) +
                               ": expected OFF magic or counts");
        }
    }

    SurfaceMesh mesh;
    mesh.vertices.reserve(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        std::istringstream vs(next_content_line());
        double x, y, z;
        if (!(vs >> x >> y >> z))
            throw io_error("load_off: '" + path + "' line " + std::to_string(lineno) +
                           ": malformed vertex");
        mesh.vertices.push_back({x, y, z});
    }
    mesh.triangles.reserve(nf);
    for (std::size_t i = 0; i < nf; ++i) {
        std::istringstream fs(next_content_line());
        int cnt, a, b, c;
        if (!(fs >> cnt >> a >> b >> c) || cnt != 3)
            throw io_error("load_off: '" + path + "' line " + std::to_string(lineno) +
                           ": expected triangle '3 i j k'");
        mesh.triangles.push_back({a, b, c});
    }
    mesh.update_geometry();
    validate_mesh(mesh);
    return mesh;
}

// ---------------------------------------------------------------------------
// Shape descriptors used by scene files and dataset ground truth.

struct ShapeDescriptor {
    enum class Kind { Sphere, Ellipsoid, Box, Off };
    Kind kind = Kind::Sphere;
    double radius = 1.0;          // sphere
    Vec3 semi_axes = {1, 1, 1};   // ellipsoid
    Vec3 half_widths = {1, 1, 1}; // box
    int refinement = 2;
    std::string off_path;         // off

    bool operator==(const ShapeDescriptor& o) const {
        return kind == o.kind && radius == o.radius && semi_axes == o.semi_axes &&
               half_widths == o.half_widths && refinement == o.refinement &&
               off_path == o.off_path;
    }
};

inline SurfaceMesh build_shape(const ShapeDescriptor& d) {
    switch (d.kind) {
    case ShapeDescriptor::Kind::Sphere: return make_sphere(d.radius, d.refinement);
    case ShapeDescriptor::Kind::Ellipsoid: return make_ellipsoid(d.semi_axes, d.refinement);
    case ShapeDescriptor::Kind::Box: return make_box(d.half_widths, d.refinement);
    case ShapeDescriptor::Kind::Off: return load_off(d.off_path);
    }
    throw parameter_error("build_shape: unknown shape kind");
}

} // namespace muscat

#endif
