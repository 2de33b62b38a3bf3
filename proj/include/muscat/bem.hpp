#ifndef MUSCAT_BEM_HPP
#define MUSCAT_BEM_HPP

#include "muscat/green.hpp"
#include "muscat/mesh.hpp"
#include "muscat/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <string>
#include <vector>

// First-kind single-layer solvers on closed triangulated surfaces producing
// the acoustic capacitance C^a = int sigma ds with S sigma = 1 and the 3x3
// elastic capacitance C = int sigma ds with the Kelvin kernel and identity
// data. Discretization: piecewise-constant densities collocated at panel
// centroids; self terms integrated analytically (1/r) and by a 3-subtriangle
// Duffy rule (rhat rhat^T / r); all other interactions by centroid quadrature.
//
// The unknowns are the panel charges tau_j = sigma_j * area_j, which makes
// the collocation matrix symmetric and (for these kernels) positive definite,
// so a Cholesky factorization applies.

namespace muscat {

struct CapacitanceMatrix {
    Mat3 C = Mat3::Zero();
    enum class Provenance { Computed, Recovered } provenance = Provenance::Computed;

    bool is_spd(double tol = 0.0) const {
        Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (C + C.transpose()));
        return es.eigenvalues().minCoeff() > tol;
    }
};

namespace detail {

// int_T 1/|p - s| dS for p in the plane of T. Summed edge-wise over the
// subtriangles with apex p: each edge (a, b) contributes
// d * log((r_b + t_b)/(r_a + t_a)) with t the signed coordinate along the
// edge from the foot of the perpendicular and d the apex-edge distance.
inline double inplane_inverse_distance_integral(const Vec3& p, const Vec3& v0, const Vec3& v1,
                                                const Vec3& v2) {
    const Vec3 vs[3] = {v0, v1, v2};
    double total = 0.0;
    for (int e = 0; e < 3; ++e) {
        const Vec3& a = vs[e];
        const Vec3& b = vs[(e + 1) % 3];
        Vec3 eh = b - a;
        const double L = eh.norm();
        if (L == 0.0) continue;
        eh /= L;
        const double ta = (a - p).dot(eh);
        const double tb = (b - p).dot(eh);
        const Vec3 dv = (a - p) - ta * eh;
        const double d = dv.norm();
        if (d < 1e-14 * L) continue; // apex on the edge line: zero angular measure
        const double ra = (a - p).norm();
        const double rb = (b - p).norm();
        total += d * std::log((rb + tb) / (ra + ta));
    }
    return total;
}

// 16-point Gauss-Legendre rule on [0, 1].
struct Gauss16 {
    double node[16];
    double weight[16];
    Gauss16() {
        static const double x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                    0.9445750230732326, 0.9894009349916499};
        static const double w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                    0.0622535239386479, 0.0271524594117541};
        for (int k = 0; k < 8; ++k) {
            node[2 * k] = 0.5 * (1.0 - x[k]);
            node[2 * k + 1] = 0.5 * (1.0 + x[k]);
            weight[2 * k] = 0.5 * w[k];
            weight[2 * k + 1] = 0.5 * w[k];
        }
    }
};

inline const Gauss16& gauss16() {
    static const Gauss16 rule;
    return rule;
}

// int_T (s-c)(s-c)^T / |s-c|^3 dS over the three subtriangles with apex c.
// Under the Duffy map s = c + u[(a-c) + v(b-a)] the radial singularity
// cancels the Jacobian exactly and the u-integral is trivial, leaving
// 2*A_sub * int_0^1 w(v) w(v)^T / |w(v)|^3 dv per subtriangle.
inline Mat3 self_projector_integral(const Vec3& c, const Vec3& v0, const Vec3& v1,
                                    const Vec3& v2) {
    const Vec3 vs[3] = {v0, v1, v2};
    const Gauss16& g = gauss16();
    Mat3 total = Mat3::Zero();
    for (int e = 0; e < 3; ++e) {
        const Vec3& a = vs[e];
        const Vec3& b = vs[(e + 1) % 3];
        const double two_area = (a - c).cross(b - c).norm();
        if (two_area == 0.0) continue;
        Mat3 acc = Mat3::Zero();
        for (int q = 0; q < 16; ++q) {
            const Vec3 w = (a - c) + g.node[q] * (b - a);
            const double wn = w.norm();
            acc += (g.weight[q] / (wn * wn * wn)) * (w * w.transpose());
        }
        total += two_area * acc;
    }
    return total;
}

} // namespace detail

// Acoustic capacitance of the body bounded by the mesh. Solves
// int sigma(s) / (4 pi |t - s|) ds = 1 collocated at centroids and returns
// sum sigma_j area_j.
inline double acoustic_capacitance(const SurfaceMesh& mesh) {
    validate_mesh(mesh);
    const int n = static_cast<int>(mesh.panel_count());
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = 1.0 / (4.0 * pi * (mesh.centroids[i] - mesh.centroids[j]).norm());
            M(i, j) = v;
            M(j, i) = v;
        }
        const auto& t = mesh.triangles[i];
        const double self = detail::inplane_inverse_distance_integral(
            mesh.centroids[i], mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
        M(i, i) = self / (4.0 * pi * mesh.areas[i]);
    }
    const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd tau;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() == Eigen::Success) {
        tau = llt.solve(rhs);
    } else {
        tau = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(rhs);
    }
    if (!tau.allFinite() || (M * tau - rhs).norm() > 1e-8 * rhs.norm())
        throw numerical_error("acoustic_capacitance: singular discrete single-layer system");
    return tau.sum();
}

// Elastic capacitance: solves int Gamma^0(t, s) sigma(s) ds = I with the
// Kelvin kernel (three unknown components per panel) and returns the 3x3
// matrix sum sigma_j area_j. Symmetric positive definite on valid meshes.
inline CapacitanceMatrix elastic_capacitance(const SurfaceMesh& mesh, double lambda, double mu) {
    if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0))
        throw parameter_error("elastic_capacitance: Lame constraints violated");
    validate_mesh(mesh);
    const int n = static_cast<int>(mesh.panel_count());
    const double denom = 8.0 * pi * mu * (lambda + 2.0 * mu);
    const double a_coef = (lambda + 3.0 * mu) / denom;
    const double b_coef = (lambda + mu) / denom;

    Eigen::MatrixXd M(3 * n, 3 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Vec3 d = mesh.centroids[i] - mesh.centroids[j];
            const double r = d.norm();
            const Vec3 rhat = d / r;
            const Mat3 block =
                (a_coef / r) * Mat3::Identity() + (b_coef / r) * (rhat * rhat.transpose());
            M.block<3, 3>(3 * i, 3 * j) = block;
            M.block<3, 3>(3 * j, 3 * i) = block;
        }
        const auto& t = mesh.triangles[i];
        const Vec3& c = mesh.centroids[i];
        const double self_inv =
            detail::inplane_inverse_distance_integral(c, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                                      mesh.vertices[t[2]]);
        const Mat3 self_proj = detail::self_projector_integral(
            c, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
        M.block<3, 3>(3 * i, 3 * i) =
            (a_coef * self_inv * Mat3::Identity() + b_coef * self_proj) / mesh.areas[i];
    }

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(3 * n, 3);
    for (int i = 0; i < n; ++i) rhs.block<3, 3>(3 * i, 0) = Mat3::Identity();

    Eigen::MatrixXd tau;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() == Eigen::Success) {
        tau = llt.solve(rhs);
    } else {
        tau = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(rhs);
    }
    if (!tau.allFinite() || (M * tau - rhs).norm() > 1e-8 * rhs.norm())
        throw numerical_error("elastic_capacitance: singular discrete single-layer system");

    Mat3 C = Mat3::Zero();
    for (int i = 0; i < n; ++i) C += tau.block<3, 3>(3 * i, 0);
    C = 0.5 * (C + C.transpose());

    CapacitanceMatrix out;
    out.C = C;
    out.provenance = CapacitanceMatrix::Provenance::Computed;
    if (!out.is_spd())
        throw numerical_error("elastic_capacitance: computed matrix is not positive definite");
    return out;
}

} // namespace muscat

#endif
