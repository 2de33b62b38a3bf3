#ifndef MUSCAT_SIZING_HPP
#define MUSCAT_SIZING_HPP

#include "muscat/acquisition.hpp"
#include "muscat/bem.hpp"
#include "muscat/foldy_lax.hpp"
#include "muscat/mesh.hpp"
#include "muscat/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

// Quantitative inversion: recover the scattering matrix from far-field data
// via the propagation-matrix pseudo-inverses, extract per-scatterer
// capacitance matrices from its inverse, and turn their eigenvalues into
// scaled-perimeter intervals and (for convex bodies) radius bounds.

namespace muscat {

struct RecoveredScattering {
    Eigen::MatrixXcd Bcal; // 3M x 3M recovered scattering matrix
    std::vector<Vec3> centers;
    Channel channel;
    double cond_Ht = 0.0; // conditioning of H^t H^t* (receive side)
    double cond_Hr = 0.0; // conditioning of H^r H^r* (transmit side)
};

namespace detail {

// (H H*)^{-1} H, the pseudo-inverse of H* for full row rank H. Falls back to
// the SVD form U Sigma^{-1} V* when the normal equations are ill-conditioned.
inline Eigen::MatrixXcd pinv_adjoint(const Eigen::MatrixXcd& H, double& cond_out,
                                     const std::string& label) {
    const int rows = static_cast<int>(H.rows());
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double smin = sigma(rows - 1), smax = sigma(0);
    if (!(smin > 1e-12 * smax))
        throw numerical_error("recover_B: " + label + " is rank deficient (smallest singular "
                              "value " + std::to_string(smin) + " vs largest " +
                              std::to_string(smax) + "); centers too close or duplicated?");
    cond_out = (smax * smax) / (smin * smin); // cond of H H*
    if (cond_out > 1e10) {
        return svd.matrixU() * sigma.cwiseInverse().asDiagonal() * svd.matrixV().adjoint();
    }
    const Eigen::MatrixXcd G = H * H.adjoint();
    return G.partialPivLu().solve(H);
}

} // namespace detail

// Bcal = pinv(H^t*) F pinv(H^r), using the channel's receive/transmit
// polarizations and the supplied centers. Requires N >= 3M and both H of
// full row rank 3M.
inline RecoveredScattering recover_B(const ResponseMatrix& rm, const DirectionSet& dirs,
                                     const std::vector<Vec3>& centers,
                                     const ElasticMedium& med) {
    const int M = static_cast<int>(centers.size());
    const int N = dirs.size();
    if (M < 1) throw parameter_error("recover_B: no centers supplied");
    if (N < 3 * M)
        throw parameter_error("recover_B: N = " + std::to_string(N) + " < 3M = " +
                              std::to_string(3 * M));
    if (rm.size() != N)
        throw parameter_error("recover_B: response matrix size does not match direction set");

    const HMatrix Ht = build_H(rm.channel.receive, dirs, centers, med);
    const HMatrix Hr = build_H(rm.channel.transmit, dirs, centers, med);

    RecoveredScattering out;
    out.centers = centers;
    out.channel = rm.channel;
    const Eigen::MatrixXcd Pt = detail::pinv_adjoint(Ht.H, out.cond_Ht, "H^t");
    const Eigen::MatrixXcd Pr = detail::pinv_adjoint(Hr.H, out.cond_Hr, "H^r");
    out.Bcal = Pt * rm.F * Pr.adjoint();
    return out;
}

struct ExtractedCapacitance {
    CapacitanceMatrix cap;       // recovered, symmetrized real part
    double imag_fraction = 0.0;  // ||Im|| / ||C|| before discarding
    bool spd = true;
    std::string warning;
};

// Inverts the recovered scattering matrix and reads the capacitances off its
// diagonal blocks: C_m = -(B_mm)^{-1}. Imaginary parts (zero for exact data)
// are reported as a fidelity metric and discarded; the result is
// symmetrized. Non-SPD results are flagged but still returned.
inline std::vector<ExtractedCapacitance> extract_capacitances(const RecoveredScattering& rs) {
    const int M = static_cast<int>(rs.centers.size());
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(rs.Bcal);
    const Eigen::MatrixXcd B = lu.inverse();
    if (!B.allFinite())
        throw numerical_error("extract_capacitances: recovered scattering matrix is singular");

    std::vector<ExtractedCapacitance> out;
    out.reserve(M);
    for (int m = 0; m < M; ++m) {
        const CMat3 block = B.block<3, 3>(3 * m, 3 * m);
        Eigen::FullPivLU<CMat3> blu(block);
        if (!blu.isInvertible())
            throw numerical_error("extract_capacitances: singular diagonal block " +
                                  std::to_string(m));
        const CMat3 Cc = -blu.inverse();
        ExtractedCapacitance ec;
        const double cn = Cc.norm();
        ec.imag_fraction = cn > 0.0 ? Cc.imag().norm() / cn : 0.0;
        Mat3 Cr = Cc.real();
        ec.cap.C = 0.5 * (Cr + Cr.transpose());
        ec.cap.provenance = CapacitanceMatrix::Provenance::Recovered;
        ec.spd = ec.cap.is_spd();
        if (!ec.spd)
            ec.warning = "recovered capacitance " + std::to_string(m) +
                         " is not positive definite";
        out.push_back(std::move(ec));
    }
    return out;
}

struct SizeInterval {
    double lower = 0.0;          // c_lip * lambda_max / (lambda + 2 mu)
    double upper = 0.0;          // C_lip * lambda_min / mu
    bool inverted = false;
    double acoustic_lower = 0.0; // lambda_max / (lambda + 2 mu)
    double acoustic_upper = 0.0; // lambda_min / mu
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

// Interval for the scaled perimeter |dD| / eps, plus the bracket that must
// contain the acoustic capacitance.
inline SizeInterval size_interval(const CapacitanceMatrix& cap, const ElasticMedium& med,
                                  double c_lip, double C_lip) {
    if (!(c_lip > 0.0) || !(C_lip > 0.0))
        throw parameter_error("size_interval: constants must be > 0");
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (cap.C + cap.C.transpose()));
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0.0))
        throw parameter_error("size_interval: capacitance not positive definite "
                              "(lambda_min = " + std::to_string(lmin) + ")");
    SizeInterval out;
    out.lambda_min = lmin;
    out.lambda_max = lmax;
    out.lower = c_lip * lmax / (med.lambda + 2.0 * med.mu);
    out.upper = C_lip * lmin / med.mu;
    out.inverted = out.lower > out.upper;
    out.acoustic_lower = lmax / (med.lambda + 2.0 * med.mu);
    out.acoustic_upper = lmin / med.mu;
    return out;
}

struct ConvexBounds {
    double R_i_upper = 0.0; // upper bound on the inscribed radius (thickness)
    double R_e_lower = 0.0; // lower bound on the enclosing radius (length)
};

// Convex-body refinements: valid when the reference body is convex and
// contains the ball B(0, R_i) (caller-asserted hypotheses).
inline ConvexBounds convex_bounds(const CapacitanceMatrix& cap, const ElasticMedium& med,
                                  double c_lip, double C_lip) {
    if (!(c_lip > 0.0) || !(C_lip > 0.0))
        throw parameter_error("convex_bounds: constants must be > 0");
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (cap.C + cap.C.transpose()));
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    ConvexBounds out;
    out.R_i_upper = lmax / (c_lip * (med.lambda + 2.0 * med.mu));
    out.R_e_lower = lmin / (C_lip * med.mu);
    return out;
}

struct LipConstants {
    double c_lip = 1.0;
    double C_lip = 1.0;
};

// Calibrates (c_lip, C_lip) on a family of reference bodies: the largest c
// and smallest C for which the perimeter interval and both convex radius
// bounds hold on every member, computed from forward capacitances and exact
// mesh geometry. At least one member attains equality in each constant.
inline LipConstants calibrate_constants(const std::vector<SurfaceMesh>& family,
                                        const ElasticMedium& med) {
    if (family.empty()) throw parameter_error("calibrate_constants: empty family");
    double c = std::numeric_limits<double>::infinity();
    double C = 0.0;
    for (const auto& mesh : family) {
        const CapacitanceMatrix cap = elastic_capacitance(mesh, med.lambda, med.mu);
        Eigen::SelfAdjointEigenSolver<Mat3> es(cap.C);
        const double lmin = es.eigenvalues().minCoeff();
        const double lmax = es.eigenvalues().maxCoeff();
        const double area = mesh.total_area();
        const auto [Ri, Re] = radii(mesh);
        const double lp2m = med.lambda + 2.0 * med.mu;
        // perimeter lower bound and thickness bound cap c from above
        c = std::min(c, lp2m * area / lmax);
        c = std::min(c, lmax / (lp2m * Ri));
        // perimeter upper bound and length bound push C from below
        C = std::max(C, med.mu * area / lmin);
        C = std::max(C, lmin / (med.mu * Re));
    }
    return {c, C};
}

} // namespace muscat

#endif
