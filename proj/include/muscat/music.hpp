#ifndef MUSCAT_MUSIC_HPP
#define MUSCAT_MUSIC_HPP

#include "muscat/acquisition.hpp"
#include "muscat/foldy_lax.hpp"
#include "muscat/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

// Localization from a response matrix: estimate the signal subspace from the
// SVD, project synthetic point-source vectors onto the orthogonal (noise)
// complement, and scan a 3D grid for the peaks of 1 / ||P phi_z||.

namespace muscat {

struct RankRule {
    enum class Mode { Fixed, Threshold } mode = Mode::Threshold;
    int k = 0;
    double tau = 1e-8;

    static RankRule fixed(int k) { return {Mode::Fixed, k, 0.0}; }
    static RankRule threshold(double tau) { return {Mode::Threshold, 0, tau}; }

    // defaults per data regime
    static RankRule noiseless() { return threshold(1e-8); }
    static RankRule noisy() { return threshold(1e-2); }
};

// Orthogonal projector onto the orthogonal complement of the estimated
// signal range of F (the null space of F^*), kept in factored form.
struct NoiseProjector {
    Eigen::MatrixXcd signal_basis; // N x k left singular vectors
    Eigen::VectorXd singular_values;
    int signal_rank = 0;

    int ambient_dim() const { return static_cast<int>(signal_basis.rows()); }
    int noise_rank() const { return ambient_dim() - signal_rank; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
        return v - signal_basis * (signal_basis.adjoint() * v);
    }

    Eigen::MatrixXcd matrix() const {
        const int N = ambient_dim();
        return Eigen::MatrixXcd::Identity(N, N) - signal_basis * signal_basis.adjoint();
    }
};

// gram = false: SVD of F directly. gram = true: the pre-multiplied variant
// that decomposes F F^* instead; the left subspace (and hence the projector)
// is the same, which is what the mixed-channel response matrices need. Note
// the gram route floors the recovered singular values near sqrt(machine
// epsilon) * sigma_1, so noiseless thresholds below ~1e-7 over-detect there.
inline NoiseProjector noise_projector(const ResponseMatrix& rm, const RankRule& rule,
                                      bool gram = false) {
    const int N = rm.size();
    if (N < 2) throw parameter_error("noise_projector: requires N >= 2");

    Eigen::MatrixXcd U;
    Eigen::VectorXd sigma;
    if (!gram) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(rm.F, Eigen::ComputeThinU);
        U = svd.matrixU();
        sigma = svd.singularValues();
    } else {
        const Eigen::MatrixXcd G = rm.F * rm.F.adjoint();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
        // ascending eigenvalues; flip to descending singular values
        U.resize(N, N);
        sigma.resize(N);
        for (int i = 0; i < N; ++i) {
            U.col(i) = es.eigenvectors().col(N - 1 - i);
            sigma(i) = std::sqrt(std::max(0.0, es.eigenvalues()(N - 1 - i)));
        }
    }

    if (!(sigma(0) > 1e-250))
        throw numerical_error("noise_projector: all singular values at the machine floor");

    int k = 0;
    if (rule.mode == RankRule::Mode::Fixed) {
        if (rule.k < 0 || rule.k >= N)
            throw parameter_error("noise_projector: fixed rank k = " + std::to_string(rule.k) +
                                  " must satisfy 0 <= k < N = " + std::to_string(N));
        k = rule.k;
    } else {
        while (k < N && sigma(k) / sigma(0) >= rule.tau) ++k;
        if (k == N)
            throw numerical_error("noise_projector: threshold " + std::to_string(rule.tau) +
                                  " leaves an empty noise subspace");
    }

    NoiseProjector P;
    P.signal_rank = k;
    P.singular_values = sigma;
    P.signal_basis = U.leftCols(k);
    return P;
}

// Synthetic point-source vector phi^j_z of one polarization: entry n is
// (pol(theta_n) . e_j) exp(-i (omega / c) theta_n . z), j in {1, 2, 3}.
inline Eigen::VectorXcd test_vector(Polarization kind, int j, const Vec3& z,
                                    const DirectionSet& dirs, const ElasticMedium& med) {
    if (!(med.omega > 0.0)) throw parameter_error("test_vector: requires omega > 0");
    if (j < 1 || j > 3) throw parameter_error("test_vector: component j must be 1, 2 or 3");
    const double c = kind == Polarization::P ? med.c_p : med.c_s;
    const double kappa = med.omega / c;
    const int N = dirs.size();
    Eigen::VectorXcd phi(N);
    for (int n = 0; n < N; ++n) {
        const Vec3 pol = detail::receive_polarization(kind, dirs.dirs[n]);
        phi(n) = pol(j - 1) * std::exp(-imag_unit * kappa * dirs.dirs[n].vec().dot(z));
    }
    return phi;
}

// Axis-aligned sampling grid; points enumerated x-fastest.
struct ImagingGrid {
    Vec3 lo = Vec3::Zero();
    double h = 0.0;
    std::array<int, 3> counts = {1, 1, 1};

    static ImagingGrid from_box(const Vec3& lo, const Vec3& hi, double h) {
        if (!(h > 0.0)) throw parameter_error("ImagingGrid: spacing h must be > 0");
        ImagingGrid g;
        g.lo = lo;
        g.h = h;
        for (int k = 0; k < 3; ++k) {
            if (hi[k] < lo[k])
                throw parameter_error("ImagingGrid: box upper corner below lower corner");
            g.counts[k] = static_cast<int>(std::floor((hi[k] - lo[k]) / h + 1e-9)) + 1;
        }
        return g;
    }

    long size() const {
        return static_cast<long>(counts[0]) * counts[1] * counts[2];
    }

    Vec3 point(int ix, int iy, int iz) const {
        return lo + h * Vec3(ix, iy, iz);
    }

    Vec3 point(long flat) const {
        const int ix = static_cast<int>(flat % counts[0]);
        const int iy = static_cast<int>((flat / counts[0]) % counts[1]);
        const int iz = static_cast<int>(flat / (static_cast<long>(counts[0]) * counts[1]));
        return point(ix, iy, iz);
    }

    long flat(int ix, int iy, int iz) const {
        return ix + static_cast<long>(counts[0]) * (iy + static_cast<long>(counts[1]) * iz);
    }
};

struct Peak {
    Vec3 position;
    double value = 0.0;
};

struct Pseudospectrum {
    ImagingGrid grid;
    std::vector<double> values; // grid.size() entries, x-fastest
    Polarization kind = Polarization::P;
    int component = 0; // 1..3, or 0 for the union (max) over j
    std::vector<Peak> peaks;
};

namespace detail {
// ||P phi|| below this floor is clamped, capping the pseudospectrum at 1e14.
inline constexpr double projector_norm_floor = 1e-14;
}

// I(z) = 1 / ||P phi^j_{z, kind}||, capped at 1 / floor. component = 0 takes
// the maximum over j = 1, 2, 3 (a point is flagged if any component flags
// it). The test-vector kind must match the channel's receive side.
inline Pseudospectrum pseudospectrum(const ResponseMatrix& rm, const ImagingGrid& grid,
                                     Polarization kind, int component, const RankRule& rule,
                                     bool gram = false) {
    if (kind != rm.channel.receive)
        throw parameter_error("pseudospectrum: test-vector kind " +
                              std::string(to_string(kind)) +
                              " does not match the channel receive side " +
                              std::string(to_string(rm.channel.receive)));
    if (component < 0 || component > 3)
        throw parameter_error("pseudospectrum: component must be 1..3 or 0 for the union");

    const NoiseProjector P = noise_projector(rm, rule, gram);
    const int N = rm.size();
    const double c = kind == Polarization::P ? rm.medium.c_p : rm.medium.c_s;
    const double kappa = rm.medium.omega / c;

    Eigen::Matrix<double, Eigen::Dynamic, 3> pol(N, 3);
    for (int n = 0; n < N; ++n)
        pol.row(n) = detail::receive_polarization(kind, rm.dirs.dirs[n]).transpose();

    Pseudospectrum ps;
    ps.grid = grid;
    ps.kind = kind;
    ps.component = component;
    ps.values.resize(static_cast<std::size_t>(grid.size()));

    Eigen::VectorXcd phase(N), phi(N);
    const int j_lo = component == 0 ? 1 : component;
    const int j_hi = component == 0 ? 3 : component;
    for (long p = 0; p < grid.size(); ++p) {
        const Vec3 z = grid.point(p);
        for (int n = 0; n < N; ++n)
            phase(n) = std::exp(-imag_unit * kappa * rm.dirs.dirs[n].vec().dot(z));
        double best = 0.0;
        for (int j = j_lo; j <= j_hi; ++j) {
            phi = pol.col(j - 1).cast<complex>().cwiseProduct(phase);
            const double n2 = P.apply(phi).norm();
            best = std::max(best, 1.0 / std::max(n2, detail::projector_norm_floor));
        }
        ps.values[static_cast<std::size_t>(p)] = best;
    }
    return ps;
}

struct PeakParams {
    double rho = 0.5;     // keep peaks above rho * global max
    double r_min = 0.0;   // suppression radius; 0 means 2 * grid spacing
};

struct LocateResult {
    std::vector<Peak> peaks;
    std::string diagnostic;
};

// Local maxima over the 26-neighborhoods, thresholded at rho * max, with
// non-maximum suppression; if expected_M is given, the top M survivors are
// returned. Peaks come out sorted by value, descending.
inline LocateResult locate(Pseudospectrum& ps, std::optional<int> expected_M = std::nullopt,
                           const PeakParams& params = {}) {
    const ImagingGrid& g = ps.grid;
    if (g.size() < 1) throw parameter_error("locate: empty grid");
    const double r_min = params.r_min > 0.0 ? params.r_min : 2.0 * g.h;

    double global_max = 0.0;
    for (double v : ps.values) global_max = std::max(global_max, v);
    const double threshold = params.rho * global_max;

    std::vector<Peak> candidates;
    for (int iz = 0; iz < g.counts[2]; ++iz)
        for (int iy = 0; iy < g.counts[1]; ++iy)
            for (int ix = 0; ix < g.counts[0]; ++ix) {
                const double v = ps.values[static_cast<std::size_t>(g.flat(ix, iy, iz))];
                if (v < threshold || v <= 0.0) continue;
                bool is_max = true;
                for (int dz = -1; dz <= 1 && is_max; ++dz)
                    for (int dy = -1; dy <= 1 && is_max; ++dy)
                        for (int dx = -1; dx <= 1 && is_max; ++dx) {
                            if (!dx && !dy && !dz) continue;
                            const int jx = ix + dx, jy = iy + dy, jz = iz + dz;
                            if (jx < 0 || jy < 0 || jz < 0 || jx >= g.counts[0] ||
                                jy >= g.counts[1] || jz >= g.counts[2])
                                continue;
                            if (ps.values[static_cast<std::size_t>(g.flat(jx, jy, jz))] > v)
                                is_max = false;
                        }
                if (is_max) candidates.push_back({g.point(ix, iy, iz), v});
            }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Peak& a, const Peak& b) { return a.value > b.value; });

    std::vector<Peak> kept;
    for (const auto& c : candidates) {
        bool suppressed = false;
        for (const auto& k : kept)
            if ((c.position - k.position).norm() < r_min) {
                suppressed = true;
                break;
            }
        if (!suppressed) kept.push_back(c);
    }
    if (expected_M && static_cast<int>(kept.size()) > *expected_M)
        kept.resize(static_cast<std::size_t>(*expected_M));

    LocateResult out;
    out.peaks = kept;
    if (kept.empty())
        out.diagnostic = "no local maximum above " + std::to_string(params.rho) +
                         " of the global maximum " + std::to_string(global_max);
    ps.peaks = out.peaks;
    return out;
}

} // namespace muscat

#endif
