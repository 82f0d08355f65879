#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ratchet/error.hpp"
#include "ratchet/fourier.hpp"
#include "ratchet/model.hpp"
#include "ratchet/phase_space.hpp"

namespace ratchet {

using cplx = std::complex<double>;

/// Truncated plane-wave basis on the 2pi-periodic coordinate:
/// levels k = -M..M with momenta hbar*k, stored at index k + M.
struct MomentumBasis {
    int M = 0;
    double hbar = 0.041;

    /// Smallest M, rounded up to a multiple of 10, with hbar*M >= coverage.
    static MomentumBasis for_coverage(double hbar, double coverage = 4.0) {
        if (!(hbar > 0.0)) throw ConfigError("hbar must be > 0");
        if (!(coverage > 0.0)) throw ConfigError("momentum coverage must be > 0");
        const int M = 10 * static_cast<int>(std::ceil(coverage / (10.0 * hbar) - 1e-12));
        return {std::max(M, 1), hbar};
    }

    std::size_t dim() const { return static_cast<std::size_t>(2 * M + 1); }
    std::size_t index(int k) const { return static_cast<std::size_t>(k + M); }
    int level(std::size_t i) const { return static_cast<int>(i) - M; }
    double momentum(std::size_t i) const { return hbar * level(i); }
    double energy(std::size_t i) const {
        const double p = momentum(i);
        return 0.5 * p * p;
    }
    /// Position grid point x_j = 2 pi j / N.
    double position(std::size_t j) const {
        return two_pi * static_cast<double>(j) / static_cast<double>(dim());
    }

    bool operator==(const MomentumBasis&) const = default;
};

enum class Representation { momentum, position };

/// Density operator in either the momentum basis or on the position grid.
struct DensityMatrix {
    MomentumBasis basis;
    Representation rep = Representation::momentum;
    Eigen::MatrixXcd entries;

    std::size_t dim() const { return basis.dim(); }
};

inline DensityMatrix pure_momentum_state(const MomentumBasis& basis, int k) {
    if (std::abs(k) > basis.M) throw ConfigError("momentum level outside the basis");
    DensityMatrix rho{basis, Representation::momentum, Eigen::MatrixXcd::Zero(basis.dim(), basis.dim())};
    rho.entries(basis.index(k), basis.index(k)) = 1.0;
    return rho;
}

/// |p=0><p=0|: uniform in x, zero momentum.
inline DensityMatrix initial_state_p0(const MomentumBasis& basis) { return pure_momentum_state(basis, 0); }

inline DensityMatrix maximally_mixed(const MomentumBasis& basis) {
    const auto n = basis.dim();
    return {basis, Representation::momentum,
            Eigen::MatrixXcd::Identity(n, n) / static_cast<double>(n)};
}

/// Projector onto a normalised state vector given in the momentum basis.
inline DensityMatrix projector(const MomentumBasis& basis, const Eigen::VectorXcd& psi) {
    Eigen::VectorXcd v = psi / psi.norm();
    return {basis, Representation::momentum, v * v.adjoint()};
}

namespace detail {

/// e^{-i M x_j}: relates the raw DFT output to the true position amplitudes.
inline Eigen::VectorXcd shift_phases(const MomentumBasis& basis) {
    Eigen::VectorXcd d(basis.dim());
    for (std::size_t j = 0; j < basis.dim(); ++j)
        d[j] = std::polar(1.0, -static_cast<double>(basis.M) * basis.position(j));
    return d;
}

}  // namespace detail

/// Conjugation by the unitary W_{jk} = e^{i k x_j} / sqrt(N).
inline DensityMatrix to_position(DensityMatrix rho) {
    if (rho.rep == Representation::position) return rho;
    const auto& ft = FourierTransform::cached(rho.dim());
    ft.to_position_raw(rho.entries);
    const Eigen::VectorXcd d = detail::shift_phases(rho.basis);
    const double scale = 1.0 / static_cast<double>(rho.dim());
    rho.entries = (d.asDiagonal() * rho.entries * d.conjugate().asDiagonal()) * scale;
    rho.rep = Representation::position;
    return rho;
}

inline DensityMatrix to_momentum(DensityMatrix rho) {
    if (rho.rep == Representation::momentum) return rho;
    const auto& ft = FourierTransform::cached(rho.dim());
    const Eigen::VectorXcd d = detail::shift_phases(rho.basis);
    rho.entries = d.conjugate().asDiagonal() * rho.entries * d.asDiagonal();
    ft.to_momentum_raw(rho.entries);
    rho.entries /= static_cast<double>(rho.dim());
    rho.rep = Representation::momentum;
    return rho;
}

inline double trace(const DensityMatrix& rho) { return rho.entries.trace().real(); }

/// Tr(rho^2) = squared Frobenius norm for Hermitian rho.
inline double purity(const DensityMatrix& rho) { return rho.entries.squaredNorm(); }

inline double hermiticity_defect(const DensityMatrix& rho) {
    return (rho.entries - rho.entries.adjoint()).cwiseAbs().maxCoeff();
}

/// Tr(rho p) = sum_k hbar k rho_kk.
inline double expect_momentum(const DensityMatrix& rho) {
    if (rho.rep != Representation::momentum) return expect_momentum(to_momentum(rho));
    double s = 0.0;
    for (std::size_t i = 0; i < rho.dim(); ++i) s += rho.basis.momentum(i) * rho.entries(i, i).real();
    return s;
}

/// Tr(rho p^2/2).
inline double expect_kinetic(const DensityMatrix& rho) {
    if (rho.rep != Representation::momentum) return expect_kinetic(to_momentum(rho));
    double s = 0.0;
    for (std::size_t i = 0; i < rho.dim(); ++i) s += rho.basis.energy(i) * rho.entries(i, i).real();
    return s;
}

/// Population on the outermost `margin` levels at each end of the ladder.
inline double boundary_population(const DensityMatrix& rho, int margin = 5) {
    if (rho.rep != Representation::momentum) return boundary_population(to_momentum(rho), margin);
    double s = 0.0;
    for (std::size_t i = 0; i < rho.dim(); ++i)
        if (std::abs(rho.basis.level(i)) > rho.basis.M - margin) s += rho.entries(i, i).real();
    return s;
}

inline Eigen::VectorXd eigenvalues(const DensityMatrix& rho) {
    Eigen::MatrixXcd h = 0.5 * (rho.entries + rho.entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

struct AuditReport {
    double trace = 0.0;
    double hermiticity_defect = 0.0;
    double min_eigenvalue = 0.0;  // NaN when the eigen-decomposition was skipped
    double purity = 0.0;
};

inline AuditReport audit(const DensityMatrix& rho, bool with_spectrum = true) {
    AuditReport r;
    r.trace = trace(rho);
    r.hermiticity_defect = hermiticity_defect(rho);
    r.purity = purity(rho);
    r.min_eigenvalue = with_spectrum ? eigenvalues(rho).minCoeff() : std::nan("");
    return r;
}

/// Half the trace norm of a - b.
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (!(a.basis == b.basis)) throw RepresentationError("trace distance between different bases");
    const DensityMatrix am = to_momentum(a);
    const DensityMatrix bm = to_momentum(b);
    DensityMatrix diff{a.basis, Representation::momentum, am.entries - bm.entries};
    return 0.5 * eigenvalues(diff).cwiseAbs().sum();
}

/// Momentum amplitudes of the periodised Gaussian centred at (x0, p0) with
/// position width sqrt(hbar/2), normalised on the truncated basis.
inline Eigen::VectorXcd coherent_state(const MomentumBasis& basis, double x0, double p0) {
    const double var_p = basis.hbar / 2.0;
    Eigen::VectorXcd c(basis.dim());
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const double dp = basis.momentum(i) - p0;
        c[i] = std::polar(std::exp(-dp * dp / (4.0 * var_p)), -basis.level(i) * x0);
    }
    return c / c.norm();
}

/// Husimi distribution Q(x0,p0) = <alpha|rho|alpha> at the cell centres of
/// `spec`, rescaled to unit sum over the window.
inline PhaseSpaceGrid husimi(const DensityMatrix& in, const GridSpec& spec) {
    spec.check();
    const DensityMatrix rho = to_momentum(in);
    const auto& basis = rho.basis;
    const int n = static_cast<int>(basis.dim());
    const double var_p = basis.hbar / 2.0;
    // Gaussian weights below ~1e-20 of the peak are dropped.
    const int half_band = static_cast<int>(std::ceil(std::sqrt(4.0 * var_p * 46.0) / basis.hbar)) + 1;

    PhaseSpaceGrid grid{spec, std::vector<double>(spec.nx * spec.np, 0.0), "unit_sum"};
    std::vector<double> g(n);
    std::vector<cplx> diag_sums;
    for (std::size_t ip = 0; ip < spec.np; ++ip) {
        const double p0 = spec.p_center(ip);
        const int centre = static_cast<int>(std::lround(p0 / basis.hbar)) + basis.M;
        const int lo = std::clamp(centre - half_band, 0, n - 1);
        const int hi = std::clamp(centre + half_band, 0, n - 1);
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            const double dp = basis.momentum(i) - p0;
            g[i] = std::exp(-dp * dp / (4.0 * var_p));
            norm += g[i] * g[i];
        }
        if (centre + half_band < 0 || centre - half_band > n - 1 || norm == 0.0) continue;
        const int width = hi - lo + 1;
        diag_sums.assign(width, cplx{});
        for (int l = lo; l <= hi; ++l)
            for (int k = l; k <= hi; ++k) diag_sums[k - l] += g[k] * g[l] * rho.entries(k, l);
        for (std::size_t ix = 0; ix < spec.nx; ++ix) {
            const double x0 = spec.x_center(ix);
            double q = diag_sums[0].real();
            for (int d = 1; d < width; ++d) q += 2.0 * (diag_sums[d] * std::polar(1.0, d * x0)).real();
            grid.at(ix, ip) = q / norm;
        }
    }
    const double total = grid.total();
    if (total > 0.0)
        for (double& v : grid.values) v /= total;
    return grid;
}

}  // namespace ratchet
