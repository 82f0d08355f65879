#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ratchet/error.hpp"
#include "ratchet/hilbert.hpp"
#include "ratchet/propagator.hpp"

namespace ratchet {

/// One drive period of the dissipative evolution as a linear map on operators.
class PeriodMap {
public:
    PeriodMap(const SystemParams& params, const MomentumBasis& basis, const SchemeConfig& scheme,
              double t0 = 0.0)
        : prop_(params, basis, scheme), t0_(t0) {}

    const MomentumBasis& basis() const { return prop_.basis(); }
    Propagator& propagator() { return prop_; }
    double start_phase() const { return t0_; }

    /// Image of a Hermitian operator; only the upper triangle is read.
    DensityMatrix apply_hermitian(DensityMatrix rho) {
        check(rho);
        prop_.period(rho, t0_);
        return rho;
    }

    /// General operators are split as X = H1 + i H2 with H1, H2 Hermitian.
    /// Anti-Hermitian parts below 1e-14 of the norm count as rounding.
    DensityMatrix apply(DensityMatrix rho) {
        check(rho);
        const Eigen::MatrixXcd anti = 0.5 * (rho.entries - rho.entries.adjoint());
        if (anti.norm() <= 1e-14 * rho.entries.norm()) return apply_hermitian(std::move(rho));
        DensityMatrix re{rho.basis, Representation::momentum,
                         0.5 * (rho.entries + rho.entries.adjoint())};
        DensityMatrix im{rho.basis, Representation::momentum, cplx(0.0, -1.0) * anti};
        prop_.period(re, t0_);
        prop_.period(im, t0_);
        re.entries += cplx(0.0, 1.0) * im.entries;
        return re;
    }

private:
    void check(DensityMatrix& rho) const {
        if (!(rho.basis == basis())) throw RepresentationError("period map: basis mismatch");
        if (rho.rep != Representation::momentum) rho = to_momentum(std::move(rho));
    }

    Propagator prop_;
    double t0_;
};

inline DensityMatrix apply(PeriodMap& map, DensityMatrix rho) { return map.apply(std::move(rho)); }

struct SpectrumResult {
    std::vector<cplx> eigenvalues;  // descending modulus
    std::vector<double> residuals;  // Krylov estimate of ||A u - lambda u|| for unit u
    double gap = 0.0;               // 1 - |lambda_2|
    DensityMatrix invariant_state;
    double invariant_residual = 0.0;  // ||A rho* - rho*||_F, measured with one extra period
    std::size_t iterations = 0;
    bool converged = false;
};

struct KrylovOptions {
    std::size_t count = 6;
    double tol = 1e-8;
    std::size_t max_iters = 150;
    std::uint64_t seed = 1;
    double perturbation = 1e-2;  // relative size of the random Hermitian start perturbation
};

namespace detail {

/// Maximally mixed state plus a small random Hermitian matrix.
inline Eigen::MatrixXcd krylov_start(std::size_t n, std::uint64_t seed, double size) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXcd h(n, n);
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r) h(r, c) = cplx(normal(rng), normal(rng));
    h = 0.5 * (h + h.adjoint()).eval();
    const double scale = size / static_cast<double>(n) / std::sqrt(static_cast<double>(n));
    return Eigen::MatrixXcd::Identity(n, n) / static_cast<double>(n) + scale * h;
}

struct RitzPairs {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;  // columns, unit norm
    std::vector<Eigen::Index> order;  // by descending modulus
};

inline RitzPairs ritz(const Eigen::MatrixXd& h) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(h, true);
    RitzPairs rp{es.eigenvalues(), es.eigenvectors(), {}};
    for (Eigen::Index i = 0; i < rp.vectors.cols(); ++i) rp.vectors.col(i).normalize();
    rp.order.resize(static_cast<std::size_t>(rp.values.size()));
    std::iota(rp.order.begin(), rp.order.end(), 0);
    std::stable_sort(rp.order.begin(), rp.order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ma = std::abs(rp.values[a]);
        const double mb = std::abs(rp.values[b]);
        if (std::abs(ma - mb) > 1e-12 * std::max(1.0, ma)) return ma > mb;
        return rp.values[a].imag() > rp.values[b].imag();
    });
    return rp;
}

/// Re Tr(a^dag b): the real inner product on Hermitian operators.
inline double real_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const double* x = reinterpret_cast<const double*>(a.data());
    const double* y = reinterpret_cast<const double*>(b.data());
    double s = 0.0;
    for (Eigen::Index i = 0; i < 2 * a.size(); ++i) s += x[i] * y[i];
    return s;
}

}  // namespace detail

/// Leading eigenvalues of the period map by Arnoldi iteration, using only
/// `apply_hermitian`. The map preserves Hermiticity, so the iteration runs on
/// the real space of Hermitian operators with a real Hessenberg matrix;
/// complex eigenvalues come out in conjugate pairs. Each iteration costs one
/// drive period.
inline SpectrumResult leading_spectrum(PeriodMap& map, const KrylovOptions& opt = {}) {
    if (opt.count < 2) throw ConfigError("spectrum count must be at least 2");
    const std::size_t n = map.basis().dim();
    const std::size_t dim = n * n;
    if (opt.count >= dim) throw ConfigError("spectrum count must be smaller than N^2");
    const std::size_t max_m = std::min(opt.max_iters, dim);

    std::vector<Eigen::MatrixXcd> v;
    v.reserve(max_m + 1);
    Eigen::MatrixXcd start = detail::krylov_start(n, opt.seed, opt.perturbation);
    v.push_back(start / start.norm());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(max_m + 1, max_m);

    SpectrumResult out;
    detail::RitzPairs rp;
    std::size_t m = 0;
    double tail = 0.0;
    for (std::size_t j = 0; j < max_m; ++j) {
        Eigen::MatrixXcd w =
            map.apply_hermitian(DensityMatrix{map.basis(), Representation::momentum, v[j]}).entries;
        const double wnorm = w.norm();
        // Modified Gram-Schmidt with one reorthogonalisation pass.
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t i = 0; i <= j; ++i) {
                const double c = detail::real_inner(v[i], w);
                h(i, j) += c;
                w -= c * v[i];
            }
        tail = w.norm();
        h(j + 1, j) = tail;
        m = j + 1;
        const bool breakdown = tail <= 1e-13 * std::max(wnorm, 1.0);
        if (!breakdown) v.push_back(w / tail);

        if (m >= opt.count + 1 || breakdown || m == max_m) {
            rp = detail::ritz(h.topLeftCorner(m, m));
            const std::size_t have = std::min(opt.count, m);
            bool ok = have == opt.count;
            for (std::size_t i = 0; i < have && ok; ++i) {
                const double res = breakdown ? 0.0 : tail * std::abs(rp.vectors(m - 1, rp.order[i]));
                ok = res <= opt.tol;
            }
            if (ok || breakdown) {
                out.converged = ok;
                break;
            }
        }
    }
    out.iterations = m;
    const bool exhausted = v.size() == m;

    const std::size_t have = std::min(opt.count, static_cast<std::size_t>(rp.values.size()));
    for (std::size_t i = 0; i < have; ++i) {
        const Eigen::Index idx = rp.order[i];
        out.eigenvalues.push_back(rp.values[idx]);
        out.residuals.push_back(exhausted ? 0.0 : tail * std::abs(rp.vectors(m - 1, idx)));
    }
    out.gap = have >= 2 ? 1.0 - std::abs(out.eigenvalues[1]) : 0.0;

    // Ritz vector of the leading value; its phase is fixed through the trace.
    Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(n, n);
    const Eigen::Index lead = rp.order.front();
    for (std::size_t i = 0; i < m; ++i) sigma += rp.vectors(static_cast<Eigen::Index>(i), lead) * v[i];
    const cplx tr = sigma.trace();
    if (std::abs(tr) < 1e-300) throw Error("spectral", "leading eigenoperator is traceless");
    sigma /= tr;
    sigma = 0.5 * (sigma + sigma.adjoint()).eval();
    sigma /= sigma.trace().real();
    out.invariant_state = DensityMatrix{map.basis(), Representation::momentum, sigma};
    const DensityMatrix image = map.apply_hermitian(out.invariant_state);
    out.invariant_residual = (image.entries - sigma).norm();
    return out;
}

/// Trace distance between the invariant state and an evolved state.
inline double attractor_overlap(const SpectrumResult& spectrum, const DensityMatrix& evolved) {
    return trace_distance(spectrum.invariant_state, evolved);
}

}  // namespace ratchet
