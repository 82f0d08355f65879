#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dense_oracle.hpp"
#include "ratchet/spectral.hpp"

using namespace ratchet;

namespace {

SystemParams small_system(double T) {
    auto p = preset(PresetName::strong);
    p.hbar = 0.8;
    p.T = T;
    return p;
}

Eigen::MatrixXcd random_matrix(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(n, n);
    for (Eigen::Index c = 0; c < a.cols(); ++c)
        for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = cplx(g(rng), g(rng));
    return a;
}

}  // namespace

TEST(PeriodMap, GeneralOperatorsMatchDenseSuperoperator) {
    oracle::Setup s;
    s.params = small_system(0.1);
    const MomentumBasis b{2, s.params.hbar};
    PeriodMap map(s.params, b, {});
    const auto dense = oracle::period(s);
    for (unsigned seed : {3u, 4u}) {
        const Eigen::MatrixXcd x = random_matrix(b.dim(), seed);
        const auto out = apply(map, DensityMatrix{b, Representation::momentum, x});
        EXPECT_LE((out.entries - oracle::apply(dense, x)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(PeriodMap, EqualsOnePeriodOfEvolve) {
    auto p = small_system(0.01);
    const MomentumBasis b{4, p.hbar};
    PeriodMap map(p, b, {});
    EvolutionConfig cfg;
    cfg.periods = 1;
    cfg.boundary_tolerance = 2.0;  // basis narrower than the edge margin
    const auto res = evolve(initial_state_p0(b), p, cfg);
    const auto out = map.apply(initial_state_p0(b));
    EXPECT_LE((out.entries - res.state.entries).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(map.apply(initial_state_p0(MomentumBasis{3, p.hbar})), RepresentationError);
}

TEST(LeadingSpectrum, MatchesFullDenseSpectrumOnSmallBasis) {
    for (double T : {0.0, 0.1}) {
        oracle::Setup s;
        s.params = small_system(T);
        const MomentumBasis b{2, s.params.hbar};
        PeriodMap map(s.params, b, {});
        KrylovOptions opt;
        opt.count = 6;
        const auto res = leading_spectrum(map, opt);
        EXPECT_TRUE(res.converged);

        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(oracle::period(s), false);
        const Eigen::VectorXcd dense = es.eigenvalues();
        std::vector<double> moduli;
        for (Eigen::Index i = 0; i < dense.size(); ++i) moduli.push_back(std::abs(dense[i]));
        std::sort(moduli.rbegin(), moduli.rend());

        ASSERT_EQ(res.eigenvalues.size(), 6u);
        for (std::size_t i = 0; i < 6; ++i) {
            double nearest = 1e300;
            for (Eigen::Index j = 0; j < dense.size(); ++j)
                nearest = std::min(nearest, std::abs(dense[j] - res.eigenvalues[i]));
            EXPECT_LE(nearest, 1e-8) << "T=" << T << " i=" << i;
            EXPECT_NEAR(std::abs(res.eigenvalues[i]), moduli[i], 1e-8);
            EXPECT_LE(std::abs(res.eigenvalues[i]), 1.0 + 1e-6);
        }
        EXPECT_NEAR(std::abs(res.eigenvalues[0] - 1.0), 0.0, 1e-6);
        EXPECT_NEAR(res.gap, 1.0 - moduli[1], 1e-8);
    }
}

TEST(LeadingSpectrum, EigenvaluesComeInConjugatePairs) {
    auto p = small_system(0.1);
    const MomentumBasis b{4, p.hbar};
    PeriodMap map(p, b, {});
    KrylovOptions opt;
    opt.count = 8;
    const auto res = leading_spectrum(map, opt);
    for (const cplx& z : res.eigenvalues) {
        if (std::abs(z.imag()) < 1e-10) continue;
        const auto partner = std::find_if(res.eigenvalues.begin(), res.eigenvalues.end(),
                                          [&](const cplx& w) { return std::abs(w - std::conj(z)) < opt.tol; });
        const bool last = &z == &res.eigenvalues.back();
        EXPECT_TRUE(partner != res.eigenvalues.end() || last) << z;
    }
}

TEST(LeadingSpectrum, InvariantStateIsAFixedPoint) {
    auto p = small_system(0.1);
    const MomentumBasis b{4, p.hbar};
    PeriodMap map(p, b, {});
    const auto res = leading_spectrum(map);
    const auto& rho = res.invariant_state;
    const auto a = audit(rho);
    EXPECT_NEAR(a.trace, 1.0, 1e-12);
    EXPECT_EQ(a.hermiticity_defect, 0.0);
    EXPECT_GE(a.min_eigenvalue, -1e-8);
    EXPECT_LE(res.invariant_residual, 1e-7);
    const auto image = map.apply(rho);
    EXPECT_LE(trace_distance(image, rho), 1e-7);
    EXPECT_NEAR(attractor_overlap(res, rho), 0.0, 1e-14);
}

TEST(LeadingSpectrum, ZeroTemperatureDampingHasGroundStateAsDarkState) {
    SystemParams p;
    p.free_particle = true;
    p.Gamma = p.epsilon = 0.05;
    p.T = 0.0;
    const MomentumBasis b{5, 0.2};
    PeriodMap map(p, b, {});
    const auto res = leading_spectrum(map);
    EXPECT_TRUE(res.converged);
    EXPECT_LT(trace_distance(res.invariant_state, initial_state_p0(b)), 1e-6);
    EXPECT_GT(res.gap, 0.0);
}

TEST(LeadingSpectrum, UnitaryMapHasNoGap) {
    auto p = small_system(0.0);
    p.Gamma = p.epsilon = 0.0;
    const MomentumBasis b{3, p.hbar};
    PeriodMap map(p, b, {});
    const auto res = leading_spectrum(map);
    EXPECT_LT(res.gap, 1e-3);
    for (const cplx& z : res.eigenvalues) EXPECT_NEAR(std::abs(z), 1.0, 1e-6);
}

TEST(LeadingSpectrum, RejectsDegenerateRequests) {
    auto p = small_system(0.0);
    const MomentumBasis b{1, p.hbar};
    PeriodMap map(p, b, {});
    KrylovOptions opt;
    opt.count = 1;
    EXPECT_THROW(leading_spectrum(map, opt), ConfigError);
    opt.count = 9;
    EXPECT_THROW(leading_spectrum(map, opt), ConfigError);
}

TEST(LeadingSpectrum, StopsAtIterationLimitUnconverged) {
    auto p = small_system(0.1);
    const MomentumBasis b{6, p.hbar};
    PeriodMap map(p, b, {});
    KrylovOptions opt;
    opt.max_iters = 8;
    opt.tol = 1e-14;
    const auto res = leading_spectrum(map, opt);
    EXPECT_FALSE(res.converged);
    EXPECT_EQ(res.iterations, 8u);
    EXPECT_EQ(res.eigenvalues.size(), 6u);
}
