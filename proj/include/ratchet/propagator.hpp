#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ratchet/current_series.hpp"
#include "ratchet/error.hpp"
#include "ratchet/fourier.hpp"
#include "ratchet/hilbert.hpp"
#include "ratchet/model.hpp"

namespace ratchet {

/// How the no-jump operator K0 closes the Kraus set.
///   exact:       K0 = sqrt(1 - sum K^dag K)   (trace preserving to rounding)
///   first_order: K0 = 1 - 1/2 sum K^dag K     (trace defect O(dt^2) per step)
enum class KrausForm { exact, first_order };

/// Order of the symmetric (Strang) splitting of the Hamiltonian part.
///   kinetic_first:   T/2, V, T/2   (two basis changes per substep)
///   potential_first: V/2, T, V/2   (four basis changes per substep)
enum class Splitting { kinetic_first, potential_first };

inline KrausForm parse_kraus_form(const std::string& s) {
    if (s == "exact") return KrausForm::exact;
    if (s == "first_order") return KrausForm::first_order;
    throw ConfigError("unknown kraus_form '" + s + "' (expected exact or first_order)");
}

inline const char* to_string(KrausForm f) { return f == KrausForm::exact ? "exact" : "first_order"; }

inline Splitting parse_splitting(const std::string& s) {
    if (s == "kinetic_first") return Splitting::kinetic_first;
    if (s == "potential_first") return Splitting::potential_first;
    throw ConfigError("unknown splitting '" + s + "' (expected kinetic_first or potential_first)");
}

inline const char* to_string(Splitting s) {
    return s == Splitting::kinetic_first ? "kinetic_first" : "potential_first";
}

/// Energy gap between ladder levels k-1 and k: hbar^2 (2k - 1) / (2m).
inline double ladder_gap(int k, double hbar, double m = 1.0) {
    return hbar * hbar * (2.0 * k - 1.0) / (2.0 * m);
}

/// Bose occupation at the gap of level k; exactly 0 at T = 0.
inline double thermal_occupation(int k, double hbar, double T, double k_B = 1.0, double m = 1.0) {
    if (T <= 0.0) return 0.0;
    return 1.0 / std::expm1(ladder_gap(k, hbar, m) / (k_B * T));
}

/// Amplitude tables of the momentum-ladder Kraus operators
///
///   K1(+/-) = sum_k a1(k) |p_{+/-(k-1)}><p_{+/-k}|     (decay toward p = 0)
///   K2(+/-) = sum_k a2(k) |p_{+/-k}><p_{+/-(k-1)}|     (thermal excitation)
///
/// with a1(k) = sqrt(eps dt (1 + n(k)) k) and a2(k) = sqrt(eps dt n(k) k),
/// k = 1..M. Every K^dag K is diagonal, so K0 is stored as a diagonal too.
struct KrausSet {
    MomentumBasis basis;
    double dt = 0.0;
    double epsilon = 0.0;
    double T = 0.0;
    KrausForm form = KrausForm::exact;
    std::vector<double> nbar;  // index k = 0..M (nbar[0] unused)
    std::vector<double> a1;    // index k = 0..M (a1[0] = 0)
    std::vector<double> a2;
    Eigen::VectorXd k0;           // diagonal of K0
    Eigen::VectorXd jump_weight;  // diagonal of sum over ladder operators of K^dag K
    double completeness_defect = 0.0;

    bool identity() const { return epsilon == 0.0; }
    bool thermal() const { return T > 0.0; }
};

/// Bound on eps dt M (1 + n(M)), the first-order validity measure at the top
/// of the ladder, accepted by `build_kraus`.
inline constexpr double max_ladder_rate = 0.1;

inline KrausSet build_kraus(const SystemParams& params, const MomentumBasis& basis, double dt,
                            KrausForm form = KrausForm::exact) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    const double T = params.temperature();
    KrausSet ks;
    ks.basis = basis;
    ks.dt = dt;
    ks.epsilon = params.epsilon;
    ks.T = T;
    ks.form = form;
    const int M = basis.M;
    ks.nbar.assign(M + 1, 0.0);
    ks.a1.assign(M + 1, 0.0);
    ks.a2.assign(M + 1, 0.0);
    const double rate = params.epsilon * dt;
    for (int k = 1; k <= M; ++k) {
        const double n = thermal_occupation(k, basis.hbar, T, params.k_B, params.m);
        ks.nbar[k] = n;
        ks.a1[k] = std::sqrt(rate * (1.0 + n) * k);
        ks.a2[k] = std::sqrt(rate * n * k);
    }

    const std::size_t N = basis.dim();
    ks.jump_weight = Eigen::VectorXd::Zero(N);
    for (std::size_t i = 0; i < N; ++i) {
        const int j = basis.level(i);
        const int a = std::abs(j);
        double g = 0.0;
        if (a >= 1) g += ks.a1[a] * ks.a1[a];
        if (a + 1 <= M) g += (j == 0 ? 2.0 : 1.0) * ks.a2[a + 1] * ks.a2[a + 1];
        ks.jump_weight[i] = g;
    }
    const double top = rate * M * (1.0 + ks.nbar[M]);
    const double worst = ks.jump_weight.maxCoeff();
    if (!(top < max_ladder_rate) || !(worst < 1.0))
        throw StepSizeError("Kraus ladder outside first-order validity: eps*dt*M*(1+n(M)) = " +
                            std::to_string(top) + ", largest jump probability " +
                            std::to_string(worst) +
                            "; increase steps_per_period or reduce the basis size M");

    ks.k0.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double g = ks.jump_weight[i];
        ks.k0[i] = form == KrausForm::exact ? std::sqrt(1.0 - g) : 1.0 - 0.5 * g;
    }
    ks.completeness_defect =
        (ks.k0.array().square() + ks.jump_weight.array() - 1.0).abs().maxCoeff();
    return ks;
}

namespace detail {

/// out(t + r, t + c) += w[r] w[c] in(s + r, s + c) for r, c < w.size().
inline void add_ladder_block(Eigen::MatrixXcd& out, const Eigen::MatrixXcd& in, std::size_t t,
                             std::size_t s, const std::vector<double>& w) {
    const std::size_t m = w.size();
    for (std::size_t c = 0; c < m; ++c) {
        const double wc = w[c];
        if (wc == 0.0) continue;
        cplx* dst = out.col(t + c).data() + t;
        const cplx* src = in.col(s + c).data() + s;
        for (std::size_t r = 0; r < m; ++r) dst[r] += (w[r] * wc) * src[r];
    }
}

}  // namespace detail

/// rho' = K0 rho K0 + sum over the four ladder operators of K rho K^dag.
inline void dissipative_step(DensityMatrix& rho, const KrausSet& ks, Eigen::MatrixXcd& work) {
    if (rho.rep != Representation::momentum)
        throw RepresentationError("dissipative step needs the momentum representation");
    if (!(rho.basis == ks.basis)) throw RepresentationError("Kraus set built for a different basis");
    if (ks.identity()) return;
    const std::size_t N = rho.dim();
    const std::size_t M = static_cast<std::size_t>(ks.basis.M);
    work.resize(N, N);
    for (std::size_t c = 0; c < N; ++c) {
        const double kc = ks.k0[c];
        for (std::size_t r = 0; r < N; ++r) work(r, c) = (ks.k0[r] * kc) * rho.entries(r, c);
    }
    // Weights in block order: entry r of the block belongs to level M - r on
    // the negative branch and to level r + 1 on the positive branch.
    std::vector<double> up(M), down(M);
    for (std::size_t r = 0; r < M; ++r) {
        up[r] = ks.a1[r + 1];
        down[r] = ks.a1[M - r];
    }
    detail::add_ladder_block(work, rho.entries, M, M + 1, up);  // K1+: k -> k-1
    detail::add_ladder_block(work, rho.entries, 1, 0, down);    // K1-: -k -> -k+1
    if (ks.thermal()) {
        for (std::size_t r = 0; r < M; ++r) {
            up[r] = ks.a2[r + 1];
            down[r] = ks.a2[M - r];
        }
        detail::add_ladder_block(work, rho.entries, M + 1, M, up);  // K2+: k-1 -> k
        detail::add_ladder_block(work, rho.entries, 0, 1, down);    // K2-: -k+1 -> -k
    }
    rho.entries.swap(work);
}

inline DensityMatrix dissipative_step(DensityMatrix rho, const KrausSet& ks) {
    Eigen::MatrixXcd work;
    dissipative_step(rho, ks, work);
    return rho;
}

/// Phase tables for the split-operator Hamiltonian step over one period.
struct SplitStepPlan {
    MomentumBasis basis;
    SystemParams params;
    std::size_t steps_per_period = 1000;
    double dt = 0.0;
    Splitting splitting = Splitting::kinetic_first;
    Eigen::VectorXcd kinetic_half;  // exp(-i p_k^2 dt / (4 m hbar))
    Eigen::VectorXcd kinetic_full;  // exp(-i p_k^2 dt / (2 m hbar))
    Eigen::VectorXd static_part;    // V0(x_j)
    Eigen::VectorXd drive_shape;    // F sin(x_j)

    /// exp(-i V(x_j, t) tau / hbar) / N, the potential phase with the
    /// round-trip DFT normalisation folded in.
    Eigen::VectorXcd potential_phase(double t, double tau) const {
        const double g = drive(t, params);
        const double scale = 1.0 / static_cast<double>(basis.dim());
        Eigen::VectorXcd u(basis.dim());
        for (Eigen::Index j = 0; j < u.size(); ++j)
            u[j] = std::polar(scale, -(static_part[j] + drive_shape[j] * g) * tau / basis.hbar);
        return u;
    }
};

inline SplitStepPlan make_split_plan(const SystemParams& params, const MomentumBasis& basis,
                                     std::size_t steps_per_period,
                                     Splitting splitting = Splitting::kinetic_first) {
    if (steps_per_period == 0) throw ConfigError("steps_per_period must be positive");
    SplitStepPlan plan;
    plan.basis = basis;
    plan.params = params;
    plan.steps_per_period = steps_per_period;
    plan.dt = two_pi / static_cast<double>(steps_per_period);
    plan.splitting = splitting;
    const std::size_t N = basis.dim();
    plan.kinetic_half.resize(N);
    plan.kinetic_full.resize(N);
    plan.static_part.resize(N);
    plan.drive_shape.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double p = basis.momentum(i);
        const double e = p * p / (2.0 * params.m);
        plan.kinetic_half[i] = std::polar(1.0, -e * plan.dt / (2.0 * basis.hbar));
        plan.kinetic_full[i] = std::polar(1.0, -e * plan.dt / basis.hbar);
        const double x = basis.position(i);
        plan.static_part[i] = static_potential(x, params);
        plan.drive_shape[i] = params.free_particle ? 0.0 : params.F * std::sin(x);
    }
    return plan;
}

namespace detail {

/// a(r, c) *= u[r] conj(u[c]).
inline void conjugate_by_diagonal(Eigen::MatrixXcd& a, const Eigen::VectorXcd& u) {
    const Eigen::Index n = a.rows();
    for (Eigen::Index c = 0; c < n; ++c) {
        const cplx uc = std::conj(u[c]);
        cplx* col = a.col(c).data();
        for (Eigen::Index r = 0; r < n; ++r) col[r] *= u[r] * uc;
    }
}

}  // namespace detail

/// Hamiltonian part of one substep [t, t + dt]; the drive is evaluated at the
/// midpoint. rho enters and leaves in the momentum representation and must be
/// Hermitian: only its upper triangle is read.
inline void unitary_step(DensityMatrix& rho, const SplitStepPlan& plan, double t,
                         const FourierTransform& ft) {
    if (rho.rep != Representation::momentum)
        throw RepresentationError("unitary step needs the momentum representation");
    auto& a = rho.entries;
    const double mid = t + 0.5 * plan.dt;
    if (plan.splitting == Splitting::kinetic_first) {
        detail::conjugate_by_diagonal(a, plan.kinetic_half);
        ft.to_position_hermitian(a);
        detail::conjugate_by_diagonal(a, plan.potential_phase(mid, plan.dt));
        ft.to_momentum_hermitian(a);
        detail::conjugate_by_diagonal(a, plan.kinetic_half);
    } else {
        const Eigen::VectorXcd u = plan.potential_phase(mid, 0.5 * plan.dt);
        ft.to_position_hermitian(a);
        detail::conjugate_by_diagonal(a, u);
        ft.to_momentum_hermitian(a);
        detail::conjugate_by_diagonal(a, plan.kinetic_full);
        ft.to_position_hermitian(a);
        detail::conjugate_by_diagonal(a, u);
        ft.to_momentum_hermitian(a);
    }
}

inline DensityMatrix unitary_step(DensityMatrix rho, const SplitStepPlan& plan, double t) {
    unitary_step(rho, plan, t, FourierTransform::cached(rho.dim()));
    return rho;
}

/// Numerical scheme choices shared by `evolve` and the period map.
struct SchemeConfig {
    std::size_t steps_per_period = 1000;
    Splitting splitting = Splitting::kinetic_first;
    KrausForm kraus_form = KrausForm::exact;
};

/// Unitary step followed by the dissipative step, composed over substeps.
class Propagator {
public:
    Propagator(const SystemParams& params, const MomentumBasis& basis, const SchemeConfig& scheme)
        : plan_(make_split_plan(params, basis, scheme.steps_per_period, scheme.splitting)),
          kraus_(build_kraus(params, basis, plan_.dt, scheme.kraus_form)),
          ft_(&FourierTransform::cached(basis.dim())) {
        validate(params);
    }

    const SplitStepPlan& plan() const { return plan_; }
    const KrausSet& kraus() const { return kraus_; }
    const MomentumBasis& basis() const { return plan_.basis; }
    const SystemParams& params() const { return plan_.params; }
    double dt() const { return plan_.dt; }
    std::size_t steps_per_period() const { return plan_.steps_per_period; }

    void substep(DensityMatrix& rho, double t) {
        check_basis(rho);
        unitary_step(rho, plan_, t, *ft_);
        dissipative_step(rho, kraus_, work_);
    }

    /// One drive period starting at phase t0. Substep n starts at t0 + n dt.
    /// rho must be Hermitian.
    void period(DensityMatrix& rho, double t0) {
        check_basis(rho);
        for (std::size_t n = 0; n < plan_.steps_per_period; ++n)
            substep(rho, t0 + static_cast<double>(n) * plan_.dt);
    }

private:
    void check_basis(DensityMatrix& rho) const {
        if (!(rho.basis == plan_.basis))
            throw RepresentationError("density matrix basis does not match the propagator");
        if (rho.rep != Representation::momentum) rho = to_momentum(std::move(rho));
    }

    SplitStepPlan plan_;
    KrausSet kraus_;
    const FourierTransform* ft_;
    Eigen::MatrixXcd work_;
};

struct AuditRecord {
    std::size_t period = 0;
    AuditReport report;
    double boundary_population = 0.0;
};

struct EvolutionConfig {
    SchemeConfig scheme;
    std::size_t periods = 50;
    std::size_t record_every = 0;  // substeps between samples; 0 means once per period
    std::size_t audit_every = 10;  // periods; 0 disables periodic audits
    bool positivity_audit = true;
    double t0 = 0.0;
    int boundary_margin = 5;
    double boundary_tolerance = 1e-6;
    double trace_tolerance = 1e-6;
    double hermiticity_tolerance = 1e-10;
    double eigenvalue_floor = -1e-8;

    std::size_t record_interval() const {
        return record_every == 0 ? scheme.steps_per_period : record_every;
    }
};

struct EvolutionResult {
    DensityMatrix state;
    CurrentSeries currents;
    std::vector<double> traces;    // at each sample
    std::vector<double> purities;  // at each sample
    std::vector<AuditRecord> audits;
};

/// Periodic integrity audit; throws EvolutionIntegrityError on failure.
inline AuditRecord audit_state(const DensityMatrix& rho, std::size_t period,
                               const EvolutionConfig& cfg) {
    AuditRecord rec{period, audit(rho, cfg.positivity_audit),
                    boundary_population(rho, cfg.boundary_margin)};
    const auto& r = rec.report;
    const std::string at = " at period " + std::to_string(period);
    if (!(std::abs(r.trace - 1.0) <= cfg.trace_tolerance))
        throw EvolutionIntegrityError("trace drifted to " + std::to_string(r.trace) + at, period);
    if (!(r.hermiticity_defect <= cfg.hermiticity_tolerance))
        throw EvolutionIntegrityError("hermiticity defect " + std::to_string(r.hermiticity_defect) + at,
                                      period);
    if (cfg.positivity_audit && !(r.min_eigenvalue >= cfg.eigenvalue_floor))
        throw EvolutionIntegrityError("negative eigenvalue " + std::to_string(r.min_eigenvalue) + at,
                                      period);
    return rec;
}

inline EvolutionResult evolve(Propagator& prop, DensityMatrix rho, const EvolutionConfig& cfg) {
    if (cfg.periods == 0) throw ConfigError("periods must be positive");
    if (cfg.scheme.steps_per_period != prop.steps_per_period())
        throw ConfigError("evolution config and propagator disagree on steps_per_period");
    if (!(rho.basis == prop.basis())) throw RepresentationError("basis mismatch in evolve");
    rho = to_momentum(std::move(rho));
    EvolutionResult out;
    const std::size_t spp = prop.steps_per_period();
    const std::size_t every = cfg.record_interval();
    std::size_t until_record = every;
    std::size_t done = 0;
    const double dt = prop.dt();
    const double start_periods = cfg.t0 / two_pi;
    for (std::size_t period = 1; period <= cfg.periods; ++period) {
        for (std::size_t n = 0; n < spp; ++n) {
            prop.substep(rho, cfg.t0 + static_cast<double>(n) * dt);
            ++done;
            if (--until_record == 0) {
                until_record = every;
                out.currents.push(start_periods + static_cast<double>(done) / static_cast<double>(spp),
                                  expect_momentum(rho));
                out.traces.push_back(trace(rho));
                out.purities.push_back(purity(rho));
            }
        }
        const double edge = boundary_population(rho, cfg.boundary_margin);
        if (!(edge < cfg.boundary_tolerance))
            throw TruncationError("population " + std::to_string(edge) + " on the outer " +
                                      std::to_string(cfg.boundary_margin) +
                                      " momentum levels at period " + std::to_string(period) +
                                      "; enlarge the basis (M or p_coverage)",
                                  period);
        if (cfg.audit_every > 0 && period % cfg.audit_every == 0)
            out.audits.push_back(audit_state(rho, period, cfg));
    }
    out.state = std::move(rho);
    return out;
}

inline EvolutionResult evolve(DensityMatrix rho, const SystemParams& params,
                              const EvolutionConfig& cfg) {
    Propagator prop(params, rho.basis, cfg.scheme);
    return evolve(prop, std::move(rho), cfg);
}

}  // namespace ratchet
