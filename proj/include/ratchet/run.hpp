#pragma once

#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ratchet/classical.hpp"
#include "ratchet/config.hpp"
#include "ratchet/current_series.hpp"
#include "ratchet/hilbert.hpp"
#include "ratchet/phase_space.hpp"
#include "ratchet/propagator.hpp"
#include "ratchet/spectral.hpp"

namespace ratchet {

namespace fs = std::filesystem;

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

/// Process exit status for an error category.
inline int exit_code(const std::string& category) {
    if (category == "config") return 2;
    if (category == "classical") return 3;
    if (category == "hilbert") return 4;
    if (category == "propagator") return 5;
    if (category == "spectral") return 6;
    if (category == "io") return 7;
    return 1;
}

namespace detail {

inline std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

inline std::string g17(double v) { return format_double(v); }

}  // namespace detail

/// period_index,time_periods,instantaneous_mean_p,cumulative_J[,trace,purity]
inline std::string format_currents(const CurrentSeries& s, const std::vector<double>* traces = nullptr,
                                   const std::vector<double>* purities = nullptr) {
    using detail::g17;
    std::ostringstream os;
    os << "period_index,time_periods,instantaneous_mean_p,cumulative_J";
    if (traces) os << ",trace,purity";
    os << "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto period = static_cast<long long>(std::floor(s.times[i] + 1e-9));
        os << period << "," << g17(s.times[i]) << "," << g17(s.instantaneous[i]) << ","
           << g17(s.cumulative[i]);
        if (traces) os << "," << g17((*traces)[i]) << "," << g17((*purities)[i]);
        os << "\n";
    }
    return os.str();
}

/// Header `nx np xmin xmax pmin pmax`, then nx rows of np values.
inline std::string format_grid(const PhaseSpaceGrid& grid) {
    using detail::g17;
    std::ostringstream os;
    const auto& s = grid.spec;
    os << s.nx << " " << s.np << " " << g17(0.0) << " " << g17(two_pi) << " " << g17(s.pmin) << " "
       << g17(s.pmax) << "\n";
    for (std::size_t ix = 0; ix < s.nx; ++ix) {
        for (std::size_t ip = 0; ip < s.np; ++ip) os << (ip ? " " : "") << g17(grid.at(ix, ip));
        os << "\n";
    }
    return os.str();
}

inline PhaseSpaceGrid parse_grid(const std::string& text) {
    std::istringstream is(text);
    PhaseSpaceGrid g;
    double xmin = 0, xmax = 0;
    if (!(is >> g.spec.nx >> g.spec.np >> xmin >> xmax >> g.spec.pmin >> g.spec.pmax))
        throw IoError("malformed phase-space grid header");
    g.values.resize(g.spec.nx * g.spec.np);
    for (double& v : g.values)
        if (!(is >> v)) throw IoError("phase-space grid truncated");
    return g;
}

/// index,real,imag,modulus,residual
inline std::string format_spectrum(const SpectrumResult& r) {
    using detail::g17;
    std::ostringstream os;
    os << "index,real,imag,modulus,residual\n";
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
        os << i << "," << g17(r.eigenvalues[i].real()) << "," << g17(r.eigenvalues[i].imag()) << ","
           << g17(std::abs(r.eigenvalues[i])) << "," << g17(r.residuals[i]) << "\n";
    return os.str();
}

inline void write_file(const fs::path& path, const std::string& text) {
    auto out = detail::open_output(path);
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace detail {

inline std::string format_audit(const AuditRecord& a) {
    std::ostringstream os;
    os << "audit period=" << a.period << " trace=" << g17(a.report.trace)
       << " hermiticity_defect=" << g17(a.report.hermiticity_defect)
       << " min_eigenvalue=" << g17(a.report.min_eigenvalue) << " purity=" << g17(a.report.purity)
       << " boundary_population=" << g17(a.boundary_population) << "\n";
    return os.str();
}

inline EvolutionConfig evolution_config(const RunConfig& cfg) {
    EvolutionConfig ec;
    ec.scheme = {cfg.steps_per_period, cfg.splitting, cfg.kraus_form};
    ec.periods = cfg.periods;
    ec.record_every = cfg.record_every;
    ec.audit_every = cfg.audit_every;
    ec.positivity_audit = cfg.positivity_audit;
    return ec;
}

inline void run_classical(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    auto ens = classical::init_chaotic_line(cfg.trajectories, cfg.seed);
    for (auto& pt : ens.points) pt.p = cfg.initial_p;
    classical::IntegratorConfig ic;
    ic.steps_per_period = cfg.steps_per_period;
    ic.periods = cfg.periods;
    ic.record_every = cfg.record_every;
    ic.noise = cfg.noise;
    ic.workers = cfg.workers;
    const auto res = classical::evolve_ensemble(std::move(ens), cfg.params, ic);
    write_file(out / "currents.csv", format_currents(res.currents));
    log << "classical trajectories=" << cfg.trajectories
        << " noise_convention=" << classical::to_string(cfg.noise) << "\n";
    if (!res.currents.empty())
        log << "final cumulative_J=" << g17(res.currents.cumulative.back())
            << " standard_error=" << g17(res.current_standard_error()) << "\n";
    if (cfg.phase_space) {
        const auto grid = classical::histogram(res.ensemble, cfg.grid);
        write_file(out / "phase_space.grid", format_grid(grid));
        log << "phase_space normalization=" << grid.normalization
            << " momentum_asymmetry=" << g17(grid.momentum_asymmetry()) << "\n";
    }
}

inline void run_quantum(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto basis = cfg.basis();
    const auto ec = evolution_config(cfg);
    log << "quantum M=" << basis.M << " N=" << basis.dim() << " hbar=" << g17(basis.hbar)
        << " splitting=" << to_string(cfg.splitting) << " kraus_form=" << to_string(cfg.kraus_form)
        << "\n";
    Propagator prop(cfg.params, basis, ec.scheme);
    log << "kraus completeness_defect=" << g17(prop.kraus().completeness_defect)
        << " max_jump_probability=" << g17(prop.kraus().jump_weight.maxCoeff()) << "\n";
    EvolutionResult res;
    try {
        res = evolve(prop, pure_momentum_state(basis, cfg.initial_k), ec);
    } catch (const Error& e) {
        log << "error [" << e.category() << "] " << e.what() << "\n";
        throw;
    }
    for (const auto& a : res.audits) log << format_audit(a);
    write_file(out / "currents.csv", format_currents(res.currents, &res.traces, &res.purities));
    if (!res.currents.empty())
        log << "final cumulative_J=" << g17(res.currents.cumulative.back()) << "\n";
    if (cfg.phase_space) {
        const auto grid = husimi(res.state, cfg.grid);
        write_file(out / "phase_space.grid", format_grid(grid));
        log << "phase_space normalization=" << grid.normalization
            << " momentum_asymmetry=" << g17(grid.momentum_asymmetry()) << "\n";
    }
}

inline void run_spectrum(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto basis = cfg.basis();
    PeriodMap map(cfg.params, basis, evolution_config(cfg).scheme);
    KrylovOptions opt;
    opt.count = cfg.spectrum_count;
    opt.tol = cfg.spectrum_tol;
    opt.max_iters = cfg.spectrum_max_iters;
    opt.seed = cfg.seed;
    const auto res = leading_spectrum(map, opt);
    write_file(out / "spectrum.csv", format_spectrum(res));
    const auto a = audit(res.invariant_state);
    log << "spectrum N=" << basis.dim() << " iterations=" << res.iterations
        << " converged=" << (res.converged ? "true" : "false") << " gap=" << g17(res.gap)
        << " invariant_residual=" << g17(res.invariant_residual) << "\n";
    log << "invariant_state trace=" << g17(a.trace) << " min_eigenvalue=" << g17(a.min_eigenvalue)
        << " purity=" << g17(a.purity)
        << " mean_momentum=" << g17(expect_momentum(res.invariant_state)) << "\n";
    if (cfg.phase_space)
        write_file(out / "phase_space.grid", format_grid(husimi(res.invariant_state, cfg.grid)));
}

inline void run_single(const RunConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    write_file(out / "resolved.cfg", format_config(cfg));
    std::ostringstream log;
    std::exception_ptr failure;
    try {
        switch (cfg.mode) {
            case RunMode::classical: run_classical(cfg, out, log); break;
            case RunMode::quantum: run_quantum(cfg, out, log); break;
            case RunMode::spectrum: run_spectrum(cfg, out, log); break;
            case RunMode::sweep: throw ConfigError("nested sweep");
        }
    } catch (...) {
        failure = std::current_exception();
    }
    write_file(out / "audit.log", log.str());
    if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Name of the output subdirectory of one sweep point, e.g. "T=0.001".
inline std::string sweep_point_name(const std::string& param, double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return param + "=" + std::string(buf, res.ptr);
}

/// Executes a resolved configuration, writing every output under `out`.
/// Sweep points run as independent jobs, at most cfg.workers at a time.
inline void run(const RunConfig& cfg, const fs::path& out) {
    if (cfg.mode != RunMode::sweep) return detail::run_single(cfg, out);
    fs::create_directories(out);
    write_file(out / "resolved.cfg", format_config(cfg));
    std::vector<RunConfig> jobs;
    for (double v : cfg.sweep_values) {
        RunConfig job = cfg;
        job.mode = cfg.sweep_mode;
        set_parameter(job, cfg.sweep_param, v);
        job.workers = 1;
        jobs.push_back(std::move(job));
    }
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                detail::run_single(jobs[i], out / sweep_point_name(cfg.sweep_param, cfg.sweep_values[i]));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t nthreads = std::min<std::size_t>(cfg.workers, jobs.size());
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    std::ostringstream log;
    for (std::size_t i = 0; i < jobs.size(); ++i)
        log << sweep_point_name(cfg.sweep_param, cfg.sweep_values[i]) << " "
            << (errors[i] ? "failed" : "ok") << "\n";
    write_file(out / "audit.log", log.str());
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ratchet
