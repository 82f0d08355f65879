#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ratchet/current_series.hpp"
#include "ratchet/error.hpp"
#include "ratchet/model.hpp"
#include "ratchet/phase_space.hpp"

namespace ratchet::classical {

struct PhasePoint {
    double x = 0.0;  // unwrapped
    double p = 0.0;
};

/// Trajectory set with the seed that drives its noise substreams.
///
/// `epoch` counts completed `evolve_ensemble` calls so that a continued run
/// draws fresh noise instead of replaying the previous substreams.
struct Ensemble {
    std::vector<PhasePoint> points;
    std::uint64_t rng_seed = 0;
    std::uint64_t epoch = 0;
    double time = 0.0;  // radians of drive phase elapsed

    std::size_t trajectory_count() const { return points.size(); }
};

/// Which relation sets the per-step kick variance.
///   one_minus_gamma: 2 (1 - Gamma) k_B T dt   (default)
///   gamma:           2 Gamma k_B T dt         (textbook fluctuation-dissipation)
enum class NoiseConvention { one_minus_gamma, gamma };

inline NoiseConvention parse_noise_convention(const std::string& s) {
    if (s == "one_minus_gamma") return NoiseConvention::one_minus_gamma;
    if (s == "gamma") return NoiseConvention::gamma;
    throw ConfigError("unknown noise_convention '" + s + "' (expected one_minus_gamma or gamma)");
}

inline const char* to_string(NoiseConvention c) {
    return c == NoiseConvention::one_minus_gamma ? "one_minus_gamma" : "gamma";
}

struct IntegratorConfig {
    std::size_t steps_per_period = 1000;
    std::size_t periods = 50;
    std::size_t record_every = 0;  // 0 means once per period
    NoiseConvention noise = NoiseConvention::one_minus_gamma;
    std::size_t workers = 1;

    double dt() const { return two_pi / static_cast<double>(steps_per_period); }
    std::size_t record_interval() const { return record_every == 0 ? steps_per_period : record_every; }

    void check() const {
        if (steps_per_period == 0) throw ConfigError("steps_per_period must be positive");
        if (periods == 0) throw ConfigError("periods must be positive");
        if (workers == 0) throw ConfigError("workers must be positive");
    }
};

/// Standard deviation of the momentum kick applied in one step of length dt.
inline double kick_amplitude(const SystemParams& p, double dt, NoiseConvention c) {
    const double T = p.temperature();
    const double factor = c == NoiseConvention::one_minus_gamma ? 1.0 - p.Gamma : p.Gamma;
    return std::sqrt(2.0 * factor * p.k_B * T * dt);
}

/// Semi-implicit Euler step: momentum first (damping, force, kick), then
/// position with the updated momentum.
inline PhasePoint step(PhasePoint s, double t, const SystemParams& p, double dt, double noise_draw,
                       NoiseConvention c = NoiseConvention::one_minus_gamma) {
    const double kick = kick_amplitude(p, dt, c);
    s.p += dt * (-p.Gamma * s.p - potential_gradient(s.x, t, p)) + kick * noise_draw;
    s.x += dt * s.p / p.m;
    return s;
}

/// Uniform x in [0, 2pi) with p = 0.
inline Ensemble init_chaotic_line(std::size_t count, std::uint64_t seed) {
    if (count == 0) throw ConfigError("ensemble needs at least one trajectory");
    Ensemble e;
    e.rng_seed = seed;
    e.points.resize(count);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, two_pi);
    for (auto& pt : e.points) pt = {ux(rng), 0.0};
    return e;
}

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the noise substream of one trajectory. Depends only on the master
/// seed, the epoch and the trajectory index.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t index) {
    return splitmix64(splitmix64(seed ^ splitmix64(epoch)) + index);
}

struct EvolveResult {
    Ensemble ensemble;
    CurrentSeries currents;
    /// Per-trajectory mean of the recorded momentum samples; their ensemble
    /// mean equals the final cumulative current.
    std::vector<double> trajectory_currents;

    /// Standard error of the final cumulative current over trajectories.
    double current_standard_error() const {
        const auto n = static_cast<double>(trajectory_currents.size());
        if (n < 2) return 0.0;
        double mean = 0.0;
        for (double v : trajectory_currents) mean += v;
        mean /= n;
        double ss = 0.0;
        for (double v : trajectory_currents) ss += (v - mean) * (v - mean);
        return std::sqrt(ss / (n - 1.0) / n);
    }
};

namespace detail {

inline constexpr std::size_t chunk_size = 256;

struct ChunkSums {
    std::vector<double> p_sum;
};

}  // namespace detail

/// Integrates every trajectory for cfg.periods drive periods.
///
/// Work is split into fixed chunks of trajectories; partial sums are reduced
/// in chunk order, so results do not depend on cfg.workers.
inline EvolveResult evolve_ensemble(Ensemble ensemble, const SystemParams& params,
                                    const IntegratorConfig& cfg) {
    cfg.check();
    validate(params);
    const double dt = cfg.dt();
    const std::size_t spp = cfg.steps_per_period;
    const std::size_t total = spp * cfg.periods;
    const std::size_t every = cfg.record_interval();
    const std::size_t records = total / every;
    const double kick = kick_amplitude(params, dt, cfg.noise);
    const double t0 = ensemble.time;

    std::vector<double> drive_table(spp);
    for (std::size_t n = 0; n < spp; ++n)
        drive_table[n] = drive(t0 + static_cast<double>(n) * dt, params);

    const ForceTerms force(params);
    const std::size_t count = ensemble.points.size();
    const std::size_t chunks = (count + detail::chunk_size - 1) / detail::chunk_size;
    std::vector<detail::ChunkSums> sums(chunks);
    std::vector<double> traj_mean(count, 0.0);

    auto run_chunk = [&](std::size_t c) {
        auto& acc = sums[c].p_sum;
        acc.assign(records, 0.0);
        const std::size_t lo = c * detail::chunk_size;
        const std::size_t hi = std::min(count, lo + detail::chunk_size);
        for (std::size_t i = lo; i < hi; ++i) {
            std::mt19937_64 rng(substream_seed(ensemble.rng_seed, ensemble.epoch, i));
            std::normal_distribution<double> normal(0.0, 1.0);
            PhasePoint s = ensemble.points[i];
            double own = 0.0;
            std::size_t r = 0;
            std::size_t until_record = every;
            std::size_t n = 0;
            for (std::size_t period = 0; period < cfg.periods; ++period) {
                for (std::size_t j = 0; j < spp; ++j, ++n) {
                    const double xi = kick > 0.0 ? normal(rng) : 0.0;
                    s.p += dt * (-params.Gamma * s.p - force(s.x, drive_table[j])) + kick * xi;
                    s.x += dt * s.p / params.m;
                    if (!std::isfinite(s.p) || !std::isfinite(s.x)) [[unlikely]]
                        throw IntegrationError("trajectory " + std::to_string(i) +
                                                   " became non-finite at step " +
                                                   std::to_string(n + 1),
                                               i, n + 1);
                    if (--until_record == 0) {
                        until_record = every;
                        acc[r++] += s.p;
                        own += s.p;
                    }
                }
            }
            ensemble.points[i] = s;
            traj_mean[i] = records > 0 ? own / static_cast<double>(records) : 0.0;
        }
    };

    const std::size_t workers = std::min(cfg.workers, std::max<std::size_t>(chunks, 1));
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    EvolveResult out;
    const double elapsed_periods = t0 / two_pi;
    for (std::size_t r = 0; r < records; ++r) {
        double s = 0.0;
        for (const auto& ch : sums) s += ch.p_sum[r];
        const double time = elapsed_periods +
                            static_cast<double>((r + 1) * every) / static_cast<double>(spp);
        out.currents.push(time, s / static_cast<double>(count));
    }
    ensemble.time = t0 + static_cast<double>(total) * dt;
    ensemble.epoch += 1;
    out.ensemble = std::move(ensemble);
    out.trajectory_currents = std::move(traj_mean);
    return out;
}

/// Occupancy of x mod 2pi and p over the grid; each point contributes
/// 1/count, so the total equals the fraction of points inside the window.
inline PhaseSpaceGrid histogram(const Ensemble& ensemble, const GridSpec& spec) {
    spec.check();
    PhaseSpaceGrid grid{spec, std::vector<double>(spec.nx * spec.np, 0.0), "fraction_of_points"};
    const double w = 1.0 / static_cast<double>(ensemble.points.size());
    for (const auto& pt : ensemble.points) {
        if (!(pt.p >= spec.pmin && pt.p < spec.pmax)) continue;
        double x = std::fmod(pt.x, two_pi);
        if (x < 0) x += two_pi;
        auto ix = static_cast<std::size_t>(x / spec.dx());
        auto ip = static_cast<std::size_t>((pt.p - spec.pmin) / spec.dp());
        ix = std::min(ix, spec.nx - 1);
        ip = std::min(ip, spec.np - 1);
        grid.at(ix, ip) += w;
    }
    return grid;
}

}  // namespace ratchet::classical
