#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ratchet/classical.hpp"
#include "ratchet/error.hpp"
#include "ratchet/model.hpp"
#include "ratchet/phase_space.hpp"
#include "ratchet/propagator.hpp"

namespace ratchet {

enum class RunMode { classical, quantum, spectrum, sweep };

inline RunMode parse_mode(std::string_view s) {
    if (s == "classical") return RunMode::classical;
    if (s == "quantum") return RunMode::quantum;
    if (s == "spectrum") return RunMode::spectrum;
    if (s == "sweep") return RunMode::sweep;
    throw ConfigError("unknown mode '" + std::string(s) +
                      "' (expected classical, quantum, spectrum or sweep)");
}

inline const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::classical: return "classical";
        case RunMode::quantum: return "quantum";
        case RunMode::spectrum: return "spectrum";
        case RunMode::sweep: return "sweep";
    }
    return "?";
}

/// Fully resolved description of one batch run.
struct RunConfig {
    RunMode mode = RunMode::quantum;
    std::optional<std::string> preset;
    SystemParams params;
    bool epsilon_explicit = false;  // otherwise epsilon follows Gamma

    std::size_t periods = 50;
    std::size_t steps_per_period = 1000;
    std::size_t record_every = 0;
    std::size_t trajectories = 10000;
    double initial_p = 0.0;  // classical initial momentum
    int initial_k = 0;       // quantum initial momentum level
    int M = 0;               // 0: derived from p_coverage
    double p_coverage = 4.0;
    std::uint64_t seed = 1;
    std::size_t workers = 1;

    classical::NoiseConvention noise = classical::NoiseConvention::one_minus_gamma;
    std::size_t audit_every = 10;
    bool positivity_audit = true;
    Splitting splitting = Splitting::kinetic_first;
    KrausForm kraus_form = KrausForm::exact;

    bool phase_space = false;
    GridSpec grid;

    std::size_t spectrum_count = 6;
    double spectrum_tol = 1e-8;
    std::size_t spectrum_max_iters = 150;

    std::string sweep_param;
    std::vector<double> sweep_values;
    RunMode sweep_mode = RunMode::quantum;

    MomentumBasis basis() const {
        if (M > 0) return {M, params.hbar};
        return MomentumBasis::for_coverage(params.hbar, p_coverage);
    }
};

/// Names accepted by `sweep_param`.
inline const std::vector<std::string>& sweepable_parameters() {
    static const std::vector<std::string> names{"F", "A", "phi_a", "B", "phi_b", "Gamma",
                                                "T", "hbar", "epsilon"};
    return names;
}

inline double& parameter_slot(SystemParams& p, std::string_view name) {
    if (name == "F") return p.F;
    if (name == "A") return p.A;
    if (name == "phi_a") return p.phi_a;
    if (name == "B") return p.B;
    if (name == "phi_b") return p.phi_b;
    if (name == "Gamma") return p.Gamma;
    if (name == "hbar") return p.hbar;
    if (name == "epsilon") return p.epsilon;
    if (name == "m") return p.m;
    if (name == "k_B") return p.k_B;
    throw ConfigError("'" + std::string(name) + "' is not a system parameter");
}

/// Sets one physical parameter, keeping epsilon tied to Gamma unless it was
/// given explicitly.
inline void set_parameter(RunConfig& cfg, std::string_view name, double value) {
    if (name == "T") {
        cfg.params.T = value;
    } else {
        parameter_slot(cfg.params, name) = value;
        if (name == "epsilon") cfg.epsilon_explicit = true;
    }
    if (!cfg.epsilon_explicit) cfg.params.epsilon = cfg.params.Gamma;
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RawEntry {
    std::string value;
    std::string origin;  // "file:line" or "--set"
};

inline double parse_double(const RawEntry& e, const std::string& key) {
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [ptr, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || ptr != end || e.value.empty())
        throw ConfigError("key '" + key + "' (" + e.origin + "): cannot parse '" + e.value +
                          "' as a number");
    return v;
}

template <class Int>
Int parse_integer(const RawEntry& e, const std::string& key) {
    Int v{};
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [ptr, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || ptr != end || e.value.empty())
        throw ConfigError("key '" + key + "' (" + e.origin + "): cannot parse '" + e.value +
                          "' as an integer");
    return v;
}

inline bool parse_bool(const RawEntry& e, const std::string& key) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ConfigError("key '" + key + "' (" + e.origin + "): expected true or false, got '" +
                      e.value + "'");
}

inline void parse_line(std::map<std::string, RawEntry>& into, std::string_view line,
                       const std::string& origin) {
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) return;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
        throw ConfigError(origin + ": expected key=value, got '" + body + "'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ": empty key");
    into[key] = {value, origin};
}

/// Wraps a parse/validation failure with the origin of the offending key.
template <class F>
void with_origin(const std::string& key, const RawEntry& e, F&& f) {
    try {
        f();
    } catch (const ConfigError& err) {
        const std::string msg = err.what();
        if (msg.find("key '" + key + "'") != std::string::npos) throw;
        throw ConfigError("key '" + key + "' (" + e.origin + "): " + msg);
    }
}

}  // namespace detail

/// Reads `key=value` lines (with `#` comments) from `text`; `source` names
/// the input in error messages.
inline std::map<std::string, detail::RawEntry> parse_config_text(std::string_view text,
                                                                 const std::string& source) {
    std::map<std::string, detail::RawEntry> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        ++line_no;
        detail::parse_line(out, line, source + ":" + std::to_string(line_no));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

/// Merges a config file (optional) with `--set key=value` overrides (last
/// wins) and resolves everything into a validated RunConfig.
inline RunConfig resolve_config(std::map<std::string, detail::RawEntry> raw,
                                const std::vector<std::string>& overrides,
                                std::optional<RunMode> mode = std::nullopt) {
    for (const auto& o : overrides) detail::parse_line(raw, o, "--set " + o);

    RunConfig cfg;
    if (mode) cfg.mode = *mode;
    using detail::RawEntry;
    using Handler = std::function<void(RunConfig&, const RawEntry&, const std::string&)>;
    auto num = [](double RunConfig::*field) {
        return Handler([field](RunConfig& c, const RawEntry& e, const std::string& k) {
            c.*field = detail::parse_double(e, k);
        });
    };
    auto count = [](std::size_t RunConfig::*field) {
        return Handler([field](RunConfig& c, const RawEntry& e, const std::string& k) {
            c.*field = detail::parse_integer<std::size_t>(e, k);
        });
    };
    auto physical = Handler([](RunConfig& c, const RawEntry& e, const std::string& k) {
        set_parameter(c, k, detail::parse_double(e, k));
    });

    // Applied in this order; "preset" first so explicit parameters override it.
    const std::vector<std::pair<std::string, Handler>> handlers{
        {"mode", [&](RunConfig& c, const RawEntry& e, const std::string&) {
             const RunMode m = parse_mode(e.value);
             if (!mode) c.mode = m;
         }},
        {"preset", [](RunConfig& c, const RawEntry& e, const std::string&) {
             c.params = preset(e.value);
             c.preset = e.value;
         }},
        {"F", physical}, {"A", physical}, {"phi_a", physical}, {"B", physical},
        {"phi_b", physical}, {"Gamma", physical}, {"hbar", physical}, {"m", physical},
        {"k_B", physical}, {"epsilon", physical}, {"T", physical},
        {"free_particle", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.params.free_particle = detail::parse_bool(e, k);
         }},
        {"periods", count(&RunConfig::periods)},
        {"steps_per_period", count(&RunConfig::steps_per_period)},
        {"record_every", count(&RunConfig::record_every)},
        {"trajectories", count(&RunConfig::trajectories)},
        {"initial_p", num(&RunConfig::initial_p)},
        {"initial_k", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.initial_k = detail::parse_integer<int>(e, k);
         }},
        {"M", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.M = detail::parse_integer<int>(e, k);
         }},
        {"p_coverage", num(&RunConfig::p_coverage)},
        {"seed", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.seed = detail::parse_integer<std::uint64_t>(e, k);
         }},
        {"workers", count(&RunConfig::workers)},
        {"noise_convention", [](RunConfig& c, const RawEntry& e, const std::string&) {
             c.noise = classical::parse_noise_convention(e.value);
         }},
        {"audit_every", count(&RunConfig::audit_every)},
        {"positivity_audit", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.positivity_audit = detail::parse_bool(e, k);
         }},
        {"splitting", [](RunConfig& c, const RawEntry& e, const std::string&) {
             c.splitting = parse_splitting(e.value);
         }},
        {"kraus_form", [](RunConfig& c, const RawEntry& e, const std::string&) {
             c.kraus_form = parse_kraus_form(e.value);
         }},
        {"phase_space", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.phase_space = detail::parse_bool(e, k);
         }},
        {"grid_nx", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.grid.nx = detail::parse_integer<std::size_t>(e, k);
         }},
        {"grid_np", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.grid.np = detail::parse_integer<std::size_t>(e, k);
         }},
        {"grid_pmin", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.grid.pmin = detail::parse_double(e, k);
         }},
        {"grid_pmax", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.grid.pmax = detail::parse_double(e, k);
         }},
        {"spectrum_count", count(&RunConfig::spectrum_count)},
        {"spectrum_tol", num(&RunConfig::spectrum_tol)},
        {"spectrum_max_iters", count(&RunConfig::spectrum_max_iters)},
        {"sweep_param", [](RunConfig& c, const RawEntry& e, const std::string&) {
             const auto& names = sweepable_parameters();
             if (std::find(names.begin(), names.end(), e.value) == names.end())
                 throw ConfigError("sweep_param '" + e.value + "' is not a system parameter");
             c.sweep_param = e.value;
         }},
        {"sweep_values", [](RunConfig& c, const RawEntry& e, const std::string& k) {
             c.sweep_values.clear();
             std::stringstream ss(e.value);
             std::string item;
             while (std::getline(ss, item, ','))
                 c.sweep_values.push_back(detail::parse_double({detail::trim(item), e.origin}, k));
         }},
        {"sweep_mode", [](RunConfig& c, const RawEntry& e, const std::string&) {
             c.sweep_mode = parse_mode(e.value);
             if (c.sweep_mode == RunMode::sweep) throw ConfigError("sweep_mode cannot be sweep");
         }},
    };

    for (const auto& [key, entry] : raw) {
        const bool known = std::any_of(handlers.begin(), handlers.end(),
                                       [&](const auto& h) { return h.first == key; });
        if (!known) throw ConfigError("unknown key '" + key + "' (" + entry.origin + ")");
    }
    for (const auto& [key, handler] : handlers) {
        const auto it = raw.find(key);
        if (it == raw.end()) continue;
        detail::with_origin(key, it->second, [&] { handler(cfg, it->second, key); });
    }

    // Histograms need more trajectories than currents do.
    if (cfg.phase_space && !raw.contains("trajectories")) cfg.trajectories = 100000;

    if (!cfg.params.T) throw ConfigError("missing required key 'T'");
    auto checked = [&](const std::string& key, auto&& f) {
        const auto it = raw.find(key);
        if (it == raw.end()) return f();
        detail::with_origin(key, it->second, f);
    };
    try {
        validate(cfg.params);
    } catch (const ConfigError& err) {
        const std::string msg = err.what();
        const std::string key = msg.substr(0, msg.find(' '));
        const auto it = raw.find(key);
        if (it == raw.end()) throw;
        throw ConfigError("key '" + key + "' (" + it->second.origin + "): " + msg);
    }
    checked("steps_per_period", [&] {
        if (cfg.steps_per_period == 0) throw ConfigError("steps_per_period must be positive");
    });
    checked("periods", [&] {
        if (cfg.periods == 0) throw ConfigError("periods must be positive");
    });
    checked("trajectories", [&] {
        if (cfg.trajectories == 0) throw ConfigError("trajectories must be positive");
    });
    checked("workers", [&] {
        if (cfg.workers == 0) throw ConfigError("workers must be positive");
    });
    checked("M", [&] {
        if (cfg.M < 0) throw ConfigError("M must be >= 0 (0 derives it from p_coverage)");
    });
    checked("initial_k", [&] {
        if (std::abs(cfg.initial_k) > cfg.basis().M)
            throw ConfigError("initial_k lies outside the momentum basis");
    });
    checked("grid_nx", [&] { cfg.grid.check(); });
    if (cfg.mode == RunMode::sweep) {
        if (cfg.sweep_param.empty()) throw ConfigError("missing required key 'sweep_param'");
        if (cfg.sweep_values.empty()) throw ConfigError("missing required key 'sweep_values'");
        for (double v : cfg.sweep_values) {
            RunConfig probe = cfg;
            set_parameter(probe, probe.sweep_param, v);
            detail::with_origin("sweep_values", raw.at("sweep_values"), [&] { validate(probe.params); });
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::optional<std::string>& path,
                             const std::vector<std::string>& overrides,
                             std::optional<RunMode> mode = std::nullopt) {
    std::map<std::string, detail::RawEntry> raw;
    if (path) {
        std::ifstream in(*path);
        if (!in) throw ConfigError("cannot read config file '" + *path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        raw = parse_config_text(buf.str(), *path);
    }
    return resolve_config(std::move(raw), overrides, mode);
}

/// Serialises `cfg` so that loading the text reproduces it exactly.
inline std::string format_config(const RunConfig& cfg) {
    using detail::format_double;
    std::ostringstream os;
    const auto& p = cfg.params;
    os << "# resolved configuration\n";
    os << "mode=" << to_string(cfg.mode) << "\n";
    if (cfg.preset) os << "preset=" << *cfg.preset << "\n";
    os << "m=" << format_double(p.m) << "\n";
    os << "k_B=" << format_double(p.k_B) << "\n";
    os << "hbar=" << format_double(p.hbar) << "\n";
    os << "F=" << format_double(p.F) << "\n";
    os << "A=" << format_double(p.A) << "\n";
    os << "phi_a=" << format_double(p.phi_a) << "\n";
    os << "B=" << format_double(p.B) << "\n";
    os << "phi_b=" << format_double(p.phi_b) << "\n";
    os << "Gamma=" << format_double(p.Gamma) << "\n";
    if (p.T) os << "T=" << format_double(*p.T) << "\n";
    if (cfg.epsilon_explicit) os << "epsilon=" << format_double(p.epsilon) << "\n";
    else os << "# epsilon follows Gamma: " << format_double(p.epsilon) << "\n";
    os << "free_particle=" << (p.free_particle ? "true" : "false") << "\n";
    os << "periods=" << cfg.periods << "\n";
    os << "steps_per_period=" << cfg.steps_per_period << "\n";
    os << "record_every=" << cfg.record_every << "\n";
    os << "trajectories=" << cfg.trajectories << "\n";
    os << "initial_p=" << format_double(cfg.initial_p) << "\n";
    os << "initial_k=" << cfg.initial_k << "\n";
    os << "M=" << cfg.M << "\n";
    os << "p_coverage=" << format_double(cfg.p_coverage) << "\n";
    os << "seed=" << cfg.seed << "\n";
    os << "workers=" << cfg.workers << "\n";
    os << "noise_convention=" << classical::to_string(cfg.noise) << "\n";
    os << "audit_every=" << cfg.audit_every << "\n";
    os << "positivity_audit=" << (cfg.positivity_audit ? "true" : "false") << "\n";
    os << "splitting=" << to_string(cfg.splitting) << "\n";
    os << "kraus_form=" << to_string(cfg.kraus_form) << "\n";
    os << "phase_space=" << (cfg.phase_space ? "true" : "false") << "\n";
    os << "grid_nx=" << cfg.grid.nx << "\n";
    os << "grid_np=" << cfg.grid.np << "\n";
    os << "grid_pmin=" << format_double(cfg.grid.pmin) << "\n";
    os << "grid_pmax=" << format_double(cfg.grid.pmax) << "\n";
    os << "spectrum_count=" << cfg.spectrum_count << "\n";
    os << "spectrum_tol=" << format_double(cfg.spectrum_tol) << "\n";
    os << "spectrum_max_iters=" << cfg.spectrum_max_iters << "\n";
    if (cfg.mode == RunMode::sweep) {
        os << "sweep_param=" << cfg.sweep_param << "\n";
        os << "sweep_values=";
        for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i)
            os << (i ? "," : "") << format_double(cfg.sweep_values[i]);
        os << "\n";
        os << "sweep_mode=" << to_string(cfg.sweep_mode) << "\n";
    }
    return os.str();
}

}  // namespace ratchet
