#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "ratchet/error.hpp"

namespace ratchet {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Physical constants, drive and bath parameters of the biharmonic ratchet
///
///   V(x,t) = 1 - cos x - A cos(2x + phi_a) + F sin x [cos t + B cos(2t + phi_b)]
///
/// integrated classically with damping Gamma and quantum mechanically with a
/// momentum-ladder bath of coupling epsilon at temperature T.
struct SystemParams {
    double m = 1.0;
    double k_B = 1.0;
    double hbar = 0.041;
    double F = 0.0;
    double A = 0.5;
    double phi_a = 0.0;
    double B = 0.0;
    double phi_b = std::numbers::pi / 2.0;
    double Gamma = 0.0;
    std::optional<double> T;  // swept; never implied by a preset
    double epsilon = 0.0;
    bool free_particle = false;  // zero the whole potential (diagnostics)

    /// Temperature, or ConfigError when it was never supplied.
    double temperature() const {
        if (!T) throw ConfigError("temperature T is required but was not set");
        return *T;
    }
};

enum class PresetName { weak_002, weak_005, strong };

struct Preset {
    PresetName name;
    SystemParams params;
};

inline std::string_view to_string(PresetName name) {
    switch (name) {
        case PresetName::weak_002: return "weak_002";
        case PresetName::weak_005: return "weak_005";
        case PresetName::strong: return "strong";
    }
    return "?";
}

inline PresetName parse_preset_name(std::string_view name) {
    if (name == "weak_002") return PresetName::weak_002;
    if (name == "weak_005") return PresetName::weak_005;
    if (name == "strong") return PresetName::strong;
    throw ConfigError("unknown preset '" + std::string(name) +
                      "' (expected weak_002, weak_005 or strong)");
}

/// Named parameter sets. epsilon is tied to Gamma; T is left unset.
inline SystemParams preset(PresetName name) {
    SystemParams p;
    p.A = 0.5;
    p.phi_b = std::numbers::pi / 2.0;
    p.hbar = 0.041;
    switch (name) {
        case PresetName::weak_002:
        case PresetName::weak_005:
            p.F = name == PresetName::weak_002 ? 0.02 : 0.05;
            p.B = 0.2;
            p.phi_a = 0.0;
            p.Gamma = 1e-4;
            break;
        case PresetName::strong:
            p.F = 2.5;
            p.B = 0.0;
            p.phi_a = std::numbers::pi / 2.0;
            p.Gamma = 0.05;
            break;
    }
    p.epsilon = p.Gamma;
    return p;
}

inline SystemParams preset(std::string_view name) { return preset(parse_preset_name(name)); }

/// Throws ConfigError naming the first violated constraint.
inline void validate(const SystemParams& p) {
    auto finite = [](double v) { return std::isfinite(v); };
    for (auto [v, key] : {std::pair{p.m, "m"}, {p.k_B, "k_B"}, {p.hbar, "hbar"}, {p.F, "F"},
                          {p.A, "A"}, {p.phi_a, "phi_a"}, {p.B, "B"}, {p.phi_b, "phi_b"},
                          {p.Gamma, "Gamma"}, {p.epsilon, "epsilon"}}) {
        if (!finite(v)) throw ConfigError(std::string(key) + " is not finite");
    }
    if (p.Gamma < 0.0 || p.Gamma > 1.0)
        throw ConfigError("Gamma " + std::to_string(p.Gamma) + " violates 0 <= Gamma <= 1");
    if (p.T && (!finite(*p.T) || *p.T < 0.0))
        throw ConfigError("T must be finite and >= 0");
    if (p.F < 0.0) throw ConfigError("F must be >= 0");
    if (!(p.hbar > 0.0)) throw ConfigError("hbar must be > 0");
    if (p.epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
    if (!(p.m > 0.0)) throw ConfigError("m must be > 0");
    if (!(p.k_B > 0.0)) throw ConfigError("k_B must be > 0");
}

/// Temporal factor cos t + B cos(2t + phi_b) multiplying the drive.
inline double drive(double t, const SystemParams& p) {
    return std::cos(t) + p.B * std::cos(2.0 * t + p.phi_b);
}

/// Time-independent part 1 - cos x - A cos(2x + phi_a).
inline double static_potential(double x, const SystemParams& p) {
    if (p.free_particle) return 0.0;
    return 1.0 - std::cos(x) - p.A * std::cos(2.0 * x + p.phi_a);
}

inline double potential(double x, double t, const SystemParams& p) {
    if (p.free_particle) return 0.0;
    return static_potential(x, p) + p.F * std::sin(x) * drive(t, p);
}

/// dV/dx with the phase constants folded in, for inner loops that already
/// know the temporal drive factor.
struct ForceTerms {
    explicit ForceTerms(const SystemParams& p)
        : a_cos(2.0 * p.A * std::cos(p.phi_a)),
          a_sin(2.0 * p.A * std::sin(p.phi_a)),
          F(p.F),
          off(p.free_particle) {}

    double operator()(double x, double drive_value) const {
        if (off) return 0.0;
        const double s = std::sin(x);
        const double c = std::cos(x);
        return s + 2.0 * s * c * a_cos + (c * c - s * s) * a_sin + F * c * drive_value;
    }

    double a_cos;
    double a_sin;
    double F;
    bool off;
};

/// dV/dx, the analytic derivative of `potential`.
inline double potential_gradient(double x, double t, const SystemParams& p) {
    return ForceTerms(p)(x, drive(t, p));
}

}  // namespace ratchet
