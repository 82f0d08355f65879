#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ratchet/error.hpp"
#include "ratchet/model.hpp"

namespace ratchet {

/// Grid specification over x in [0, 2pi) and a momentum window.
struct GridSpec {
    std::size_t nx = 128;
    std::size_t np = 128;
    double pmin = -4.0;
    double pmax = 4.0;

    void check() const {
        if (nx < 2 || np < 2) throw ConfigError("phase-space grid needs at least 2 bins per axis");
        if (!std::isfinite(pmin) || !std::isfinite(pmax) || !(pmax > pmin))
            throw ConfigError("phase-space momentum window must be finite with pmax > pmin");
    }

    double dx() const { return two_pi / static_cast<double>(nx); }
    double dp() const { return (pmax - pmin) / static_cast<double>(np); }
    double x_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx(); }
    double p_center(std::size_t j) const { return pmin + (static_cast<double>(j) + 0.5) * dp(); }
};

/// Nonnegative values on an nx-by-np grid, row-major in x.
struct PhaseSpaceGrid {
    GridSpec spec;
    std::vector<double> values;
    /// How `values` are normalised, e.g. "fraction_of_points" or "unit_sum".
    std::string normalization;

    double& at(std::size_t ix, std::size_t ip) { return values[ix * spec.np + ip]; }
    double at(std::size_t ix, std::size_t ip) const { return values[ix * spec.np + ip]; }

    double total() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }

    /// Mass at p > 0 minus mass at p < 0.
    double momentum_asymmetry() const {
        double s = 0.0;
        for (std::size_t ix = 0; ix < spec.nx; ++ix)
            for (std::size_t ip = 0; ip < spec.np; ++ip) {
                const double pc = spec.p_center(ip);
                if (pc > 0) s += at(ix, ip);
                else if (pc < 0) s -= at(ix, ip);
            }
        return s;
    }
};

}  // namespace ratchet
