#pragma once

#include <cstddef>
#include <vector>

namespace ratchet {

/// Ensemble-mean momentum sampled on a uniform schedule, plus its running
/// time average (the ratchet current J(t)). Times are in drive periods.
struct CurrentSeries {
    std::vector<double> times;
    std::vector<double> instantaneous;
    std::vector<double> cumulative;

    void push(double time_periods, double mean_p) {
        const double n = static_cast<double>(instantaneous.size());
        const double prev = cumulative.empty() ? 0.0 : cumulative.back();
        times.push_back(time_periods);
        instantaneous.push_back(mean_p);
        cumulative.push_back(prev + (mean_p - prev) / (n + 1.0));
    }

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }

    /// Cumulative current at the last sample with time <= t (0 if none).
    double cumulative_at(double time_periods) const {
        double value = 0.0;
        for (std::size_t i = 0; i < times.size() && times[i] <= time_periods + 1e-9; ++i)
            value = cumulative[i];
        return value;
    }
};

}  // namespace ratchet
