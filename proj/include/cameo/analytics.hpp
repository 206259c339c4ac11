#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cameo/detector.hpp"
#include "cameo/event.hpp"

namespace cameo {

// Cumulative Filter-2 sensitivity curve. cumulative[i] counts pairs
// whose p90 lies strictly below grid[i]; histogram[i] is the increment
// from the previous grid point.
struct SweepResult {
    std::vector<double> grid;
    std::vector<std::size_t> cumulative;
    std::vector<std::size_t> histogram;
};

inline std::vector<double> default_sweep_grid(double max_seconds = 3600.0,
                                              double step_seconds = 30.0) {
    std::vector<double> grid;
    for (double g = 0.0; g <= max_seconds + 1e-9; g += step_seconds) grid.push_back(g);
    return grid;
}

// Pairs that already pass Filters 1, 3, 4, 5, so the curve isolates
// Filter 2.
inline std::vector<Detection> sweep_eligible(const std::vector<Detection>& classified) {
    std::vector<Detection> out;
    for (const Detection& det : classified)
        if (det.f1 && det.f3 && det.f4 && det.f5) out.push_back(det);
    return out;
}

inline SweepResult cutoff_sweep(const std::vector<Detection>& eligible,
                                const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("cutoff_sweep: empty grid");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("cutoff_sweep: grid must be ascending");
    std::vector<double> p90s;
    p90s.reserve(eligible.size());
    for (const Detection& det : eligible)
        if (det.n > 0) p90s.push_back(det.p90_seconds);
    std::sort(p90s.begin(), p90s.end());

    SweepResult result;
    result.grid = grid;
    result.cumulative.reserve(grid.size());
    result.histogram.reserve(grid.size());
    std::size_t previous = 0;
    for (double g : grid) {
        const auto below =
            static_cast<std::size_t>(std::lower_bound(p90s.begin(), p90s.end(), g) -
                                     p90s.begin());
        result.cumulative.push_back(below);
        result.histogram.push_back(below - previous);
        previous = below;
    }
    return result;
}

// One row of the multi-certificate breakdown.
struct MultiCertRow {
    std::size_t min_certificates = 0;
    std::size_t earners = 0;
    std::size_t earners_with_cameo = 0;
    double fraction = 0.0;
};

inline std::vector<std::size_t> default_cert_thresholds() {
    return {1, 5, 10, 15, 20, 25, 30, 40};
}

// An earner counts as CAMEO when at least one (master, course) pair of
// theirs is flagged.
inline std::vector<MultiCertRow> multi_cert_table(const std::vector<Detection>& detections,
                                                  const CertificationRoster& roster,
                                                  const std::vector<std::size_t>& thresholds) {
    std::set<std::string> cameo_masters;
    for (const Detection& det : detections)
        if (det.is_cameo()) cameo_masters.insert(det.master);

    std::map<std::string, std::size_t> cert_counts;
    for (const auto& [key, certified] : roster.entries())
        if (certified) ++cert_counts[key.first];

    std::vector<MultiCertRow> rows;
    rows.reserve(thresholds.size());
    for (std::size_t min_certs : thresholds) {
        MultiCertRow row;
        row.min_certificates = min_certs;
        for (const auto& [account, count] : cert_counts) {
            if (count < min_certs) continue;
            ++row.earners;
            if (cameo_masters.count(account) > 0) ++row.earners_with_cameo;
        }
        row.fraction = row.earners == 0 ? 0.0
                                        : static_cast<double>(row.earners_with_cameo) /
                                              static_cast<double>(row.earners);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace cameo
