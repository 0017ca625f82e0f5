#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "landuse/activity.hpp"
#include "landuse/errors.hpp"
#include "landuse/grid.hpp"
#include "landuse/log.hpp"

namespace landuse {

inline constexpr int kNumFeatures = 49;

namespace detail {

/// Kahan compensated sum over a fixed iteration order.
class CompensatedSum {
  public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0, c_ = 0.0;
};

}  // namespace detail

/// Per-cell z-scored weekly series (a^norm), zero mean, unit population std.
struct NormalizedSeries {
    GridSpec spec;
    std::vector<std::uint32_t> active;  // flat cell indices, ascending
    std::vector<double> values;         // active.size() * 168
    std::vector<double> mu;             // per active cell
    std::vector<double> sigma;          // per active cell

    double at(std::size_t row, int t) const { return values[row * kHoursPerWeek + t]; }
};

/// Spatially de-meaned series (a^res) plus the hourly spatial mean it removed.
struct ResidualSeries {
    GridSpec spec;
    std::vector<std::uint32_t> active;
    std::vector<double> values;  // active.size() * 168
    std::array<double, kHoursPerWeek> spatial_mean{};

    double at(std::size_t row, int t) const { return values[row * kHoursPerWeek + t]; }
};

/// Per-cell 49-wide feature rows aligned with `active`.
struct FeatureMatrix {
    GridSpec spec;
    std::vector<std::uint32_t> active;
    std::vector<double> values;  // active.size() * 49

    std::size_t n_rows() const { return active.size(); }
    const double* row(std::size_t r) const { return values.data() + r * kNumFeatures; }
    double* row(std::size_t r) { return values.data() + r * kNumFeatures; }
};

/// Z-scores each active cell's 168-hour series. Zero-variance cells are
/// dropped from the active set with a warning.
inline NormalizedSeries zscore(const ActivityCube& cube, const std::vector<std::uint32_t>& active) {
    NormalizedSeries ns;
    ns.spec = cube.spec;
    std::size_t dropped = 0;
    for (std::uint32_t cell : active) {
        detail::CompensatedSum sum;
        for (int t = 0; t < kHoursPerWeek; ++t) sum.add(cube.at(cell, t));
        double mu = sum.value() / kHoursPerWeek;
        detail::CompensatedSum var_sum;
        for (int t = 0; t < kHoursPerWeek; ++t) {
            double d = cube.at(cell, t) - mu;
            var_sum.add(d * d);
        }
        double sigma = std::sqrt(var_sum.value() / kHoursPerWeek);
        if (sigma == 0.0) {
            ++dropped;
            continue;
        }
        ns.active.push_back(cell);
        ns.mu.push_back(mu);
        ns.sigma.push_back(sigma);
        for (int t = 0; t < kHoursPerWeek; ++t) ns.values.push_back((cube.at(cell, t) - mu) / sigma);
    }
    if (dropped > 0)
        log::warn("zscore: excluded " + std::to_string(dropped) + " zero-variance cell(s) from the active set");
    return ns;
}

/// Subtracts the hourly spatial mean over active cells (a^res).
inline ResidualSeries residual(const NormalizedSeries& ns) {
    ResidualSeries rs;
    rs.spec = ns.spec;
    rs.active = ns.active;
    const std::size_t n = ns.active.size();
    if (n == 1) log::warn("residual: single active cell, residual series is identically zero");
    for (int t = 0; t < kHoursPerWeek; ++t) {
        detail::CompensatedSum sum;
        for (std::size_t r = 0; r < n; ++r) sum.add(ns.at(r, t));
        rs.spatial_mean[t] = n > 0 ? sum.value() / static_cast<double>(n) : 0.0;
    }
    rs.values.resize(n * kHoursPerWeek);
    for (std::size_t r = 0; r < n; ++r)
        for (int t = 0; t < kHoursPerWeek; ++t)
            rs.values[r * kHoursPerWeek + t] = ns.at(r, t) - rs.spatial_mean[t];
    return rs;
}

/// Mean 168-hour profiles per land-use class over active labeled cells, for
/// the absolute, normalized and residual series.
struct ClassProfiles {
    std::array<bool, kNumClasses> present{};
    std::array<std::size_t, kNumClasses> count{};
    std::array<std::array<double, kHoursPerWeek>, kNumClasses> mean_abs{};
    std::array<std::array<double, kHoursPerWeek>, kNumClasses> mean_norm{};
    std::array<std::array<double, kHoursPerWeek>, kNumClasses> mean_res{};
};

inline ClassProfiles class_average_profiles(const ActivityCube& cube, const NormalizedSeries& ns,
                                            const ResidualSeries& rs, const ZoningGrid& zg) {
    if (ns.active != rs.active)
        throw ConsistencyError("class_average_profiles: normalized and residual active sets differ");
    ClassProfiles cp;
    std::array<std::array<detail::CompensatedSum, kHoursPerWeek>, kNumClasses> abs_sum{}, norm_sum{},
        res_sum{};
    for (std::size_t r = 0; r < rs.active.size(); ++r) {
        std::uint32_t cell = rs.active[r];
        auto label = zg.label_flat(cell);
        if (!label) throw ConsistencyError("class_average_profiles: active cell without zoning label");
        int k = class_code(*label) - 1;
        ++cp.count[k];
        for (int t = 0; t < kHoursPerWeek; ++t) {
            abs_sum[k][t].add(cube.at(cell, t));
            norm_sum[k][t].add(ns.at(r, t));
            res_sum[k][t].add(rs.at(r, t));
        }
    }
    for (int k = 0; k < kNumClasses; ++k) {
        if (cp.count[k] == 0) {
            log::warn(std::string("class_average_profiles: no active cells for class ") +
                      class_name(class_from_code(k + 1)));
            continue;
        }
        cp.present[k] = true;
        double n = static_cast<double>(cp.count[k]);
        for (int t = 0; t < kHoursPerWeek; ++t) {
            cp.mean_abs[k][t] = abs_sum[k][t].value() / n;
            cp.mean_norm[k][t] = norm_sum[k][t].value() / n;
            cp.mean_res[k][t] = res_sum[k][t].value() / n;
        }
    }
    return cp;
}

/// 49 features per active cell: 1-24 mean weekday residual profile,
/// 25-48 mean weekend residual profile, 49 mean absolute daily activity.
inline FeatureMatrix build_features(const ActivityCube& cube, const ResidualSeries& rs) {
    if (!(rs.spec == cube.spec))
        throw ConsistencyError("build_features: cube and residual series use different grid specs");
    FeatureMatrix fm;
    fm.spec = cube.spec;
    fm.active = rs.active;
    fm.values.resize(rs.active.size() * kNumFeatures);
    for (std::size_t r = 0; r < rs.active.size(); ++r) {
        std::uint32_t cell = rs.active[r];
        double* out = fm.row(r);
        for (int h = 0; h < 24; ++h) {
            double wd = 0.0, we = 0.0;
            for (int d = 0; d < 5; ++d) wd += rs.at(r, d * 24 + h);
            for (int d = 5; d < 7; ++d) we += rs.at(r, d * 24 + h);
            out[h] = wd / 5.0;
            out[24 + h] = we / 2.0;
        }
        detail::CompensatedSum abs_sum;
        for (int t = 0; t < kHoursPerWeek; ++t) abs_sum.add(cube.at(cell, t));
        out[48] = abs_sum.value() / 7.0;
    }
    return fm;
}

}  // namespace landuse
