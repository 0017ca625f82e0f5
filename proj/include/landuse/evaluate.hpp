#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "landuse/errors.hpp"
#include "landuse/grid.hpp"
#include "landuse/postprocess.hpp"
#include "landuse/signal.hpp"

namespace landuse {

/// Row-normalized confusion matrix plus the headline numbers, restricted to a
/// class subset. Entry (i,j) = fraction of true-class-i cells predicted j.
struct ConfusionReport {
    std::vector<LandUseClass> classes;  // subset, ascending code
    std::vector<std::vector<std::size_t>> counts;
    std::vector<std::vector<double>> fractions;
    std::vector<double> land_share;       // per subset class, over evaluated cells
    std::vector<double> vote_thresholds;  // informational, from the run config
    double total_accuracy = 0.0;
    std::size_t evaluated_cells = 0;
};

inline ConfusionReport confusion(const ZoningGrid& truth, const PredictionGrid& pred,
                                 const std::vector<LandUseClass>& class_subset,
                                 const std::vector<double>& vote_thresholds = {}) {
    if (!(truth.spec() == pred.spec))
        throw ConsistencyError("confusion: truth and prediction use different grid specs");
    ConfusionReport rep;
    rep.classes = class_subset;
    std::array<int, kNumClasses + 1> pos;  // code -> subset column, -1 if absent
    pos.fill(-1);
    for (std::size_t k = 0; k < class_subset.size(); ++k) pos[class_code(class_subset[k])] = static_cast<int>(k);

    const std::size_t m = class_subset.size();
    rep.counts.assign(m, std::vector<std::size_t>(m, 0));
    rep.fractions.assign(m, std::vector<double>(m, 0.0));
    rep.land_share.assign(m, 0.0);
    rep.vote_thresholds = vote_thresholds;

    for (std::size_t idx = 0; idx < pred.codes.size(); ++idx) {
        if (!pred.active(idx)) continue;
        auto t = truth.label_flat(idx);
        if (!t) throw ConsistencyError("confusion: predicted cell has no truth label");
        int ti = pos[class_code(*t)];
        if (ti < 0) continue;  // true class outside the subset: excluded
        int pi = pos[pred.codes[idx]];
        if (pi < 0) continue;  // prediction outside the subset (cannot happen when subset == class set)
        ++rep.counts[ti][pi];
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t row_total = 0;
        for (std::size_t j = 0; j < m; ++j) row_total += rep.counts[i][j];
        rep.evaluated_cells += row_total;
        correct += rep.counts[i][i];
        if (row_total > 0)
            for (std::size_t j = 0; j < m; ++j)
                rep.fractions[i][j] = static_cast<double>(rep.counts[i][j]) / static_cast<double>(row_total);
    }
    if (rep.evaluated_cells > 0) {
        rep.total_accuracy = static_cast<double>(correct) / static_cast<double>(rep.evaluated_cells);
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t row_total = 0;
            for (std::size_t j = 0; j < m; ++j) row_total += rep.counts[i][j];
            rep.land_share[i] = static_cast<double>(row_total) / static_cast<double>(rep.evaluated_cells);
        }
    }
    return rep;
}

/// Fig.-5-style decomposition relative to a focal class:
///   Group I   true == focal, predicted == focal
///   Group II  true != focal, predicted == focal
///   Group III true == focal, predicted != focal
struct ErrorGroupProfiles {
    LandUseClass focal;
    std::array<std::size_t, 3> count{};
    std::array<bool, 3> has_profile{};
    std::array<std::array<double, kHoursPerWeek>, 3> mean_residual{};
};

inline ErrorGroupProfiles error_groups(const ZoningGrid& truth, const PredictionGrid& pred,
                                       const ResidualSeries& rs, LandUseClass focal) {
    ErrorGroupProfiles eg;
    eg.focal = focal;
    std::array<std::array<detail::CompensatedSum, kHoursPerWeek>, 3> sums{};
    for (std::size_t r = 0; r < rs.active.size(); ++r) {
        std::uint32_t cell = rs.active[r];
        if (!pred.active(cell)) throw ConsistencyError("error_groups: residual cell missing prediction");
        auto t = truth.label_flat(cell);
        if (!t) throw ConsistencyError("error_groups: residual cell missing truth label");
        bool true_focal = (*t == focal);
        bool pred_focal = (pred.codes[cell] == static_cast<std::uint8_t>(class_code(focal)));
        int group;
        if (true_focal && pred_focal) group = 0;
        else if (!true_focal && pred_focal) group = 1;
        else if (true_focal) group = 2;
        else continue;
        ++eg.count[group];
        for (int t2 = 0; t2 < kHoursPerWeek; ++t2) sums[group][t2].add(rs.at(r, t2));
    }
    for (int g = 0; g < 3; ++g) {
        if (eg.count[g] == 0) continue;
        eg.has_profile[g] = true;
        for (int t = 0; t < kHoursPerWeek; ++t)
            eg.mean_residual[g][t] = sums[g][t].value() / static_cast<double>(eg.count[g]);
    }
    return eg;
}

/// Accuracy of assigning Residential everywhere: the Residential share among
/// the given active labeled cells.
inline double naive_baseline(const ZoningGrid& truth, const std::vector<std::uint32_t>& active) {
    std::size_t labeled = 0, residential = 0;
    for (std::uint32_t cell : active) {
        auto c = truth.label_flat(cell);
        if (!c) continue;
        ++labeled;
        if (*c == LandUseClass::Residential) ++residential;
    }
    if (labeled == 0) throw InputError("naive_baseline: no labeled active cells");
    return static_cast<double>(residential) / static_cast<double>(labeled);
}

}  // namespace landuse
