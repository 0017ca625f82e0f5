#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "landuse/geometry.hpp"
#include "landuse/grid.hpp"

namespace landuse {

/// Per-cell covered area per class, in square meters.
struct CoverageField {
    GridSpec spec;
    std::vector<std::array<double, kNumClasses>> area;  // flat cell index -> per-class area

    std::array<double, kNumClasses>& at(std::size_t idx) { return area[idx]; }
    const std::array<double, kNumClasses>& at(std::size_t idx) const { return area[idx]; }
};

/// Exact polygon-vs-cell intersection areas accumulated per class.
inline CoverageField accumulate_coverage(const std::vector<ZoningPolygon>& polygons,
                                         const GridSpec& spec) {
    spec.validate();
    for (std::size_t p = 0; p < polygons.size(); ++p) validate_polygon(polygons[p], p);

    CoverageField cov{spec, std::vector<std::array<double, kNumClasses>>(spec.n_cells())};
    const double s = spec.cell_size;
    for (const ZoningPolygon& poly : polygons) {
        Rect bb = poly.bounding_box();
        int j0 = std::max(0, static_cast<int>(std::floor((bb.min_x - spec.origin_x) / s)));
        int j1 = std::min(spec.n_cols - 1, static_cast<int>(std::floor((bb.max_x - spec.origin_x) / s)));
        int i0 = std::max(0, static_cast<int>(std::floor((bb.min_y - spec.origin_y) / s)));
        int i1 = std::min(spec.n_rows - 1, static_cast<int>(std::floor((bb.max_y - spec.origin_y) / s)));
        const int k = class_code(poly.land_use) - 1;
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) {
                Rect cell{spec.cell_min_x(j), spec.cell_min_y(i), spec.cell_min_x(j) + s,
                          spec.cell_min_y(i) + s};
                double a = poly.area_in_rect(cell);
                if (a > 0.0) cov.at(spec.flat(i, j))[k] += a;
            }
    }
    return cov;
}

/// Majority-area rule: each cell gets the class covering the largest area
/// fraction; ties break toward the lower category index. Cells whose total
/// covered fraction is below min_coverage stay unlabeled.
inline ZoningGrid rasterize_zoning(const std::vector<ZoningPolygon>& polygons, const GridSpec& spec,
                                   double min_coverage = 0.0) {
    if (min_coverage < 0.0 || min_coverage > 1.0)
        throw ConfigError("min_coverage must be in [0,1]");
    CoverageField cov = accumulate_coverage(polygons, spec);

    ZoningGrid zg(spec);
    const double cell_area = spec.cell_size * spec.cell_size;
    for (std::size_t idx = 0; idx < spec.n_cells(); ++idx) {
        const auto& a = cov.at(idx);
        double total = 0.0;
        int best = -1;
        for (int k = 0; k < kNumClasses; ++k) {
            total += a[k];
            if (a[k] > 0.0 && (best < 0 || a[k] > a[best])) best = k;
        }
        if (best < 0) continue;
        if (total / cell_area < min_coverage) continue;
        auto [i, j] = spec.unflat(idx);
        zg.set_label(i, j, class_from_code(best + 1));
    }
    return zg;
}

}  // namespace landuse
