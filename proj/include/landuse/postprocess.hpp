#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "landuse/errors.hpp"
#include "landuse/grid.hpp"

namespace landuse {

enum class Provenance { Raw, Smoothed };

/// Predicted class per active cell. Code 0 marks an inactive cell.
struct PredictionGrid {
    GridSpec spec;
    std::vector<std::uint8_t> codes;  // per cell, 0 = inactive
    Provenance provenance = Provenance::Raw;

    PredictionGrid() = default;
    explicit PredictionGrid(GridSpec s) : spec(s), codes(s.n_cells(), 0) {}

    bool active(std::size_t idx) const { return codes[idx] != 0; }

    std::vector<std::uint32_t> active_cells() const {
        std::vector<std::uint32_t> out;
        for (std::size_t i = 0; i < codes.size(); ++i)
            if (codes[i] != 0) out.push_back(static_cast<std::uint32_t>(i));
        return out;
    }
};

/// One synchronous neighbor-majority sweep: a cell switches to the class held
/// by a strict majority (> half) of its active 8-neighbors, all reads against
/// the input grid. Cells with no active neighbors, or no strict majority, are
/// unchanged.
inline PredictionGrid second_pass(const PredictionGrid& pg) {
    PredictionGrid out = pg;
    out.provenance = Provenance::Smoothed;
    const GridSpec& spec = pg.spec;
    for (int i = 0; i < spec.n_rows; ++i)
        for (int j = 0; j < spec.n_cols; ++j) {
            std::size_t idx = spec.flat(i, j);
            if (pg.codes[idx] == 0) continue;
            std::array<int, kNumClasses> votes{};
            int n_active = 0;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    int ni = i + di, nj = j + dj;
                    if (!spec.in_bounds(ni, nj)) continue;
                    std::uint8_t c = pg.codes[spec.flat(ni, nj)];
                    if (c == 0) continue;
                    ++votes[c - 1];
                    ++n_active;
                }
            if (n_active == 0) continue;
            for (int k = 0; k < kNumClasses; ++k)
                if (2 * votes[k] > n_active) {
                    if (static_cast<std::uint8_t>(k + 1) != pg.codes[idx])
                        out.codes[idx] = static_cast<std::uint8_t>(k + 1);
                    break;  // at most one strict majority exists
                }
        }
    return out;
}

/// Repeated sweeps until a fixed point (optional mode, off by default in the
/// pipeline). max_iters bounds oscillating configurations.
inline PredictionGrid second_pass_to_fixpoint(PredictionGrid pg, int max_iters = 100) {
    for (int it = 0; it < max_iters; ++it) {
        PredictionGrid next = second_pass(pg);
        if (next.codes == pg.codes) {
            next.provenance = Provenance::Smoothed;
            return next;
        }
        pg = std::move(next);
    }
    return pg;
}

}  // namespace landuse
