#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "landuse/errors.hpp"
#include "landuse/grid.hpp"
#include "landuse/timeutil.hpp"

namespace landuse {

inline constexpr int kHoursPerWeek = 168;

/// One point-located phone event, carried in local civil time.
struct ActivityEvent {
    LocalTime when;
    double x = 0.0;
    double y = 0.0;
};

/// Per-cell average hourly event counts per hour-of-week (a^abs).
/// Slot index = day_of_week * 24 + hour, Monday = day 0.
struct ActivityCube {
    GridSpec spec;
    DateRange window;
    std::array<std::int64_t, 7> observed_days{};
    std::vector<double> avg;                 // n_cells * 168, averages
    std::vector<std::int64_t> total_events;  // per cell

    double& at(std::size_t cell, int slot) { return avg[cell * kHoursPerWeek + slot]; }
    double at(std::size_t cell, int slot) const { return avg[cell * kHoursPerWeek + slot]; }
};

struct IngestStats {
    std::int64_t in_window = 0;
    std::int64_t outside_grid = 0;
    std::int64_t outside_window = 0;
    std::int64_t skipped_rows = 0;  // unparseable rows, counted by the reader
};

/// Streaming accumulator; shards may each hold one and be merged by addition.
class CubeAccumulator {
  public:
    CubeAccumulator(GridSpec spec, DateRange window) : spec_(spec), window_(window) {
        spec_.validate();
        if (window_.n_days() < 7)
            throw ConfigError("observation window must span >= 7 calendar days, got " +
                              std::to_string(window_.n_days()));
        tally_.assign(spec_.n_cells() * kHoursPerWeek, 0);
        totals_.assign(spec_.n_cells(), 0);
    }

    void add(const ActivityEvent& ev) {
        if (!window_.contains(ev.when.date)) {
            ++stats_.outside_window;
            return;
        }
        auto cell = spec_.cell_of(ev.x, ev.y);
        if (!cell) {
            ++stats_.outside_grid;
            return;
        }
        int dow = weekday_monday0(ev.when.date);
        int slot = dow * 24 + ev.when.hour;
        std::size_t idx = spec_.flat(cell->first, cell->second);
        ++tally_[idx * kHoursPerWeek + slot];
        ++totals_[idx];
        ++stats_.in_window;
    }

    void note_skipped() { ++stats_.skipped_rows; }

    /// Merge another shard; associative and commutative.
    void merge(const CubeAccumulator& other) {
        if (!(other.spec_ == spec_)) throw ConsistencyError("merging cubes with different grid specs");
        for (std::size_t i = 0; i < tally_.size(); ++i) tally_[i] += other.tally_[i];
        for (std::size_t i = 0; i < totals_.size(); ++i) totals_[i] += other.totals_[i];
        stats_.in_window += other.stats_.in_window;
        stats_.outside_grid += other.stats_.outside_grid;
        stats_.outside_window += other.stats_.outside_window;
        stats_.skipped_rows += other.stats_.skipped_rows;
    }

    const IngestStats& stats() const { return stats_; }

    ActivityCube finalize() const {
        std::int64_t attempted = stats_.in_window + stats_.outside_grid + stats_.outside_window +
                                 stats_.skipped_rows;
        if (attempted > 0 &&
            static_cast<double>(stats_.skipped_rows) > 0.01 * static_cast<double>(attempted))
            throw InputError("more than 1% of event rows were unparseable (" +
                             std::to_string(stats_.skipped_rows) + " of " + std::to_string(attempted) + ")");
        ActivityCube cube;
        cube.spec = spec_;
        cube.window = window_;
        cube.observed_days = window_.observed_days();
        cube.avg.resize(tally_.size());
        cube.total_events = totals_;
        for (std::size_t cell = 0; cell < spec_.n_cells(); ++cell)
            for (int slot = 0; slot < kHoursPerWeek; ++slot) {
                std::int64_t days = cube.observed_days[slot / 24];
                cube.avg[cell * kHoursPerWeek + slot] =
                    static_cast<double>(tally_[cell * kHoursPerWeek + slot]) / static_cast<double>(days);
            }
        return cube;
    }

    const GridSpec& spec() const { return spec_; }
    const DateRange& window() const { return window_; }

  private:
    GridSpec spec_;
    DateRange window_;
    std::vector<std::int64_t> tally_;
    std::vector<std::int64_t> totals_;
    IngestStats stats_;
};

/// Bins a stream of events into an ActivityCube. `source` is invoked
/// repeatedly and returns false when exhausted; only the accumulators are
/// held in memory.
template <class Source>
ActivityCube bin_events(Source&& source, const GridSpec& spec, const DateRange& window,
                        IngestStats* stats_out = nullptr) {
    CubeAccumulator acc(spec, window);
    ActivityEvent ev;
    while (source(ev)) acc.add(ev);
    if (stats_out) *stats_out = acc.stats();
    return acc.finalize();
}

/// Cells with total_events >= min_total_events, ascending flat index.
inline std::vector<std::uint32_t> apply_activity_threshold(const ActivityCube& cube,
                                                           std::int64_t min_total_events) {
    if (min_total_events < 0) throw ConfigError("activity threshold must be >= 0");
    std::vector<std::uint32_t> active;
    for (std::size_t i = 0; i < cube.total_events.size(); ++i)
        if (cube.total_events[i] >= min_total_events) active.push_back(static_cast<std::uint32_t>(i));
    return active;
}

}  // namespace landuse
