#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "landuse/activity.hpp"
#include "landuse/errors.hpp"
#include "landuse/grid.hpp"
#include "landuse/rng.hpp"
#include "landuse/timeutil.hpp"

namespace landuse {

/// Hours used by the acceptance checks on class-average residual signs:
/// residential evenings vs business middays, weekdays only.
inline constexpr std::array<int, 3> kNightPeakHours{20, 21, 22};
inline constexpr std::array<int, 4> kMiddayHours{11, 12, 13, 14};

/// Default class shares: the Boston tabulation's cell counts, as fractions.
inline std::array<double, kNumClasses> default_shares() {
    constexpr std::array<double, kNumClasses> counts{23322, 1854, 2236, 1941, 2045};
    double total = 0.0;
    for (double c : counts) total += c;
    std::array<double, kNumClasses> s{};
    for (int k = 0; k < kNumClasses; ++k) s[k] = counts[k] / total;
    return s;
}

/// Built-in 168-hour base intensity profiles (events/hour), one per class.
/// Shapes: Residential peaks in the evening and dips midday on weekdays;
/// Commercial is the inverse; Industrial holds a flatter daytime plateau;
/// Parks rise on weekend afternoons; Other rises in the weekend small hours.
inline std::array<std::array<double, kHoursPerWeek>, kNumClasses> default_profiles(double base_rate) {
    std::array<std::array<double, kHoursPerWeek>, kNumClasses> p{};
    auto set = [&](int cls, int day, int hour, double mult) { p[cls][day * 24 + hour] = base_rate * mult; };
    for (int d = 0; d < 7; ++d) {
        bool weekend = d >= 5;
        for (int h = 0; h < 24; ++h) {
            double night = (h >= 19 && h <= 23) ? 1.0 : 0.0;
            double midday = (h >= 10 && h <= 16) ? 1.0 : 0.0;
            double morning = (h >= 6 && h <= 9) ? 1.0 : 0.0;
            double small_hours = (h <= 3) ? 1.0 : 0.0;
            double afternoon = (h >= 12 && h <= 18) ? 1.0 : 0.0;

            // Residential
            set(0, d, h, weekend ? 1.2 + 0.8 * afternoon : 0.8 + 2.2 * night + 0.9 * morning - 0.5 * midday);
            // Commercial
            set(1, d, h, weekend ? 0.5 + 0.3 * midday : 0.5 + 2.8 * midday + 0.4 * morning);
            // Industrial: early plateau, tapering after hours
            set(2, d, h,
                weekend ? 0.4 : 0.5 + 1.6 * ((h >= 6 && h <= 18) ? 1.0 : 0.0) + 0.6 * morning);
            // Parks
            set(3, d, h, weekend ? 0.4 + 2.6 * afternoon : 0.4 + 0.6 * afternoon);
            // Other: weekend nightlife
            set(4, d, h, weekend ? 0.7 + 2.5 * small_hours + 0.6 * night : 0.7 + 0.7 * night);
        }
    }
    for (auto& prof : p)
        for (double& v : prof) v = std::max(v, 0.05 * base_rate);
    return p;
}

struct SynthConfig {
    int n_rows = 100;
    int n_cols = 100;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell_size = 200.0;
    std::array<double, kNumClasses> shares = default_shares();
    double patch_size = 25.0;  // expected contiguous cells per patch
    double base_rate = 4.0;    // events/hour scale for the default profiles
    std::array<std::array<double, kHoursPerWeek>, kNumClasses> profiles = default_profiles(4.0);
    double gradient = 2.0;  // intensity multiplier at the grid center, 1 at the edge
    double noise = 1.0;     // 0 deterministic; 1 Poisson; >1 gamma-overdispersed Poisson
    std::uint64_t seed = 1;
    CivilDate window_start{2012, 8, 6};  // a Monday
    int window_weeks = 3;

    GridSpec grid() const { return GridSpec{origin_x, origin_y, cell_size, n_rows, n_cols}; }

    DateRange window() const {
        CivilDate end = civil_from_days(days_from_civil(window_start) + 7LL * window_weeks);
        return DateRange{window_start, end};
    }

    void validate() const {
        grid().validate();
        double sum = 0.0;
        for (double s : shares) {
            if (s < 0.0) throw ConfigError("synth shares must be non-negative");
            sum += s;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("synth shares must sum to 1");
        if (patch_size < 1.0) throw ConfigError("synth patch_size must be >= 1");
        if (noise < 0.0) throw ConfigError("synth noise must be >= 0");
        if (gradient <= 0.0) throw ConfigError("synth gradient must be > 0");
        if (window_weeks < 1) throw ConfigError("synth window must span >= 1 week");
        for (const auto& prof : profiles)
            for (double v : prof)
                if (v < 0.0) throw ConfigError("synth intensities must be >= 0");
        int nonzero = 0;
        for (double s : shares) nonzero += (s > 0.0);
        if (static_cast<std::size_t>(nonzero) > grid().n_cells())
            throw ConfigError("synth shares name more classes than grid cells");
    }
};

namespace detail {

/// Largest-remainder apportionment of n cells to the share targets.
inline std::array<std::size_t, kNumClasses> target_counts(const std::array<double, kNumClasses>& shares,
                                                          std::size_t n) {
    std::array<std::size_t, kNumClasses> counts{};
    std::array<double, kNumClasses> rem{};
    std::size_t assigned = 0;
    for (int k = 0; k < kNumClasses; ++k) {
        double exact = shares[k] * static_cast<double>(n);
        counts[k] = static_cast<std::size_t>(exact);
        rem[k] = exact - static_cast<double>(counts[k]);
        assigned += counts[k];
    }
    std::array<int, kNumClasses> order{0, 1, 2, 3, 4};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (rem[a] != rem[b]) return rem[a] > rem[b];
        return a < b;
    });
    for (int i = 0; assigned < n; ++i, ++assigned) ++counts[order[i % kNumClasses]];
    return counts;
}

}  // namespace detail

/// Seeded-patch region growth: class quotas hit exactly, labels spatially
/// coherent, deterministic given the seed.
inline ZoningGrid generate_layout(const SynthConfig& cfg) {
    cfg.validate();
    GridSpec spec = cfg.grid();
    auto counts = detail::target_counts(cfg.shares, spec.n_cells());

    ZoningGrid zg(spec);
    std::vector<std::uint8_t> assigned(spec.n_cells(), 0);
    std::array<std::vector<std::uint32_t>, kNumClasses> frontier;
    std::array<std::size_t, kNumClasses> remaining = counts;
    Rng rng(derive_seed(cfg.seed, 0x1A11ULL));

    std::vector<std::uint32_t> unassigned(spec.n_cells());
    for (std::size_t i = 0; i < spec.n_cells(); ++i) unassigned[i] = static_cast<std::uint32_t>(i);
    auto pick_unassigned = [&]() -> std::uint32_t {
        for (;;) {
            std::size_t i = static_cast<std::size_t>(rng.uniform_index(unassigned.size()));
            std::uint32_t cell = unassigned[i];
            unassigned[i] = unassigned.back();
            unassigned.pop_back();
            if (!assigned[cell]) return cell;
        }
    };

    auto claim = [&](int k, std::uint32_t cell) {
        assigned[cell] = 1;
        auto [i, j] = spec.unflat(cell);
        zg.set_label(i, j, class_from_code(k + 1));
        --remaining[k];
        const int di[4] = {-1, 1, 0, 0};
        const int dj[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
            int ni = i + di[d], nj = j + dj[d];
            if (spec.in_bounds(ni, nj) && !assigned[spec.flat(ni, nj)])
                frontier[k].push_back(static_cast<std::uint32_t>(spec.flat(ni, nj)));
        }
    };

    // Initial seeds, roughly count/patch_size patches per class.
    for (int k = 0; k < kNumClasses; ++k) {
        if (counts[k] == 0) continue;
        std::size_t n_patches = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(static_cast<double>(counts[k]) / cfg.patch_size)));
        for (std::size_t p = 0; p < n_patches && remaining[k] > 0; ++p) claim(k, pick_unassigned());
    }

    // Interleaved growth, one cell per class per round.
    for (;;) {
        bool any = false;
        for (int k = 0; k < kNumClasses; ++k) {
            if (remaining[k] == 0) continue;
            any = true;
            std::uint32_t cell = UINT32_MAX;
            while (!frontier[k].empty()) {
                std::size_t i = static_cast<std::size_t>(rng.uniform_index(frontier[k].size()));
                std::uint32_t cand = frontier[k][i];
                frontier[k][i] = frontier[k].back();
                frontier[k].pop_back();
                if (!assigned[cand]) {
                    cell = cand;
                    break;
                }
            }
            if (cell == UINT32_MAX) cell = pick_unassigned();  // patch landlocked: start a new one
            claim(k, cell);
        }
        if (!any) break;
    }
    return zg;
}

/// Streams events for every labeled cell: cell-major, chronological within a
/// cell. Deterministic given the seed, independent of the sink.
template <class Sink>
void generate_events(const ZoningGrid& zg, const SynthConfig& cfg, Sink&& sink) {
    cfg.validate();
    const GridSpec spec = zg.spec();
    const DateRange window = cfg.window();
    const std::int64_t day0 = days_from_civil(window.start);
    const std::int64_t n_days = window.n_days();

    const double cx = (spec.n_cols - 1) / 2.0, cy = (spec.n_rows - 1) / 2.0;
    const double max_dist = std::sqrt(cx * cx + cy * cy);

    std::vector<double> seconds;
    for (std::size_t idx = 0; idx < spec.n_cells(); ++idx) {
        auto label = zg.label_flat(idx);
        if (!label) continue;
        const auto& profile = cfg.profiles[class_code(*label) - 1];
        auto [i, j] = spec.unflat(idx);
        double dist = max_dist > 0.0 ? std::sqrt((i - cy) * (i - cy) + (j - cx) * (j - cx)) / max_dist : 0.0;
        double g = cfg.gradient + (1.0 - cfg.gradient) * dist;  // gradient at center, 1 at edge

        Rng rng(derive_seed(cfg.seed, 0xE7000000ULL + idx));
        std::array<std::int64_t, kHoursPerWeek> occurrence{};
        for (std::int64_t d = 0; d < n_days; ++d) {
            CivilDate date = civil_from_days(day0 + d);
            int dow = weekday_monday0(date);
            for (int h = 0; h < 24; ++h) {
                int slot = dow * 24 + h;
                double mean = profile[slot] * g;
                std::uint64_t count;
                if (cfg.noise == 0.0) {
                    // Error diffusion: totals over the window match mean * days.
                    std::int64_t k = occurrence[slot]++;
                    count = static_cast<std::uint64_t>(std::llround(
                        std::floor(mean * (k + 1) + 1e-9) - std::floor(mean * k + 1e-9)));
                } else {
                    double m = mean;
                    if (cfg.noise != 1.0 && mean > 0.0) {
                        double shape = 1.0 / (cfg.noise * cfg.noise);
                        m = mean * rng.gamma(shape, 1.0 / shape);
                    }
                    count = m > 0.0 ? rng.poisson(m) : 0;
                }
                if (count == 0) continue;
                seconds.clear();
                for (std::uint64_t e = 0; e < count; ++e) seconds.push_back(rng.uniform(0.0, 3600.0));
                std::sort(seconds.begin(), seconds.end());
                for (double s : seconds) {
                    ActivityEvent ev;
                    ev.when.date = date;
                    ev.when.hour = h;
                    ev.when.minute = static_cast<int>(s / 60.0);
                    ev.when.second = s - 60.0 * ev.when.minute;
                    ev.when.offset_minutes = 0;
                    ev.x = spec.cell_min_x(j) + rng.uniform(0.0, spec.cell_size);
                    ev.y = spec.cell_min_y(i) + rng.uniform(0.0, spec.cell_size);
                    sink(ev);
                }
            }
        }
    }
}

}  // namespace landuse
