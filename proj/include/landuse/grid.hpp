#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "landuse/errors.hpp"

namespace landuse {

/// The five zoning categories, integer codes fixed by convention.
enum class LandUseClass : std::uint8_t {
    Residential = 1,
    Commercial = 2,
    Industrial = 3,
    Parks = 4,
    Other = 5,
};

inline constexpr int kNumClasses = 5;

inline constexpr std::array<LandUseClass, kNumClasses> all_classes() {
    return {LandUseClass::Residential, LandUseClass::Commercial, LandUseClass::Industrial,
            LandUseClass::Parks, LandUseClass::Other};
}

inline const char* class_name(LandUseClass c) {
    switch (c) {
        case LandUseClass::Residential: return "Residential";
        case LandUseClass::Commercial: return "Commercial";
        case LandUseClass::Industrial: return "Industrial";
        case LandUseClass::Parks: return "Parks";
        case LandUseClass::Other: return "Other";
    }
    return "?";
}

inline int class_code(LandUseClass c) { return static_cast<int>(c); }

inline LandUseClass class_from_code(int code) {
    if (code < 1 || code > kNumClasses)
        throw InputError("land use code out of range [1,5]: " + std::to_string(code));
    return static_cast<LandUseClass>(code);
}

/// Case-insensitive name or integer code 1..5.
inline LandUseClass parse_land_use(const std::string& s) {
    if (s.size() == 1 && s[0] >= '1' && s[0] <= '5') return class_from_code(s[0] - '0');
    auto to_lower = [](const std::string& in) {
        std::string l;
        l.reserve(in.size());
        for (char ch : in) l.push_back(static_cast<char>(ch >= 'A' && ch <= 'Z' ? ch + 32 : ch));
        return l;
    };
    std::string lower = to_lower(s);
    for (LandUseClass c : all_classes())
        if (lower == to_lower(class_name(c))) return c;
    throw InputError("unrecognized land use: \"" + s + "\"");
}

/// Uniform analysis lattice. Cell (i,j) covers the half-open square
/// [origin_x + j*s, origin_x + (j+1)*s) x [origin_y + i*s, origin_y + (i+1)*s).
struct GridSpec {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell_size = 200.0;
    int n_rows = 1;
    int n_cols = 1;

    void validate() const {
        if (!(cell_size > 0.0)) throw ConfigError("grid cell_size must be > 0");
        if (n_rows < 1 || n_cols < 1) throw ConfigError("grid must have n_rows >= 1 and n_cols >= 1");
    }

    std::size_t n_cells() const { return static_cast<std::size_t>(n_rows) * n_cols; }
    std::size_t flat(int i, int j) const { return static_cast<std::size_t>(i) * n_cols + j; }
    std::pair<int, int> unflat(std::size_t idx) const {
        return {static_cast<int>(idx / n_cols), static_cast<int>(idx % n_cols)};
    }
    bool in_bounds(int i, int j) const { return i >= 0 && i < n_rows && j >= 0 && j < n_cols; }

    double cell_min_x(int j) const { return origin_x + j * cell_size; }
    double cell_min_y(int i) const { return origin_y + i * cell_size; }

    /// Cell owning point (x,y) under half-open intervals, or nullopt if outside the grid.
    std::optional<std::pair<int, int>> cell_of(double x, double y) const {
        double fx = (x - origin_x) / cell_size;
        double fy = (y - origin_y) / cell_size;
        if (fx < 0.0 || fy < 0.0) return std::nullopt;
        int j = static_cast<int>(fx);
        int i = static_cast<int>(fy);
        if (i >= n_rows || j >= n_cols) return std::nullopt;
        return std::make_pair(i, j);
    }

    bool operator==(const GridSpec&) const = default;
};

/// Per-cell optional land-use label over a GridSpec. 0 = unlabeled.
class ZoningGrid {
  public:
    ZoningGrid() = default;
    explicit ZoningGrid(GridSpec spec) : spec_(spec), codes_(spec.n_cells(), 0) { spec_.validate(); }

    const GridSpec& spec() const { return spec_; }

    std::optional<LandUseClass> label(int i, int j) const {
        std::uint8_t c = codes_.at(spec_.flat(i, j));
        if (c == 0) return std::nullopt;
        return static_cast<LandUseClass>(c);
    }
    std::optional<LandUseClass> label_flat(std::size_t idx) const {
        std::uint8_t c = codes_.at(idx);
        if (c == 0) return std::nullopt;
        return static_cast<LandUseClass>(c);
    }

    void set_label(int i, int j, LandUseClass c) { codes_.at(spec_.flat(i, j)) = static_cast<std::uint8_t>(c); }
    void clear_label(int i, int j) { codes_.at(spec_.flat(i, j)) = 0; }

    std::size_t labeled_count() const {
        std::size_t n = 0;
        for (auto c : codes_) n += (c != 0);
        return n;
    }

    bool operator==(const ZoningGrid&) const = default;

  private:
    GridSpec spec_;
    std::vector<std::uint8_t> codes_;
};

/// Counts and percentages per class over the labeled cells of a grid.
struct ClassShares {
    std::array<std::size_t, kNumClasses> counts{};  // indexed by code-1
    std::array<double, kNumClasses> percent{};
    std::size_t labeled = 0;
};

inline ClassShares class_shares(const ZoningGrid& zg) {
    ClassShares s;
    const auto& spec = zg.spec();
    for (std::size_t idx = 0; idx < spec.n_cells(); ++idx)
        if (auto c = zg.label_flat(idx)) {
            ++s.counts[class_code(*c) - 1];
            ++s.labeled;
        }
    if (s.labeled > 0)
        for (int k = 0; k < kNumClasses; ++k)
            s.percent[k] = 100.0 * static_cast<double>(s.counts[k]) / static_cast<double>(s.labeled);
    return s;
}

/// Moore neighborhood of (i,j), in-bounds cells only, row-major order.
inline std::vector<std::pair<int, int>> neighbors8(const GridSpec& spec, int i, int j) {
    if (!spec.in_bounds(i, j))
        throw std::out_of_range("neighbors8: cell (" + std::to_string(i) + "," + std::to_string(j) +
                                ") out of bounds");
    std::vector<std::pair<int, int>> out;
    out.reserve(8);
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            if (spec.in_bounds(i + di, j + dj)) out.emplace_back(i + di, j + dj);
        }
    return out;
}

}  // namespace landuse
