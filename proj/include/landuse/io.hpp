#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "landuse/activity.hpp"
#include "landuse/errors.hpp"
#include "landuse/evaluate.hpp"
#include "landuse/grid.hpp"
#include "landuse/postprocess.hpp"
#include "landuse/signal.hpp"

namespace landuse::io {

/// Shortest round-trip decimal form of a double.
inline std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw InputError("bad number: \"" + std::string(s) + "\"");
    return v;
}

inline long parse_long(std::string_view s) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw InputError("bad integer: \"" + std::string(s) + "\"");
    return v;
}

inline void split_csv_line(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open output file: " + path);
    return out;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("missing input file: " + path);
    return in;
}

/// Line reader over plain or gzip files (zlib auto-detects the magic).
class GzLineReader {
  public:
    explicit GzLineReader(const std::string& path) : file_(gzopen(path.c_str(), "rb")) {
        if (!file_) throw InputError("missing input file: " + path);
    }
    ~GzLineReader() {
        if (file_) gzclose(file_);
    }
    GzLineReader(const GzLineReader&) = delete;
    GzLineReader& operator=(const GzLineReader&) = delete;

    bool next(std::string& line) {
        line.clear();
        for (;;) {
            if (pos_ >= len_) {
                len_ = gzread(file_, buf_, sizeof(buf_));
                pos_ = 0;
                if (len_ <= 0) return !line.empty();
            }
            while (pos_ < len_) {
                char c = buf_[pos_++];
                if (c == '\n') {
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    return true;
                }
                line.push_back(c);
            }
        }
    }

  private:
    gzFile file_;
    char buf_[1 << 16];
    int pos_ = 0;
    int len_ = 0;
};

/// Writer over plain or gzip files, chosen by a .gz path suffix.
class MaybeGzWriter {
  public:
    explicit MaybeGzWriter(const std::string& path) {
        gzip_ = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
        if (gzip_) {
            gz_ = gzopen(path.c_str(), "wb");
            if (!gz_) throw InputError("cannot open output file: " + path);
        } else {
            plain_.open(path, std::ios::binary);
            if (!plain_) throw InputError("cannot open output file: " + path);
        }
    }
    ~MaybeGzWriter() {
        if (gz_) gzclose(gz_);
    }
    MaybeGzWriter(const MaybeGzWriter&) = delete;
    MaybeGzWriter& operator=(const MaybeGzWriter&) = delete;

    void write(std::string_view s) {
        if (gzip_) {
            if (gzwrite(gz_, s.data(), static_cast<unsigned>(s.size())) <= 0 && !s.empty())
                throw InputError("gzip write failed");
        } else {
            plain_.write(s.data(), static_cast<std::streamsize>(s.size()));
        }
    }

  private:
    bool gzip_ = false;
    gzFile gz_ = nullptr;
    std::ofstream plain_;
};

// ---- ZoningGrid / PredictionGrid CSV --------------------------------------

inline void write_zoning_csv(const ZoningGrid& zg, const std::string& path) {
    auto out = open_output(path);
    out << "row,col,land_use_code\n";
    const auto& spec = zg.spec();
    for (int i = 0; i < spec.n_rows; ++i)
        for (int j = 0; j < spec.n_cols; ++j)
            if (auto c = zg.label(i, j))
                out << i << ',' << j << ',' << class_code(*c) << '\n';
}

inline ZoningGrid read_zoning_csv(const std::string& path, const GridSpec& spec) {
    auto in = open_input(path);
    ZoningGrid zg(spec);
    std::string line;
    std::vector<std::string_view> cols;
    if (!std::getline(in, line) || line.rfind("row,col,land_use_code", 0) != 0)
        throw InputError(path + ": expected header row,col,land_use_code");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        split_csv_line(line, cols);
        if (cols.size() != 3) throw InputError(path + ": malformed row: " + line);
        int i = static_cast<int>(parse_long(cols[0])), j = static_cast<int>(parse_long(cols[1]));
        if (!spec.in_bounds(i, j)) throw InputError(path + ": cell out of grid bounds: " + line);
        zg.set_label(i, j, class_from_code(static_cast<int>(parse_long(cols[2]))));
    }
    return zg;
}

inline void write_predictions_csv(const PredictionGrid& pg, const std::string& path) {
    auto out = open_output(path);
    out << "row,col,predicted_code,provenance\n";
    const char* prov = pg.provenance == Provenance::Raw ? "raw" : "smoothed";
    for (std::size_t idx = 0; idx < pg.codes.size(); ++idx) {
        if (!pg.active(idx)) continue;
        auto [i, j] = pg.spec.unflat(idx);
        out << i << ',' << j << ',' << static_cast<int>(pg.codes[idx]) << ',' << prov << '\n';
    }
}

inline PredictionGrid read_predictions_csv(const std::string& path, const GridSpec& spec) {
    auto in = open_input(path);
    PredictionGrid pg(spec);
    std::string line;
    std::vector<std::string_view> cols;
    if (!std::getline(in, line) || line.rfind("row,col,predicted_code,provenance", 0) != 0)
        throw InputError(path + ": expected header row,col,predicted_code,provenance");
    bool smoothed = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        split_csv_line(line, cols);
        if (cols.size() != 4) throw InputError(path + ": malformed row: " + line);
        int i = static_cast<int>(parse_long(cols[0])), j = static_cast<int>(parse_long(cols[1]));
        if (!spec.in_bounds(i, j)) throw InputError(path + ": cell out of grid bounds: " + line);
        pg.codes[spec.flat(i, j)] = static_cast<std::uint8_t>(parse_long(cols[2]));
        smoothed = cols[3] == "smoothed";
    }
    pg.provenance = smoothed ? Provenance::Smoothed : Provenance::Raw;
    return pg;
}

// ---- events CSV ------------------------------------------------------------

inline void write_event_csv(MaybeGzWriter& out, const ActivityEvent& ev) {
    std::string line = format_rfc3339_utc(ev.when.date, ev.when.hour, ev.when.minute, ev.when.second);
    line += ',';
    line += fmt_double(ev.x);
    line += ',';
    line += fmt_double(ev.y);
    line += '\n';
    out.write(line);
}

/// Streams `timestamp,x,y` rows (plain or gzip) into the accumulator.
/// Unparseable rows are skipped and counted; the >1% abort happens at
/// finalize time.
inline void ingest_event_csv(const std::string& path, CubeAccumulator& acc) {
    GzLineReader reader(path);
    std::string line;
    if (!reader.next(line) || line.rfind("timestamp,x,y", 0) != 0)
        throw InputError(path + ": expected header timestamp,x,y");
    std::vector<std::string_view> cols;
    while (reader.next(line)) {
        if (line.empty()) continue;
        split_csv_line(line, cols);
        if (cols.size() != 3) {
            acc.note_skipped();
            continue;
        }
        auto when = parse_rfc3339(cols[0]);
        if (!when) {
            acc.note_skipped();
            continue;
        }
        ActivityEvent ev;
        ev.when = *when;
        try {
            ev.x = parse_double(cols[1]);
            ev.y = parse_double(cols[2]);
        } catch (const InputError&) {
            acc.note_skipped();
            continue;
        }
        acc.add(ev);
    }
}

// ---- ActivityCube CSV ------------------------------------------------------

inline void write_cube_csv(const ActivityCube& cube, const std::string& path) {
    auto out = open_output(path);
    out << "row,col,day,hour,avg_count\n";
    for (std::size_t cell = 0; cell < cube.spec.n_cells(); ++cell) {
        auto [i, j] = cube.spec.unflat(cell);
        for (int slot = 0; slot < kHoursPerWeek; ++slot) {
            double v = cube.at(cell, slot);
            if (v == 0.0) continue;
            out << i << ',' << j << ',' << slot / 24 << ',' << slot % 24 << ',' << fmt_double(v) << '\n';
        }
    }
}

// ---- FeatureMatrix / residual CSV -------------------------------------------

inline void write_features_csv(const FeatureMatrix& fm, const std::string& path) {
    auto out = open_output(path);
    out << "row,col";
    for (int f = 1; f <= kNumFeatures; ++f) {
        char h[8];
        std::snprintf(h, sizeof(h), ",f%02d", f);
        out << h;
    }
    out << '\n';
    for (std::size_t r = 0; r < fm.n_rows(); ++r) {
        auto [i, j] = fm.spec.unflat(fm.active[r]);
        out << i << ',' << j;
        for (int f = 0; f < kNumFeatures; ++f) out << ',' << fmt_double(fm.row(r)[f]);
        out << '\n';
    }
}

inline FeatureMatrix read_features_csv(const std::string& path, const GridSpec& spec) {
    auto in = open_input(path);
    FeatureMatrix fm;
    fm.spec = spec;
    std::string line;
    std::vector<std::string_view> cols;
    if (!std::getline(in, line) || line.rfind("row,col,f01", 0) != 0)
        throw InputError(path + ": expected feature matrix header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        split_csv_line(line, cols);
        if (cols.size() != 2 + kNumFeatures) throw InputError(path + ": malformed feature row");
        int i = static_cast<int>(parse_long(cols[0])), j = static_cast<int>(parse_long(cols[1]));
        if (!spec.in_bounds(i, j)) throw InputError(path + ": cell out of grid bounds");
        fm.active.push_back(static_cast<std::uint32_t>(spec.flat(i, j)));
        for (int f = 0; f < kNumFeatures; ++f) fm.values.push_back(parse_double(cols[2 + f]));
    }
    return fm;
}

inline void write_residuals_csv(const ResidualSeries& rs, const std::string& path) {
    auto out = open_output(path);
    out << "row,col";
    for (int t = 0; t < kHoursPerWeek; ++t) {
        char h[8];
        std::snprintf(h, sizeof(h), ",r%03d", t);
        out << h;
    }
    out << '\n';
    for (std::size_t r = 0; r < rs.active.size(); ++r) {
        auto [i, j] = rs.spec.unflat(rs.active[r]);
        out << i << ',' << j;
        for (int t = 0; t < kHoursPerWeek; ++t) out << ',' << fmt_double(rs.at(r, t));
        out << '\n';
    }
}

inline ResidualSeries read_residuals_csv(const std::string& path, const GridSpec& spec) {
    auto in = open_input(path);
    ResidualSeries rs;
    rs.spec = spec;
    std::string line;
    std::vector<std::string_view> cols;
    if (!std::getline(in, line) || line.rfind("row,col,r000", 0) != 0)
        throw InputError(path + ": expected residual series header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        split_csv_line(line, cols);
        if (cols.size() != 2 + kHoursPerWeek) throw InputError(path + ": malformed residual row");
        int i = static_cast<int>(parse_long(cols[0])), j = static_cast<int>(parse_long(cols[1]));
        rs.active.push_back(static_cast<std::uint32_t>(spec.flat(i, j)));
        for (int t = 0; t < kHoursPerWeek; ++t) rs.values.push_back(parse_double(cols[2 + t]));
    }
    return rs;
}

// ---- plot-ready profile CSVs -------------------------------------------------

inline void write_class_profiles_csv(const ClassProfiles& cp, const std::string& path) {
    auto out = open_output(path);
    out << "class,hour_of_week,mean_abs,mean_norm,mean_res\n";
    for (int k = 0; k < kNumClasses; ++k) {
        if (!cp.present[k]) continue;
        for (int t = 0; t < kHoursPerWeek; ++t)
            out << class_name(class_from_code(k + 1)) << ',' << t << ',' << fmt_double(cp.mean_abs[k][t])
                << ',' << fmt_double(cp.mean_norm[k][t]) << ',' << fmt_double(cp.mean_res[k][t]) << '\n';
    }
}

inline void write_error_groups_csv(const ErrorGroupProfiles& eg, const std::string& path) {
    auto out = open_output(path);
    out << "group,hour_of_week,mean_residual,count\n";
    const char* names[3] = {"I", "II", "III"};
    for (int g = 0; g < 3; ++g) {
        if (!eg.has_profile[g]) {
            out << names[g] << ",,," << eg.count[g] << '\n';
            continue;
        }
        for (int t = 0; t < kHoursPerWeek; ++t)
            out << names[g] << ',' << t << ',' << fmt_double(eg.mean_residual[g][t]) << ',' << eg.count[g]
                << '\n';
    }
}

/// Table-style human-readable report (total accuracy, shares, vote
/// thresholds, confusion matrix).
inline std::string format_report_text(const ConfusionReport& rep) {
    std::ostringstream out;
    out << "Total Accuracy: " << fmt_double(rep.total_accuracy) << "\n\n";
    auto abbrev = [](LandUseClass c) {
        switch (c) {
            case LandUseClass::Residential: return "Res";
            case LandUseClass::Commercial: return "Com";
            case LandUseClass::Industrial: return "Ind";
            case LandUseClass::Parks: return "Prk";
            case LandUseClass::Other: return "Oth";
        }
        return "?";
    };
    char buf[32];
    out << "             ";
    for (auto c : rep.classes) {
        std::snprintf(buf, sizeof(buf), "%8s", abbrev(c));
        out << buf;
    }
    out << "\nLand Share:  ";
    for (double s : rep.land_share) {
        std::snprintf(buf, sizeof(buf), "%8.2f", s);
        out << buf;
    }
    if (!rep.vote_thresholds.empty()) {
        out << "\nVote Thresh: ";
        for (double v : rep.vote_thresholds) {
            std::snprintf(buf, sizeof(buf), "%8.2f", v);
            out << buf;
        }
    }
    out << "\n\nConfusion Matrix\n";
    for (std::size_t i = 0; i < rep.classes.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%-4s", abbrev(rep.classes[i]));
        out << buf;
        for (std::size_t j = 0; j < rep.classes.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%8.2f", rep.fractions[i][j]);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace landuse::io
