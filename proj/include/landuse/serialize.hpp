#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "landuse/activity.hpp"
#include "landuse/errors.hpp"
#include "landuse/evaluate.hpp"
#include "landuse/forest.hpp"
#include "landuse/grid.hpp"
#include "landuse/io.hpp"
#include "landuse/timeutil.hpp"

namespace landuse::io {

using nlohmann::json;

inline json grid_spec_to_json(const GridSpec& spec) {
    return json{{"origin_x", spec.origin_x},
                {"origin_y", spec.origin_y},
                {"cell_size", spec.cell_size},
                {"n_rows", spec.n_rows},
                {"n_cols", spec.n_cols}};
}

inline GridSpec grid_spec_from_json(const json& j) {
    GridSpec spec;
    spec.origin_x = j.at("origin_x").get<double>();
    spec.origin_y = j.at("origin_y").get<double>();
    spec.cell_size = j.at("cell_size").get<double>();
    spec.n_rows = j.at("n_rows").get<int>();
    spec.n_cols = j.at("n_cols").get<int>();
    spec.validate();
    return spec;
}

inline json load_json(const std::string& path) {
    auto in = open_input(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError(path + ": bad JSON: " + e.what());
    }
    return j;
}

inline void save_json(const json& j, const std::string& path) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

// ---- ActivityCube sidecar --------------------------------------------------

/// Metadata needed to reload a cube CSV: window, observed day counts, grid
/// spec, and per-cell totals (for the activity threshold).
inline void write_cube_sidecar(const ActivityCube& cube, const std::string& path) {
    json j;
    j["grid"] = grid_spec_to_json(cube.spec);
    j["window_start"] = format_date(cube.window.start);
    j["window_end"] = format_date(cube.window.end);
    j["observed_days"] = cube.observed_days;
    json totals = json::array();
    for (std::size_t cell = 0; cell < cube.total_events.size(); ++cell)
        if (cube.total_events[cell] != 0) {
            auto [i, j2] = cube.spec.unflat(cell);
            totals.push_back(json::array({i, j2, cube.total_events[cell]}));
        }
    j["total_events"] = std::move(totals);
    save_json(j, path);
}

inline ActivityCube read_cube(const std::string& csv_path, const std::string& sidecar_path) {
    json meta = load_json(sidecar_path);
    ActivityCube cube;
    cube.spec = grid_spec_from_json(meta.at("grid"));
    auto start = parse_date(meta.at("window_start").get<std::string>());
    auto end = parse_date(meta.at("window_end").get<std::string>());
    if (!start || !end) throw InputError(sidecar_path + ": bad window dates");
    cube.window = DateRange{*start, *end};
    auto obs = meta.at("observed_days");
    for (int d = 0; d < 7; ++d) cube.observed_days[d] = obs.at(d).get<std::int64_t>();
    cube.avg.assign(cube.spec.n_cells() * kHoursPerWeek, 0.0);
    cube.total_events.assign(cube.spec.n_cells(), 0);
    for (const auto& row : meta.at("total_events"))
        cube.total_events[cube.spec.flat(row.at(0).get<int>(), row.at(1).get<int>())] =
            row.at(2).get<std::int64_t>();

    auto in = open_input(csv_path);
    std::string line;
    std::vector<std::string_view> cols;
    if (!std::getline(in, line) || line.rfind("row,col,day,hour,avg_count", 0) != 0)
        throw InputError(csv_path + ": expected header row,col,day,hour,avg_count");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        split_csv_line(line, cols);
        if (cols.size() != 5) throw InputError(csv_path + ": malformed cube row");
        int i = static_cast<int>(parse_long(cols[0])), j = static_cast<int>(parse_long(cols[1]));
        int day = static_cast<int>(parse_long(cols[2])), hour = static_cast<int>(parse_long(cols[3]));
        if (!cube.spec.in_bounds(i, j) || day < 0 || day > 6 || hour < 0 || hour > 23)
            throw InputError(csv_path + ": cube row out of range");
        cube.at(cube.spec.flat(i, j), day * 24 + hour) = parse_double(cols[4]);
    }
    return cube;
}

// ---- Forest artifact ---------------------------------------------------------

inline constexpr int kForestSchemaVersion = 1;

/// Versioned JSON forest artifact: preorder node arrays plus config and
/// seeds. Thresholds round-trip exactly (shortest-form doubles).
inline json forest_to_json(const Forest& forest) {
    json j;
    j["schema_version"] = kForestSchemaVersion;
    j["n_features"] = forest.n_features;
    j["mtry"] = forest.mtry;
    j["min_leaf"] = forest.min_leaf;
    j["bootstrap"] = forest.bootstrap;
    j["master_seed"] = forest.master_seed;
    j["weights"] = forest.weights;
    json trees = json::array();
    for (const Tree& t : forest.trees) {
        json jt;
        jt["seed"] = t.seed;
        json feature = json::array(), threshold = json::array(), left = json::array(),
             right = json::array(), counts = json::array();
        for (const TreeNode& n : t.nodes) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            if (n.is_leaf()) counts.push_back(n.counts);
        }
        jt["feature"] = std::move(feature);
        jt["threshold"] = std::move(threshold);
        jt["left"] = std::move(left);
        jt["right"] = std::move(right);
        jt["leaf_counts"] = std::move(counts);
        trees.push_back(std::move(jt));
    }
    j["trees"] = std::move(trees);
    return j;
}

inline Forest forest_from_json(const json& j) {
    if (j.at("schema_version").get<int>() != kForestSchemaVersion)
        throw InputError("unsupported forest schema version");
    Forest forest;
    forest.n_features = j.at("n_features").get<int>();
    forest.mtry = j.at("mtry").get<int>();
    forest.min_leaf = j.at("min_leaf").get<int>();
    forest.bootstrap = j.at("bootstrap").get<bool>();
    forest.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (int k = 0; k < kNumClasses; ++k) forest.weights[k] = j.at("weights").at(k).get<double>();
    for (const auto& jt : j.at("trees")) {
        Tree t;
        t.seed = jt.at("seed").get<std::uint64_t>();
        const auto& feature = jt.at("feature");
        const auto& threshold = jt.at("threshold");
        const auto& left = jt.at("left");
        const auto& right = jt.at("right");
        const auto& counts = jt.at("leaf_counts");
        std::size_t leaf_i = 0;
        for (std::size_t n = 0; n < feature.size(); ++n) {
            TreeNode node;
            node.feature = feature.at(n).get<std::int16_t>();
            node.threshold = threshold.at(n).get<double>();
            node.left = left.at(n).get<std::int32_t>();
            node.right = right.at(n).get<std::int32_t>();
            if (node.is_leaf())
                for (int k = 0; k < kNumClasses; ++k)
                    node.counts[k] = counts.at(leaf_i).at(k).get<std::uint32_t>();
            leaf_i += node.is_leaf();
            t.nodes.push_back(node);
        }
        forest.trees.push_back(std::move(t));
    }
    return forest;
}

// ---- report JSON --------------------------------------------------------------

inline json report_to_json(const ConfusionReport& rep) {
    json j;
    j["total_accuracy"] = rep.total_accuracy;
    j["evaluated_cells"] = rep.evaluated_cells;
    json classes = json::array();
    for (auto c : rep.classes) classes.push_back(class_name(c));
    j["classes"] = std::move(classes);
    j["land_share"] = rep.land_share;
    j["vote_thresholds"] = rep.vote_thresholds;
    j["confusion_counts"] = rep.counts;
    j["confusion_fractions"] = rep.fractions;
    return j;
}

}  // namespace landuse::io
