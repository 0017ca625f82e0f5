#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "landuse/errors.hpp"
#include "landuse/forest.hpp"
#include "landuse/grid.hpp"
#include "landuse/io.hpp"
#include "landuse/synthcity.hpp"
#include "landuse/timeutil.hpp"

namespace landuse {

/// Flat key=value configuration: `section.key = value`, '#' comments.
/// Command-line flags override file values key by key.
class ConfigMap {
  public:
    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InputError("missing config file: " + path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
            std::string key = trim(t.substr(0, eq));
            std::string value = trim(t.substr(eq + 1));
            if (key.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
            values_[key] = value;
        }
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return io::parse_double(it->second);
        } catch (const InputError&) {
            throw ConfigError("config key " + key + ": expected a number, got \"" + it->second + "\"");
        }
    }

    long get_long(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return io::parse_long(it->second);
        } catch (const InputError&) {
            throw ConfigError("config key " + key + ": expected an integer, got \"" + it->second + "\"");
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("config key " + key + ": expected true/false, got \"" + it->second + "\"");
    }

    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            try {
                out.push_back(io::parse_double(tok));
            } catch (const InputError&) {
                throw ConfigError("config key " + key + ": bad list element \"" + tok + "\"");
            }
        }
        return out;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

  private:
    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

/// Everything the pipeline stages need, resolved from a ConfigMap with
/// defaults. Field diagnostics come out as ConfigError.
struct PipelineConfig {
    GridSpec grid;
    double raster_min_coverage = 0.0;
    long ingest_min_total_events = 50;
    DateRange window{{2012, 8, 6}, {2012, 8, 27}};
    ForestConfig forest;
    WeightGrid weight_grid;
    bool tune_enabled = true;
    bool smooth_to_fixpoint = false;
    std::vector<LandUseClass> eval_classes = {LandUseClass::Residential, LandUseClass::Commercial,
                                              LandUseClass::Industrial, LandUseClass::Parks,
                                              LandUseClass::Other};
    std::vector<LandUseClass> focal_classes = {LandUseClass::Residential};
    SynthConfig synth;
    std::uint64_t master_seed = 1;
    int threads = 0;

    // Artifact paths, stage inputs/outputs.
    std::string path_zoning_geojson, path_events, path_zoning_grid, path_cube, path_cube_meta,
        path_features, path_residuals, path_profiles, path_forest, path_weights,
        path_predictions_raw, path_predictions, path_report_json, path_report_txt,
        path_error_groups_prefix, path_synth_manifest;

    static PipelineConfig from_map(const ConfigMap& cfg) {
        PipelineConfig pc;
        pc.grid.origin_x = cfg.get_double("grid.origin_x", 0.0);
        pc.grid.origin_y = cfg.get_double("grid.origin_y", 0.0);
        pc.grid.cell_size = cfg.get_double("grid.cell_size", 200.0);
        pc.grid.n_rows = static_cast<int>(cfg.get_long("grid.n_rows", 100));
        pc.grid.n_cols = static_cast<int>(cfg.get_long("grid.n_cols", 100));
        pc.grid.validate();

        pc.raster_min_coverage = cfg.get_double("raster.min_coverage", 0.0);
        if (pc.raster_min_coverage < 0.0 || pc.raster_min_coverage > 1.0)
            throw ConfigError("raster.min_coverage must be in [0,1]");

        pc.ingest_min_total_events = cfg.get_long("ingest.min_total_events", 50);
        if (pc.ingest_min_total_events < 0) throw ConfigError("ingest.min_total_events must be >= 0");

        auto start = parse_date(cfg.get("ingest.window_start", "2012-08-06"));
        auto end = parse_date(cfg.get("ingest.window_end", "2012-08-27"));
        if (!start) throw ConfigError("ingest.window_start: expected YYYY-MM-DD");
        if (!end) throw ConfigError("ingest.window_end: expected YYYY-MM-DD");
        pc.window = DateRange{*start, *end};
        if (pc.window.n_days() < 7) throw ConfigError("ingest window must span >= 7 calendar days");

        pc.master_seed = static_cast<std::uint64_t>(cfg.get_long("seed", 1));
        pc.threads = static_cast<int>(cfg.get_long("threads", 0));

        pc.forest.n_trees = static_cast<int>(cfg.get_long("forest.n_trees", 500));
        pc.forest.mtry = static_cast<int>(cfg.get_long("forest.mtry", 7));
        pc.forest.min_leaf = static_cast<int>(cfg.get_long("forest.min_leaf", 5));
        pc.forest.k_folds = static_cast<int>(cfg.get_long("forest.k_folds", 5));
        pc.forest.bootstrap = cfg.get_bool("forest.bootstrap", true);
        pc.forest.master_seed = pc.master_seed;
        auto w = cfg.get_double_list("forest.weights", {1, 1, 1, 1, 1});
        if (w.size() != kNumClasses) throw ConfigError("forest.weights needs exactly 5 entries");
        for (int k = 0; k < kNumClasses; ++k) pc.forest.weights[k] = w[k];
        pc.forest.validate();

        pc.tune_enabled = cfg.get_bool("tune.enabled", true);
        const char* cand_keys[kNumClasses] = {"tune.candidates.residential", "tune.candidates.commercial",
                                              "tune.candidates.industrial", "tune.candidates.parks",
                                              "tune.candidates.other"};
        std::vector<double> default_res = {1.0};
        std::vector<double> default_minor = {1.0, 2.0, 10.0 / 3.0, 10.0};
        for (int k = 0; k < kNumClasses; ++k)
            pc.weight_grid.candidates[k] =
                cfg.get_double_list(cand_keys[k], k == 0 ? default_res : default_minor);
        std::string obj = cfg.get("tune.objective", "nonres_macro_recall");
        if (obj == "nonres_macro_recall")
            pc.weight_grid.objective = WeightObjective::NonResidentialMacroRecall;
        else if (obj == "macro_recall")
            pc.weight_grid.objective = WeightObjective::MacroRecall;
        else
            throw ConfigError("tune.objective must be nonres_macro_recall or macro_recall");

        pc.smooth_to_fixpoint = cfg.get_bool("smooth.iterate_to_fixpoint", false);

        auto parse_classes = [&](const std::string& key, const std::vector<LandUseClass>& fallback) {
            if (!cfg.has(key)) return fallback;
            std::vector<LandUseClass> out;
            for (double v : cfg.get_double_list(key, {})) out.push_back(class_from_code(static_cast<int>(v)));
            if (out.empty()) throw ConfigError(key + " must name at least one class");
            return out;
        };
        try {
            pc.eval_classes = parse_classes("evaluate.class_subset", pc.eval_classes);
            pc.focal_classes = parse_classes("evaluate.focal_classes", pc.focal_classes);
        } catch (const InputError& e) {
            throw ConfigError(e.what());
        }

        pc.synth.n_rows = pc.grid.n_rows;
        pc.synth.n_cols = pc.grid.n_cols;
        pc.synth.origin_x = pc.grid.origin_x;
        pc.synth.origin_y = pc.grid.origin_y;
        pc.synth.cell_size = pc.grid.cell_size;
        pc.synth.seed = pc.master_seed;
        pc.synth.window_start = pc.window.start;
        pc.synth.window_weeks = static_cast<int>(pc.window.n_days() / 7);
        pc.synth.patch_size = cfg.get_double("synth.patch_size", 25.0);
        pc.synth.base_rate = cfg.get_double("synth.base_rate", 4.0);
        pc.synth.profiles = default_profiles(pc.synth.base_rate);
        pc.synth.gradient = cfg.get_double("synth.gradient", 2.0);
        pc.synth.noise = cfg.get_double("synth.noise", 1.0);
        auto shares = cfg.get_double_list("synth.shares", {});
        if (!shares.empty()) {
            if (shares.size() != kNumClasses) throw ConfigError("synth.shares needs exactly 5 entries");
            for (int k = 0; k < kNumClasses; ++k) pc.synth.shares[k] = shares[k];
        }
        pc.synth.validate();

        std::string dir = cfg.get("paths.dir", ".");
        auto path = [&](const std::string& key, const std::string& def) {
            std::string p = cfg.get(key, def);
            return p.empty() || p[0] == '/' ? p : dir + "/" + p;
        };
        pc.path_zoning_geojson = path("paths.zoning_geojson", "zoning.geojson");
        pc.path_events = path("paths.events", "events.csv");
        pc.path_zoning_grid = path("paths.zoning_grid", "zoning_grid.csv");
        pc.path_cube = path("paths.cube", "cube.csv");
        pc.path_cube_meta = path("paths.cube_meta", "cube.meta.json");
        pc.path_features = path("paths.features", "features.csv");
        pc.path_residuals = path("paths.residuals", "residuals.csv");
        pc.path_profiles = path("paths.profiles", "class_profiles.csv");
        pc.path_forest = path("paths.forest", "forest.json");
        pc.path_weights = path("paths.weights", "weights.json");
        pc.path_predictions_raw = path("paths.predictions_raw", "predictions_raw.csv");
        pc.path_predictions = path("paths.predictions", "predictions.csv");
        pc.path_report_json = path("paths.report_json", "report.json");
        pc.path_report_txt = path("paths.report_txt", "report.txt");
        pc.path_error_groups_prefix = path("paths.error_groups_prefix", "error_groups");
        pc.path_synth_manifest = path("paths.synth_manifest", "synth_manifest.json");
        return pc;
    }
};

}  // namespace landuse
