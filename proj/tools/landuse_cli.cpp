// Batch pipeline driver: grid rasterization, event ingestion, featurization,
// forest training with vote-weight tuning, spatial smoothing, evaluation, and
// the synthetic-city generator. Subcommands wire file artifacts between
// stages; every output gets a reproducibility manifest.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "landuse/config.hpp"
#include "landuse/evaluate.hpp"
#include "landuse/forest.hpp"
#include "landuse/geojson.hpp"
#include "landuse/io.hpp"
#include "landuse/log.hpp"
#include "landuse/manifest.hpp"
#include "landuse/postprocess.hpp"
#include "landuse/rasterize.hpp"
#include "landuse/serialize.hpp"
#include "landuse/signal.hpp"
#include "landuse/synthcity.hpp"

namespace {

using namespace landuse;
using landuse::io::json;

json config_json(const ConfigMap& cfg) {
    json j = json::object();
    for (const auto& [k, v] : cfg.values()) j[k] = v;
    return j;
}

void run_rasterize(const PipelineConfig& pc, const ConfigMap& cfg) {
    auto polygons = io::load_zoning_geojson(pc.path_zoning_geojson);
    ZoningGrid zg = rasterize_zoning(polygons, pc.grid, pc.raster_min_coverage);
    io::write_zoning_csv(zg, pc.path_zoning_grid);
    io::write_manifest(pc.path_zoning_grid, "rasterize", {pc.path_zoning_geojson}, config_json(cfg),
                       pc.master_seed);
    auto shares = class_shares(zg);
    log::info("rasterize: labeled " + std::to_string(shares.labeled) + " of " +
              std::to_string(pc.grid.n_cells()) + " cells");
}

void run_synth(const PipelineConfig& pc, const ConfigMap& cfg) {
    ZoningGrid zg = generate_layout(pc.synth);
    io::write_zoning_csv(zg, pc.path_zoning_grid);
    io::write_manifest(pc.path_zoning_grid, "synth", {}, config_json(cfg), pc.master_seed);

    io::MaybeGzWriter events(pc.path_events);
    events.write("timestamp,x,y\n");
    std::int64_t n_events = 0;
    generate_events(zg, pc.synth, [&](const ActivityEvent& ev) {
        io::write_event_csv(events, ev);
        ++n_events;
    });
    io::write_manifest(pc.path_events, "synth", {pc.path_zoning_grid}, config_json(cfg), pc.master_seed);

    json manifest;
    manifest["grid"] = io::grid_spec_to_json(pc.grid);
    manifest["shares"] = pc.synth.shares;
    manifest["patch_size"] = pc.synth.patch_size;
    manifest["base_rate"] = pc.synth.base_rate;
    manifest["gradient"] = pc.synth.gradient;
    manifest["noise"] = pc.synth.noise;
    manifest["seed"] = pc.synth.seed;
    manifest["window_start"] = format_date(pc.synth.window_start);
    manifest["window_weeks"] = pc.synth.window_weeks;
    manifest["n_events"] = n_events;
    io::save_json(manifest, pc.path_synth_manifest);
    log::info("synth: wrote " + std::to_string(n_events) + " events");
}

void run_ingest(const PipelineConfig& pc, const ConfigMap& cfg) {
    CubeAccumulator acc(pc.grid, pc.window);
    io::ingest_event_csv(pc.path_events, acc);
    ActivityCube cube = acc.finalize();
    const auto& st = acc.stats();
    log::info("ingest: " + std::to_string(st.in_window) + " events binned, " +
              std::to_string(st.outside_grid) + " outside grid, " + std::to_string(st.outside_window) +
              " outside window, " + std::to_string(st.skipped_rows) + " skipped rows");
    io::write_cube_csv(cube, pc.path_cube);
    io::write_cube_sidecar(cube, pc.path_cube_meta);
    io::write_manifest(pc.path_cube, "ingest", {pc.path_events}, config_json(cfg), pc.master_seed);
}

void run_features(const PipelineConfig& pc, const ConfigMap& cfg) {
    ActivityCube cube = io::read_cube(pc.path_cube, pc.path_cube_meta);
    ZoningGrid zg = io::read_zoning_csv(pc.path_zoning_grid, cube.spec);
    auto active = apply_activity_threshold(cube, pc.ingest_min_total_events);

    // Cells with activity but no zoning label carry no ground truth; keep the
    // classified set equal to the labeled active set.
    std::vector<std::uint32_t> labeled_active;
    for (std::uint32_t cell : active)
        if (zg.label_flat(cell)) labeled_active.push_back(cell);
    if (labeled_active.size() != active.size())
        log::warn("features: dropped " + std::to_string(active.size() - labeled_active.size()) +
                  " active cell(s) without zoning label");

    NormalizedSeries ns = zscore(cube, labeled_active);
    ResidualSeries rs = residual(ns);
    FeatureMatrix fm = build_features(cube, rs);
    io::write_features_csv(fm, pc.path_features);
    io::write_residuals_csv(rs, pc.path_residuals);
    ClassProfiles cp = class_average_profiles(cube, ns, rs, zg);
    io::write_class_profiles_csv(cp, pc.path_profiles);
    io::write_manifest(pc.path_features, "features",
                       {pc.path_cube, pc.path_cube_meta, pc.path_zoning_grid}, config_json(cfg),
                       pc.master_seed);
    log::info("features: " + std::to_string(fm.n_rows()) + " active cells featurized");
}

void run_train(const PipelineConfig& pc, const ConfigMap& cfg) {
    ZoningGrid zg(pc.grid);
    FeatureMatrix fm = io::read_features_csv(pc.path_features, pc.grid);
    zg = io::read_zoning_csv(pc.path_zoning_grid, pc.grid);

    ForestConfig fcfg = pc.forest;
    CvResult cv;
    double tuned_objective = 0.0;
    if (pc.tune_enabled) {
        TuneResult tuned = tune_weights(fm, zg, fcfg, pc.weight_grid, pc.threads);
        fcfg.weights = tuned.weights;
        tuned_objective = tuned.objective;
        cv = std::move(tuned.cv);
    } else {
        cv = cross_validate(fm, zg, fcfg, pc.threads);
        auto y = labels_or_throw(fm, zg);
        std::vector<std::uint8_t> pred(y.size());
        for (std::size_t r = 0; r < y.size(); ++r) pred[r] = reweighted_argmax(cv.tallies[r], fcfg.weights);
        tuned_objective = macro_recall(y, pred, pc.weight_grid.objective);
    }

    // Pooled out-of-fold predictions under the final weights.
    PredictionGrid raw(pc.grid);
    for (std::size_t r = 0; r < fm.n_rows(); ++r)
        raw.codes[fm.active[r]] = reweighted_argmax(cv.tallies[r], fcfg.weights);
    io::write_predictions_csv(raw, pc.path_predictions_raw);

    Forest forest = train_forest(fm, zg, fcfg, pc.threads);
    io::save_json(io::forest_to_json(forest), pc.path_forest);

    json weights;
    weights["weights"] = fcfg.weights;
    std::vector<double> thresholds;
    for (double w : fcfg.weights) thresholds.push_back(1.0 / w);
    weights["vote_thresholds"] = thresholds;
    weights["objective"] = tuned_objective;
    io::save_json(weights, pc.path_weights);

    io::write_manifest(pc.path_forest, "train", {pc.path_features, pc.path_zoning_grid},
                       config_json(cfg), pc.master_seed);
    io::write_manifest(pc.path_predictions_raw, "train", {pc.path_features, pc.path_zoning_grid},
                       config_json(cfg), pc.master_seed);
    log::info("train: objective " + io::fmt_double(tuned_objective));
}

void run_predict(const PipelineConfig& pc, const ConfigMap& cfg) {
    Forest forest = io::forest_from_json(io::load_json(pc.path_forest));
    FeatureMatrix fm = io::read_features_csv(pc.path_features, pc.grid);
    PredictionGrid raw(pc.grid);
    for (std::size_t r = 0; r < fm.n_rows(); ++r) {
        auto [cls, tally] = predict(forest, fm.row(r), kNumFeatures);
        raw.codes[fm.active[r]] = static_cast<std::uint8_t>(class_code(cls));
    }
    io::write_predictions_csv(raw, pc.path_predictions_raw);
    io::write_manifest(pc.path_predictions_raw, "predict", {pc.path_forest, pc.path_features},
                       config_json(cfg), pc.master_seed);
}

void run_smooth(const PipelineConfig& pc, const ConfigMap& cfg) {
    PredictionGrid raw = io::read_predictions_csv(pc.path_predictions_raw, pc.grid);
    PredictionGrid smoothed = pc.smooth_to_fixpoint ? second_pass_to_fixpoint(raw) : second_pass(raw);
    io::write_predictions_csv(smoothed, pc.path_predictions);
    io::write_manifest(pc.path_predictions, "smooth", {pc.path_predictions_raw}, config_json(cfg),
                       pc.master_seed);
}

void run_evaluate(const PipelineConfig& pc, const ConfigMap& cfg) {
    ZoningGrid truth = io::read_zoning_csv(pc.path_zoning_grid, pc.grid);
    PredictionGrid pred = io::read_predictions_csv(pc.path_predictions, pc.grid);

    std::vector<double> thresholds;
    if (std::filesystem::exists(pc.path_weights)) {
        json w = io::load_json(pc.path_weights);
        for (const auto& v : w.at("vote_thresholds")) thresholds.push_back(v.get<double>());
    }
    ConfusionReport rep = confusion(truth, pred, pc.eval_classes, thresholds);

    json report = io::report_to_json(rep);
    report["naive_residential_baseline"] = naive_baseline(truth, pred.active_cells());
    io::save_json(report, pc.path_report_json);
    {
        auto out = io::open_output(pc.path_report_txt);
        out << io::format_report_text(rep);
    }

    ResidualSeries rs = io::read_residuals_csv(pc.path_residuals, pc.grid);
    for (LandUseClass focal : pc.focal_classes) {
        ErrorGroupProfiles eg = error_groups(truth, pred, rs, focal);
        std::string path = pc.path_error_groups_prefix + "_" + class_name(focal) + ".csv";
        io::write_error_groups_csv(eg, path);
    }
    io::write_manifest(pc.path_report_json, "evaluate",
                       {pc.path_zoning_grid, pc.path_predictions, pc.path_residuals}, config_json(cfg),
                       pc.master_seed);
    std::printf("total_accuracy %s\n", io::fmt_double(rep.total_accuracy).c_str());
}

void run_pipeline(const PipelineConfig& pc, const ConfigMap& cfg) {
    run_ingest(pc, cfg);
    run_features(pc, cfg);
    run_train(pc, cfg);
    run_smooth(pc, cfg);
    run_evaluate(pc, cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"land-use inference pipeline over gridded mobile-phone activity"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    long seed = -1;
    long threads = -1;
    bool verbose = false;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--set", overrides, "override a config key, e.g. --set forest.n_trees=50");
    app.add_option("--seed", seed, "master seed (overrides config)");
    app.add_option("--threads", threads, "worker threads, 0 = auto (overrides config)");
    app.add_flag("--verbose", verbose, "log progress to stderr");

    const char* names[] = {"rasterize", "ingest", "features", "train", "predict",
                           "smooth", "evaluate", "synth", "pipeline"};
    const char* descs[] = {"rasterize zoning polygons onto the grid",
                           "bin events into average hourly profiles",
                           "normalize, de-mean, and build feature vectors",
                           "tune weights and train the forest (writes out-of-fold predictions)",
                           "apply a saved forest to a feature matrix",
                           "neighbor-majority second pass",
                           "confusion report and error-group profiles",
                           "generate a synthetic city (layout + events)",
                           "run ingest through evaluate"};
    // Global flags are accepted before or after the subcommand name.
    for (int i = 0; i < 9; ++i) app.add_subcommand(names[i], descs[i])->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints usage/help
        return code == 0 ? 0 : 1;
    }

    try {
        landuse::log::verbose() = verbose;
        ConfigMap cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const std::string& kv : overrides) {
            std::size_t eq = kv.find('=');
            if (eq == std::string::npos) throw landuse::ConfigError("--set expects key=value, got " + kv);
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed >= 0) cfg.set("seed", std::to_string(seed));
        if (threads >= 0) cfg.set("threads", std::to_string(threads));
        PipelineConfig pc = PipelineConfig::from_map(cfg);

        std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "rasterize") run_rasterize(pc, cfg);
        else if (sub == "ingest") run_ingest(pc, cfg);
        else if (sub == "features") run_features(pc, cfg);
        else if (sub == "train") run_train(pc, cfg);
        else if (sub == "predict") run_predict(pc, cfg);
        else if (sub == "smooth") run_smooth(pc, cfg);
        else if (sub == "evaluate") run_evaluate(pc, cfg);
        else if (sub == "synth") run_synth(pc, cfg);
        else if (sub == "pipeline") run_pipeline(pc, cfg);
        return 0;
    } catch (const landuse::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 3;
    } catch (const landuse::InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const landuse::ConsistencyError& e) {
        std::fprintf(stderr, "consistency error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
