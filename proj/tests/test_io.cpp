#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "landuse/config.hpp"
#include "landuse/geojson.hpp"
#include "landuse/io.hpp"
#include "landuse/manifest.hpp"
#include "landuse/rng.hpp"
#include "landuse/serialize.hpp"
#include "landuse/synthcity.hpp"

using namespace landuse;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "landuse_io_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string tmp(const std::string& name) { return (temp_dir() / name).string(); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("doubles round-trip through their shortest decimal form") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12, 12));
        CHECK(io::parse_double(io::fmt_double(v)) == v);
    }
    CHECK(io::fmt_double(0.1) == "0.1");
    CHECK_THROWS_AS(io::parse_double("1.5x"), InputError);
    CHECK_THROWS_AS(io::parse_long("12.5"), InputError);
}

TEST_CASE("zoning grid CSV round trip") {
    GridSpec spec{0, 0, 200, 3, 4};
    ZoningGrid zg(spec);
    zg.set_label(0, 0, LandUseClass::Residential);
    zg.set_label(1, 2, LandUseClass::Parks);
    zg.set_label(2, 3, LandUseClass::Other);
    auto path = tmp("zoning.csv");
    io::write_zoning_csv(zg, path);
    auto back = io::read_zoning_csv(path, spec);
    for (int i = 0; i < spec.n_rows; ++i)
        for (int j = 0; j < spec.n_cols; ++j) CHECK(back.label(i, j) == zg.label(i, j));
}

TEST_CASE("zoning CSV rejects bad headers and out-of-grid cells") {
    auto path = tmp("bad_zoning.csv");
    write_text(path, "x,y,code\n0,0,1\n");
    GridSpec spec{0, 0, 200, 2, 2};
    CHECK_THROWS_AS(io::read_zoning_csv(path, spec), InputError);
    write_text(path, "row,col,land_use_code\n5,0,1\n");
    CHECK_THROWS_AS(io::read_zoning_csv(path, spec), InputError);
    CHECK_THROWS_AS(io::read_zoning_csv(tmp("nonexistent.csv"), spec), InputError);
}

TEST_CASE("prediction grid CSV round trip keeps provenance") {
    GridSpec spec{0, 0, 200, 2, 2};
    PredictionGrid pg(spec);
    pg.codes = {1, 0, 2, 5};
    pg.provenance = Provenance::Smoothed;
    auto path = tmp("pred.csv");
    io::write_predictions_csv(pg, path);
    auto back = io::read_predictions_csv(path, spec);
    CHECK(back.codes == pg.codes);
    CHECK(back.provenance == Provenance::Smoothed);
}

TEST_CASE("event CSV round trips through gzip") {
    SynthConfig cfg;
    cfg.n_rows = 4;
    cfg.n_cols = 4;
    cfg.patch_size = 4;
    cfg.window_weeks = 1;
    cfg.seed = 11;
    auto zg = generate_layout(cfg);

    auto path = tmp("events.csv.gz");
    {
        io::MaybeGzWriter out(path);
        out.write("timestamp,x,y\n");
        generate_events(zg, cfg, [&](const ActivityEvent& ev) { io::write_event_csv(out, ev); });
    }
    // The file is really gzip (magic bytes), not plain text.
    {
        std::ifstream raw(path, std::ios::binary);
        unsigned char magic[2];
        raw.read(reinterpret_cast<char*>(magic), 2);
        CHECK(magic[0] == 0x1f);
        CHECK(magic[1] == 0x8b);
    }

    CubeAccumulator direct(cfg.grid(), cfg.window());
    generate_events(zg, cfg, [&](const ActivityEvent& ev) { direct.add(ev); });
    auto want = direct.finalize();

    CubeAccumulator via_file(cfg.grid(), cfg.window());
    io::ingest_event_csv(path, via_file);
    auto got = via_file.finalize();

    CHECK(got.total_events == want.total_events);
    for (std::size_t i = 0; i < want.avg.size(); ++i) CHECK(got.avg[i] == Catch::Approx(want.avg[i]));
    CHECK(via_file.stats().skipped_rows == 0);
}

TEST_CASE("plain-text event CSV reads through the same path") {
    auto path = tmp("events_plain.csv");
    write_text(path,
               "timestamp,x,y\n"
               "2012-08-06T10:30:00Z,50,50\n"
               "2012-08-07T23:59:59+00:00,250,150\n");
    GridSpec spec{0, 0, 200, 2, 2};
    CubeAccumulator acc(spec, DateRange{{2012, 8, 6}, {2012, 8, 13}});
    io::ingest_event_csv(path, acc);
    auto cube = acc.finalize();
    CHECK(cube.total_events[spec.flat(0, 0)] == 1);
    CHECK(cube.total_events[spec.flat(0, 1)] == 1);
}

TEST_CASE("malformed rows are skipped until the 1% threshold aborts") {
    GridSpec spec{0, 0, 200, 2, 2};
    DateRange window{{2012, 8, 6}, {2012, 8, 13}};

    // 1 bad row among 300: under 1%, survives with a counted skip.
    std::string ok = "timestamp,x,y\n";
    for (int i = 0; i < 299; ++i) ok += "2012-08-06T10:30:00Z,50,50\n";
    ok += "not-a-timestamp,50,50\n";
    auto good_path = tmp("mostly_good.csv");
    write_text(good_path, ok);
    CubeAccumulator acc(spec, window);
    io::ingest_event_csv(good_path, acc);
    auto cube = acc.finalize();
    CHECK(acc.stats().skipped_rows == 1);
    CHECK(cube.total_events[spec.flat(0, 0)] == 299);

    // 5 bad rows among 100: finalize aborts.
    std::string bad = "timestamp,x,y\n";
    for (int i = 0; i < 95; ++i) bad += "2012-08-06T10:30:00Z,50,50\n";
    for (int i = 0; i < 5; ++i) bad += "garbage,row,here,extra\n";
    auto bad_path = tmp("too_bad.csv");
    write_text(bad_path, bad);
    CubeAccumulator acc2(spec, window);
    io::ingest_event_csv(bad_path, acc2);
    CHECK_THROWS_AS(acc2.finalize(), InputError);
}

TEST_CASE("cube CSV plus sidecar round trip") {
    SynthConfig cfg;
    cfg.n_rows = 3;
    cfg.n_cols = 3;
    cfg.patch_size = 3;
    cfg.window_weeks = 2;
    auto zg = generate_layout(cfg);
    CubeAccumulator acc(cfg.grid(), cfg.window());
    generate_events(zg, cfg, [&](const ActivityEvent& ev) { acc.add(ev); });
    auto cube = acc.finalize();

    auto csv = tmp("cube.csv");
    auto meta = tmp("cube.meta.json");
    io::write_cube_csv(cube, csv);
    io::write_cube_sidecar(cube, meta);
    auto back = io::read_cube(csv, meta);

    CHECK(back.spec == cube.spec);
    CHECK(back.window.start == cube.window.start);
    CHECK(back.window.end == cube.window.end);
    CHECK(back.observed_days == cube.observed_days);
    CHECK(back.total_events == cube.total_events);
    for (std::size_t i = 0; i < cube.avg.size(); ++i) CHECK(back.avg[i] == cube.avg[i]);
}

TEST_CASE("feature matrix CSV round trip is exact") {
    GridSpec spec{0, 0, 200, 2, 3};
    FeatureMatrix fm;
    fm.spec = spec;
    Rng rng(4);
    for (std::uint32_t cell : {0u, 2u, 5u}) {
        fm.active.push_back(cell);
        for (int f = 0; f < kNumFeatures; ++f) fm.values.push_back(rng.uniform(-3, 3));
    }
    auto path = tmp("features.csv");
    io::write_features_csv(fm, path);
    auto back = io::read_features_csv(path, spec);
    CHECK(back.active == fm.active);
    CHECK(back.values == fm.values);  // bit-exact via shortest round-trip form
}

TEST_CASE("residual CSV round trip is exact") {
    GridSpec spec{0, 0, 200, 2, 2};
    ResidualSeries rs;
    rs.spec = spec;
    Rng rng(5);
    for (std::uint32_t cell : {1u, 3u}) {
        rs.active.push_back(cell);
        for (int t = 0; t < kHoursPerWeek; ++t) rs.values.push_back(rng.uniform(-2, 2));
    }
    auto path = tmp("residuals.csv");
    io::write_residuals_csv(rs, path);
    auto back = io::read_residuals_csv(path, spec);
    CHECK(back.active == rs.active);
    CHECK(back.values == rs.values);
}

TEST_CASE("report text holds the headline fields") {
    ZoningGrid truth(GridSpec{0, 0, 200, 1, 4});
    for (int j = 0; j < 4; ++j) truth.set_label(0, j, j < 3 ? LandUseClass::Residential : LandUseClass::Commercial);
    PredictionGrid pred(truth.spec());
    pred.codes = {1, 1, 2, 2};
    auto rep = confusion(truth, pred, {LandUseClass::Residential, LandUseClass::Commercial},
                         {0.6, 0.1});
    auto text = io::format_report_text(rep);
    CHECK(text.find("Total Accuracy: 0.75") != std::string::npos);
    CHECK(text.find("Land Share") != std::string::npos);
    CHECK(text.find("Vote Thresh") != std::string::npos);
    CHECK(text.find("Res") != std::string::npos);
    CHECK(text.find("Com") != std::string::npos);
    CHECK(text.find("0.67") != std::string::npos);  // Res->Res row fraction

    auto j = io::report_to_json(rep);
    CHECK(j["total_accuracy"].get<double>() == Catch::Approx(0.75));
    CHECK(j["classes"].size() == 2);
}

TEST_CASE("GeoJSON loads polygons, multipolygons, holes and class names") {
    auto path = tmp("zoning.geojson");
    write_text(path, R"({
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "properties": {"land_use": "residential"},
         "geometry": {"type": "Polygon", "coordinates": [
            [[0,0],[100,0],[100,100],[0,100],[0,0]],
            [[25,25],[75,25],[75,75],[25,75],[25,25]]]}},
        {"type": "Feature",
         "properties": {"land_use": 4},
         "geometry": {"type": "MultiPolygon", "coordinates": [
            [[[200,0],[300,0],[300,100],[200,100],[200,0]]],
            [[[400,0],[500,0],[500,100],[400,100],[400,0]]]]}}
      ]})");
    auto polys = io::load_zoning_geojson(path);
    REQUIRE(polys.size() == 3);
    CHECK(polys[0].land_use == LandUseClass::Residential);
    CHECK(polys[0].holes.size() == 1);
    CHECK(polys[1].land_use == LandUseClass::Parks);
    CHECK(polys[2].land_use == LandUseClass::Parks);
}

TEST_CASE("GeoJSON errors carry the feature index") {
    auto path = tmp("bad.geojson");
    write_text(path, R"({
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "properties": {"land_use": "parks"},
         "geometry": {"type": "Polygon", "coordinates": [
            [[0,0],[100,0],[100,100],[0,100],[0,0]]]}},
        {"type": "Feature",
         "properties": {"name": "missing land use"},
         "geometry": {"type": "Polygon", "coordinates": [
            [[0,0],[100,0],[100,100],[0,100],[0,0]]]}}
      ]})");
    try {
        io::load_zoning_geojson(path);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("feature 1") != std::string::npos);
    }
    write_text(path, R"({"type": "Point"})");
    CHECK_THROWS_AS(io::load_zoning_geojson(path), InputError);
}

TEST_CASE("config files parse key=value with comments and overrides") {
    auto path = tmp("run.cfg");
    write_text(path,
               "# comment\n"
               "grid.n_rows = 10\n"
               "grid.n_cols = 12\n"
               "forest.n_trees = 50\n"
               "tune.enabled = false\n"
               "forest.weights = 1, 2, 3, 4, 5\n");
    ConfigMap cfg;
    cfg.load_file(path);
    cfg.set("forest.n_trees", "75");  // command-line style override
    auto pc = PipelineConfig::from_map(cfg);
    CHECK(pc.grid.n_rows == 10);
    CHECK(pc.grid.n_cols == 12);
    CHECK(pc.forest.n_trees == 75);
    CHECK_FALSE(pc.tune_enabled);
    CHECK(pc.forest.weights == std::array<double, kNumClasses>{1, 2, 3, 4, 5});
    // Defaults fill the rest.
    CHECK(pc.forest.k_folds == 5);
    CHECK(pc.forest.mtry == 7);
    CHECK(pc.weight_grid.candidates[0] == std::vector<double>{1.0});
    CHECK(pc.weight_grid.candidates[1] == std::vector<double>{1.0, 2.0, 10.0 / 3.0, 10.0});
}

TEST_CASE("config diagnostics name the offending key") {
    ConfigMap cfg;
    cfg.set("forest.n_trees", "many");
    try {
        PipelineConfig::from_map(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("forest.n_trees") != std::string::npos);
    }
    ConfigMap cfg2;
    cfg2.set("raster.min_coverage", "1.5");
    CHECK_THROWS_AS(PipelineConfig::from_map(cfg2), ConfigError);
    ConfigMap cfg3;
    cfg3.set("ingest.window_end", "2012-08-08");  // 2-day window
    CHECK_THROWS_AS(PipelineConfig::from_map(cfg3), ConfigError);

    auto path = tmp("bad.cfg");
    write_text(path, "no equals sign here\n");
    ConfigMap cfg4;
    CHECK_THROWS_AS(cfg4.load_file(path), ConfigError);
}

TEST_CASE("paths.dir prefixes relative paths only") {
    ConfigMap cfg;
    cfg.set("paths.dir", "/data/run1");
    cfg.set("paths.forest", "/abs/forest.json");
    auto pc = PipelineConfig::from_map(cfg);
    CHECK(pc.path_events == "/data/run1/events.csv");
    CHECK(pc.path_forest == "/abs/forest.json");
}

TEST_CASE("manifests hash their inputs and carry stage metadata") {
    auto input = tmp("input.csv");
    write_text(input, "hello\n");
    auto output = tmp("stage_out.csv");
    write_text(output, "result\n");
    io::write_manifest(output, "features", {input}, {{"k", "v"}}, 77);

    auto j = io::load_json(output + ".manifest.json");
    CHECK(j["stage"] == "features");
    CHECK(j["seed"] == 77);
    CHECK(j["version"] == io::kArtifactVersion);
    std::string h = j["inputs"][input].get<std::string>();
    CHECK(h.rfind("fnv1a64:", 0) == 0);
    CHECK(h.size() == 8 + 16);
    CHECK(h == io::file_hash(input));

    // Hash is content-sensitive.
    write_text(input, "hello!\n");
    CHECK(h != io::file_hash(input));
}
