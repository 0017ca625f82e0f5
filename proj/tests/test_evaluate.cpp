#include <catch2/catch_amalgamated.hpp>

#include "landuse/evaluate.hpp"

using namespace landuse;

namespace {

GridSpec strip(int n) { return GridSpec{0, 0, 200, 1, n}; }

ZoningGrid truth_from(const std::vector<int>& codes) {
    ZoningGrid zg(strip(static_cast<int>(codes.size())));
    for (std::size_t j = 0; j < codes.size(); ++j)
        if (codes[j] != 0) zg.set_label(0, static_cast<int>(j), class_from_code(codes[j]));
    return zg;
}

PredictionGrid pred_from(const std::vector<int>& codes) {
    PredictionGrid pg(strip(static_cast<int>(codes.size())));
    for (std::size_t j = 0; j < codes.size(); ++j) pg.codes[j] = static_cast<std::uint8_t>(codes[j]);
    return pg;
}

std::vector<LandUseClass> every_class() {
    return {LandUseClass::Residential, LandUseClass::Commercial, LandUseClass::Industrial,
            LandUseClass::Parks, LandUseClass::Other};
}

}  // namespace

TEST_CASE("confusion matrix hand check with row normalization") {
    // Truth:      1 1 1 2 2 4
    // Predicted:  1 1 2 2 2 1
    auto truth = truth_from({1, 1, 1, 2, 2, 4});
    auto pred = pred_from({1, 1, 2, 2, 2, 1});
    auto rep = confusion(truth, pred, every_class());
    CHECK(rep.evaluated_cells == 6);
    CHECK(rep.total_accuracy == Catch::Approx(4.0 / 6.0));
    CHECK(rep.counts[0][0] == 2);
    CHECK(rep.counts[0][1] == 1);
    CHECK(rep.counts[1][1] == 2);
    CHECK(rep.counts[3][0] == 1);
    CHECK(rep.fractions[0][0] == Catch::Approx(2.0 / 3.0));
    CHECK(rep.fractions[0][1] == Catch::Approx(1.0 / 3.0));
    CHECK(rep.fractions[1][1] == Catch::Approx(1.0));
    CHECK(rep.fractions[3][0] == Catch::Approx(1.0));
    // Rows with cells sum to one.
    for (std::size_t i = 0; i < rep.fractions.size(); ++i) {
        double row = 0.0;
        for (double v : rep.fractions[i]) row += v;
        if (i == 2 || i == 4) CHECK(row == 0.0);  // no Industrial/Other cells
        else CHECK(row == Catch::Approx(1.0));
    }
    CHECK(rep.land_share[0] == Catch::Approx(0.5));
    CHECK(rep.land_share[1] == Catch::Approx(2.0 / 6.0));
    CHECK(rep.land_share[3] == Catch::Approx(1.0 / 6.0));
}

TEST_CASE("perfect prediction gives identity fractions and accuracy one") {
    auto truth = truth_from({1, 2, 3, 4, 5, 1, 2});
    auto pred = pred_from({1, 2, 3, 4, 5, 1, 2});
    auto rep = confusion(truth, pred, every_class());
    CHECK(rep.total_accuracy == 1.0);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            if (rep.counts[i][i] > 0) CHECK(rep.fractions[i][j] == (i == j ? 1.0 : 0.0));
}

TEST_CASE("class subset restriction drops out-of-subset truth rows") {
    auto truth = truth_from({1, 2, 3, 4, 5});
    auto pred = pred_from({1, 1, 1, 1, 1});
    std::vector<LandUseClass> subset{LandUseClass::Residential, LandUseClass::Commercial,
                                     LandUseClass::Industrial, LandUseClass::Parks};
    auto rep = confusion(truth, pred, subset);
    CHECK(rep.evaluated_cells == 4);  // the Other cell is excluded
    CHECK(rep.total_accuracy == Catch::Approx(0.25));
    CHECK(rep.classes.size() == 4);
}

TEST_CASE("inactive cells do not enter the evaluation") {
    auto truth = truth_from({1, 1, 2, 2});
    auto pred = pred_from({1, 0, 0, 2});
    auto rep = confusion(truth, pred, every_class());
    CHECK(rep.evaluated_cells == 2);
    CHECK(rep.total_accuracy == 1.0);
}

TEST_CASE("predicted cell without a truth label is an error") {
    auto truth = truth_from({1, 0, 2});
    auto pred = pred_from({1, 2, 2});
    CHECK_THROWS_AS(confusion(truth, pred, every_class()), ConsistencyError);
}

TEST_CASE("mismatched grids are rejected") {
    auto truth = truth_from({1, 2});
    auto pred = pred_from({1, 2, 3});
    CHECK_THROWS_AS(confusion(truth, pred, every_class()), ConsistencyError);
}

TEST_CASE("vote thresholds pass through to the report") {
    auto truth = truth_from({1});
    auto pred = pred_from({1});
    auto rep = confusion(truth, pred, every_class(), {0.6, 0.1, 0.1, 0.1, 0.1});
    REQUIRE(rep.vote_thresholds.size() == 5);
    CHECK(rep.vote_thresholds[0] == 0.6);
}

TEST_CASE("error group assignment and mean residuals") {
    // Cells: 0 true=1 pred=1 (I), 1 true=2 pred=1 (II), 2 true=1 pred=2 (III),
    // 3 true=2 pred=2 (neither).
    auto truth = truth_from({1, 2, 1, 2});
    auto pred = pred_from({1, 1, 2, 2});
    ResidualSeries rs;
    rs.spec = truth.spec();
    rs.active = {0, 1, 2, 3};
    rs.values.assign(4 * kHoursPerWeek, 0.0);
    for (int t = 0; t < kHoursPerWeek; ++t) {
        rs.values[0 * kHoursPerWeek + t] = 1.0;
        rs.values[1 * kHoursPerWeek + t] = 2.0;
        rs.values[2 * kHoursPerWeek + t] = -3.0;
        rs.values[3 * kHoursPerWeek + t] = 7.0;
    }
    auto eg = error_groups(truth, pred, rs, LandUseClass::Residential);
    CHECK(eg.count == std::array<std::size_t, 3>{1, 1, 1});
    CHECK(eg.mean_residual[0][5] == Catch::Approx(1.0));
    CHECK(eg.mean_residual[1][5] == Catch::Approx(2.0));
    CHECK(eg.mean_residual[2][5] == Catch::Approx(-3.0));
}

TEST_CASE("empty error groups are flagged, not averaged") {
    auto truth = truth_from({1, 1});
    auto pred = pred_from({1, 1});
    ResidualSeries rs;
    rs.spec = truth.spec();
    rs.active = {0, 1};
    rs.values.assign(2 * kHoursPerWeek, 0.5);
    auto eg = error_groups(truth, pred, rs, LandUseClass::Residential);
    CHECK(eg.count[0] == 2);
    CHECK(eg.has_profile[0]);
    CHECK_FALSE(eg.has_profile[1]);
    CHECK_FALSE(eg.has_profile[2]);
}

TEST_CASE("error groups require prediction and truth for every residual cell") {
    auto truth = truth_from({1, 0});
    auto pred = pred_from({1, 1});
    ResidualSeries rs;
    rs.spec = truth.spec();
    rs.active = {0, 1};
    rs.values.assign(2 * kHoursPerWeek, 0.0);
    CHECK_THROWS_AS(error_groups(truth, pred, rs, LandUseClass::Residential), ConsistencyError);

    auto pred2 = pred_from({1, 0});
    auto truth2 = truth_from({1, 2});
    CHECK_THROWS_AS(error_groups(truth2, pred2, rs, LandUseClass::Residential), ConsistencyError);
}

TEST_CASE("naive baseline is the residential share of active labeled cells") {
    auto truth = truth_from({1, 1, 1, 2, 4, 0});
    CHECK(naive_baseline(truth, {0, 1, 2, 3, 4}) == Catch::Approx(0.6));
    CHECK(naive_baseline(truth, {0, 3, 5}) == Catch::Approx(0.5));  // unlabeled cell skipped
    CHECK_THROWS_AS(naive_baseline(truth, {5}), InputError);
}
