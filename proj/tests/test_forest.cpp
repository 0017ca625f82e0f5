#include <catch2/catch_amalgamated.hpp>

#include "landuse/forest.hpp"
#include "landuse/serialize.hpp"
#include "oracles.hpp"

using namespace landuse;

namespace {

// A feature matrix over a 1xN strip, one row per cell.
FeatureMatrix make_fm(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix fm;
    fm.spec = GridSpec{0, 0, 200, 1, static_cast<int>(rows.size())};
    for (std::size_t r = 0; r < rows.size(); ++r) {
        fm.active.push_back(static_cast<std::uint32_t>(r));
        REQUIRE(rows[r].size() == static_cast<std::size_t>(kNumFeatures));
        fm.values.insert(fm.values.end(), rows[r].begin(), rows[r].end());
    }
    return fm;
}

std::vector<double> feature_row(double f0, double f1 = 0.0) {
    std::vector<double> row(kNumFeatures, 0.0);
    row[0] = f0;
    row[1] = f1;
    return row;
}

ZoningGrid labels_for_strip(const GridSpec& spec, const std::vector<int>& codes) {
    ZoningGrid zg(spec);
    for (std::size_t j = 0; j < codes.size(); ++j)
        zg.set_label(0, static_cast<int>(j), class_from_code(codes[j]));
    return zg;
}

// Clearly separable two-class data: class 1 clusters near f0=0, class 2 near f0=10.
FeatureMatrix separable_fm(int per_class, std::vector<int>& codes, std::uint64_t seed = 3) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    codes.clear();
    for (int i = 0; i < per_class; ++i) {
        rows.push_back(feature_row(rng.uniform(0.0, 1.0), rng.uniform(-1, 1)));
        codes.push_back(1);
    }
    for (int i = 0; i < per_class; ++i) {
        rows.push_back(feature_row(rng.uniform(9.0, 10.0), rng.uniform(-1, 1)));
        codes.push_back(2);
    }
    return make_fm(rows);
}

}  // namespace

TEST_CASE("single-class input yields a pure leaf tree") {
    std::vector<double> x;
    std::vector<std::uint8_t> y;
    Rng rng(2);
    for (int r = 0; r < 20; ++r) {
        auto row = feature_row(rng.uniform(0, 5), rng.uniform(0, 5));
        x.insert(x.end(), row.begin(), row.end());
        y.push_back(3);
    }
    ForestConfig cfg;
    Tree t = train_tree(x.data(), y.data(), 20, kNumFeatures, cfg, 7);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].is_leaf());
    CHECK(leaf_vote(t.nodes[0]) == 3);
    CHECK(t.nodes[0].counts[2] == 20);
}

TEST_CASE("separable data gives a depth-1 tree that classifies perfectly") {
    std::vector<int> codes;
    auto fm = separable_fm(20, codes);
    auto zg = labels_for_strip(fm.spec, codes);
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.mtry = kNumFeatures;  // consider every feature
    cfg.bootstrap = false;
    cfg.min_leaf = 5;
    Forest forest = train_forest(fm, zg, cfg, 1);
    const Tree& t = forest.trees[0];
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold > 1.0);
    CHECK(t.nodes[0].threshold < 9.0);
    for (std::size_t r = 0; r < fm.n_rows(); ++r)
        CHECK(predict_tree(t, fm.row(r), kNumFeatures) == codes[r]);
}

TEST_CASE("root split matches the exhaustive oracle on the bootstrap sample") {
    Rng data_rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        // 20 rows, 2 meaningful features, noisy labels so splits are nontrivial.
        const std::size_t n = 20;
        std::vector<std::vector<double>> lib_rows;
        std::vector<std::uint8_t> labels;
        for (std::size_t r = 0; r < n; ++r) {
            double a = data_rng.uniform(0, 4), b = data_rng.uniform(0, 4);
            lib_rows.push_back({a, b});
            int code = a + b > 4.0 ? 2 : 1;
            if (data_rng.uniform() < 0.25) code = 1 + static_cast<int>(data_rng.uniform_index(3));
            labels.push_back(static_cast<std::uint8_t>(code));
        }
        std::vector<double> x;
        for (const auto& r : lib_rows) x.insert(x.end(), r.begin(), r.end());

        ForestConfig cfg;
        cfg.mtry = 2;  // all features in play, so the split is a pure argmin
        cfg.min_leaf = 1;
        std::uint64_t seed = derive_seed(100 + trial, 0);
        Tree t = train_tree(x.data(), labels.data(), n, 2, cfg, seed);

        // Reconstruct the bootstrap multiset the tree saw.
        auto idx = oracles::bootstrap_indices(seed, n);
        std::vector<std::vector<double>> boot_rows;
        std::vector<std::uint8_t> boot_labels;
        for (auto i : idx) {
            boot_rows.push_back(lib_rows[i]);
            boot_labels.push_back(labels[i]);
        }
        auto oracle = oracles::exhaustive_best_split(boot_rows, boot_labels);

        if (t.nodes[0].is_leaf()) {
            // Only legitimate if the bootstrap multiset is pure or unsplittable.
            double parent = oracles::gini_sum(boot_labels);
            CHECK((oracle.feature < 0 || oracle.impurity >= parent));
        } else {
            REQUIRE(oracle.feature >= 0);
            CHECK(t.nodes[0].feature == oracle.feature);
            CHECK(t.nodes[0].threshold == oracle.threshold);
        }
    }
}

TEST_CASE("training is deterministic and independent of thread count") {
    std::vector<int> codes;
    auto fm = separable_fm(15, codes, 8);
    auto zg = labels_for_strip(fm.spec, codes);
    ForestConfig cfg;
    cfg.n_trees = 12;
    cfg.master_seed = 42;
    Forest a = train_forest(fm, zg, cfg, 1);
    Forest b = train_forest(fm, zg, cfg, 4);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) CHECK(a.trees[t] == b.trees[t]);

    ForestConfig other = cfg;
    other.master_seed = 43;
    Forest c = train_forest(fm, zg, other, 1);
    bool any_diff = false;
    for (std::size_t t = 0; t < a.trees.size(); ++t)
        if (!(a.trees[t] == c.trees[t])) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("a one-tree forest predicts exactly like its tree") {
    std::vector<int> codes;
    auto fm = separable_fm(10, codes, 21);
    auto zg = labels_for_strip(fm.spec, codes);
    ForestConfig cfg;
    cfg.n_trees = 1;
    Forest forest = train_forest(fm, zg, cfg, 1);
    for (std::size_t r = 0; r < fm.n_rows(); ++r) {
        auto [cls, tally] = predict(forest, fm.row(r), kNumFeatures);
        CHECK(class_code(cls) == predict_tree(forest.trees[0], fm.row(r), kNumFeatures));
        double sum = 0.0;
        for (double v : tally.raw) sum += v;
        CHECK(sum == Catch::Approx(1.0));
    }
}

TEST_CASE("weighted voting hand check") {
    // raw fractions {0.50, 0.20, 0.30, 0, 0}; weights {1/0.6, 1/0.1, 1, 1, 1}
    // -> scores {0.833, 2.0, 0.3, 0, 0}: class 2 wins despite fewer votes.
    VoteTally tally;
    tally.raw = {0.50, 0.20, 0.30, 0.0, 0.0};
    std::array<double, kNumClasses> w{1.0 / 0.6, 1.0 / 0.1, 1.0, 1.0, 1.0};
    CHECK(reweighted_argmax(tally, w) == 2);
    std::array<double, kNumClasses> uniform{1, 1, 1, 1, 1};
    CHECK(reweighted_argmax(tally, uniform) == 1);
    // Weighted ties break toward the lower class code.
    VoteTally even;
    even.raw = {0.25, 0.25, 0.25, 0.25, 0.0};
    CHECK(reweighted_argmax(even, uniform) == 1);
}

TEST_CASE("scaling all weights by a constant does not change the argmax") {
    Rng rng(19);
    for (int trial = 0; trial < 200; ++trial) {
        VoteTally tally;
        double sum = 0.0;
        for (int k = 0; k < kNumClasses; ++k) {
            tally.raw[k] = rng.uniform(0.0, 1.0);
            sum += tally.raw[k];
        }
        for (int k = 0; k < kNumClasses; ++k) tally.raw[k] /= sum;
        std::array<double, kNumClasses> w;
        for (int k = 0; k < kNumClasses; ++k) w[k] = rng.uniform(0.5, 5.0);
        auto base = reweighted_argmax(tally, w);
        for (double s : {2.0, 0.5, 8.0}) {
            auto scaled = w;
            for (double& v : scaled) v *= s;
            CHECK(reweighted_argmax(tally, scaled) == base);
        }
    }
}

TEST_CASE("raising one class's weight flips predictions monotonically") {
    VoteTally tally;
    tally.raw = {0.6, 0.3, 0.1, 0.0, 0.0};
    std::array<double, kNumClasses> w{1, 1, 1, 1, 1};
    CHECK(reweighted_argmax(tally, w) == 1);
    bool flipped = false;
    for (double c : {1.5, 2.0, 2.5, 3.0, 5.0, 10.0}) {
        w[1] = c;
        auto p = reweighted_argmax(tally, w);
        if (p == 2) flipped = true;
        if (flipped) CHECK(p == 2);  // once class 2 wins, larger weights keep it
    }
    CHECK(flipped);
}

TEST_CASE("bootstrap draws n rows with replacement") {
    std::vector<int> codes;
    auto fm = separable_fm(12, codes, 30);
    auto zg = labels_for_strip(fm.spec, codes);
    ForestConfig cfg;
    cfg.n_trees = 5;
    Forest forest = train_forest(fm, zg, cfg, 1);
    for (const Tree& t : forest.trees) {
        // Sum of root-to-leaf sample counts equals the bootstrap size.
        std::uint64_t leaf_total = 0;
        for (const TreeNode& node : t.nodes)
            if (node.is_leaf())
                for (auto c : node.counts) leaf_total += c;
        CHECK(leaf_total == fm.n_rows());
        // The multiset matches an independent replay of the tree seed.
        auto idx = oracles::bootstrap_indices(t.seed, fm.n_rows());
        std::array<std::uint64_t, kNumClasses> expect{};
        for (auto i : idx) ++expect[codes[i] - 1];
        std::array<std::uint64_t, kNumClasses> got{};
        for (const TreeNode& node : t.nodes)
            if (node.is_leaf())
                for (int k = 0; k < kNumClasses; ++k) got[k] += node.counts[k];
        CHECK(got == expect);
    }
}

TEST_CASE("stratified folds partition every class nearly evenly") {
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 23; ++i) y.push_back(1);
    for (int i = 0; i < 11; ++i) y.push_back(2);
    for (int i = 0; i < 7; ++i) y.push_back(4);
    auto fold = stratified_folds(y, 5, 99);
    REQUIRE(fold.size() == y.size());
    for (int code : {1, 2, 4}) {
        std::array<int, 5> per_fold{};
        int total = 0;
        for (std::size_t r = 0; r < y.size(); ++r)
            if (y[r] == code) {
                REQUIRE(fold[r] >= 0);
                REQUIRE(fold[r] < 5);
                ++per_fold[fold[r]];
                ++total;
            }
        int lo = *std::min_element(per_fold.begin(), per_fold.end());
        int hi = *std::max_element(per_fold.begin(), per_fold.end());
        CHECK(hi - lo <= 1);
        (void)total;
    }
    CHECK(stratified_folds(y, 5, 99) == fold);  // deterministic
}

TEST_CASE("cross-validation predicts each row exactly once, out of fold") {
    std::vector<int> codes;
    auto fm = separable_fm(20, codes, 44);
    auto zg = labels_for_strip(fm.spec, codes);
    ForestConfig cfg;
    cfg.n_trees = 25;
    cfg.k_folds = 5;
    cfg.mtry = kNumFeatures;  // only two features are informative here
    auto cv = cross_validate(fm, zg, cfg, 1);
    REQUIRE(cv.predicted.size() == fm.n_rows());
    int correct = 0;
    for (std::size_t r = 0; r < fm.n_rows(); ++r) {
        CHECK(cv.fold[r] >= 0);
        double sum = 0.0;
        for (double v : cv.tallies[r].raw) sum += v;
        CHECK(sum == Catch::Approx(1.0));
        if (cv.predicted[r] == codes[r]) ++correct;
    }
    // Trivially separable: out-of-fold accuracy should be perfect.
    CHECK(correct == static_cast<int>(fm.n_rows()));
}

TEST_CASE("tune_weights with single candidates returns them unchanged") {
    std::vector<int> codes;
    auto fm = separable_fm(10, codes, 50);
    auto zg = labels_for_strip(fm.spec, codes);
    ForestConfig cfg;
    cfg.n_trees = 10;
    WeightGrid grid;
    for (int k = 0; k < kNumClasses; ++k) grid.candidates[k] = {2.5};
    auto result = tune_weights(fm, zg, cfg, grid, 1);
    for (double w : result.weights) CHECK(w == 2.5);
}

TEST_CASE("tune_weights never scores below the uniform candidate") {
    std::vector<int> codes;
    auto fm = separable_fm(12, codes, 51);
    auto zg = labels_for_strip(fm.spec, codes);
    ForestConfig cfg;
    cfg.n_trees = 15;
    WeightGrid grid;
    grid.candidates[0] = {1.0};
    for (int k = 1; k < kNumClasses; ++k) grid.candidates[k] = {1.0, 2.0, 10.0 / 3.0, 10.0};

    auto tuned = tune_weights(fm, zg, cfg, grid, 1);

    auto y = labels_or_throw(fm, zg);
    auto cv = cross_validate(fm, zg, cfg, 1);
    std::array<double, kNumClasses> uniform{1, 1, 1, 1, 1};
    std::vector<std::uint8_t> pred(y.size());
    for (std::size_t r = 0; r < y.size(); ++r) pred[r] = reweighted_argmax(cv.tallies[r], uniform);
    double uniform_obj = macro_recall(y, pred, grid.objective);
    CHECK(tuned.objective >= uniform_obj);
}

TEST_CASE("tune_weights rejects an empty candidate set") {
    std::vector<int> codes;
    auto fm = separable_fm(8, codes, 52);
    auto zg = labels_for_strip(fm.spec, codes);
    WeightGrid grid;
    grid.candidates[0] = {1.0};
    // candidates[1..4] left empty
    CHECK_THROWS_AS(tune_weights(fm, zg, ForestConfig{}, grid, 1), ConfigError);
}

TEST_CASE("macro recall hand check") {
    std::vector<std::uint8_t> y{1, 1, 2, 2, 3, 3};
    std::vector<std::uint8_t> pred{1, 2, 2, 2, 3, 1};
    // Recalls: class1 0.5, class2 1.0, class3 0.5.
    CHECK(macro_recall(y, pred, WeightObjective::MacroRecall) == Catch::Approx((0.5 + 1.0 + 0.5) / 3));
    CHECK(macro_recall(y, pred, WeightObjective::NonResidentialMacroRecall) ==
          Catch::Approx((1.0 + 0.5) / 2));
}

TEST_CASE("config validation catches bad parameters") {
    ForestConfig cfg;
    cfg.n_trees = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ForestConfig{};
    cfg.mtry = 50;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ForestConfig{};
    cfg.weights[3] = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ForestConfig{};
    cfg.k_folds = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(ForestConfig{}.validate());
}

TEST_CASE("predict rejects a mismatched feature width") {
    std::vector<int> codes;
    auto fm = separable_fm(8, codes, 60);
    auto zg = labels_for_strip(fm.spec, codes);
    ForestConfig cfg;
    cfg.n_trees = 3;
    Forest forest = train_forest(fm, zg, cfg, 1);
    CHECK_THROWS_AS(predict(forest, fm.row(0), 48), std::invalid_argument);
}

TEST_CASE("unlabeled active cells are reported with coordinates") {
    std::vector<int> codes;
    auto fm = separable_fm(5, codes, 61);
    ZoningGrid zg(fm.spec);  // nothing labeled
    try {
        labels_or_throw(fm, zg);
        FAIL("expected ConsistencyError");
    } catch (const ConsistencyError& e) {
        std::string msg = e.what();
        CHECK(msg.find("(0,0)") != std::string::npos);
        CHECK(msg.find("10") != std::string::npos);
    }
}

TEST_CASE("forest JSON round trip preserves trees and predictions") {
    std::vector<int> codes;
    auto fm = separable_fm(10, codes, 70);
    auto zg = labels_for_strip(fm.spec, codes);
    ForestConfig cfg;
    cfg.n_trees = 8;
    Forest forest = train_forest(fm, zg, cfg, 1);
    forest.weights = {1.0, 2.0, 10.0 / 3.0, 1.0, 10.0};

    auto j = io::forest_to_json(forest);
    Forest back = io::forest_from_json(j);
    REQUIRE(back.trees.size() == forest.trees.size());
    for (std::size_t t = 0; t < forest.trees.size(); ++t) CHECK(back.trees[t] == forest.trees[t]);
    CHECK(back.weights == forest.weights);
    CHECK(back.master_seed == forest.master_seed);
    for (std::size_t r = 0; r < fm.n_rows(); ++r) {
        auto [c1, t1] = predict(forest, fm.row(r), kNumFeatures);
        auto [c2, t2] = predict(back, fm.row(r), kNumFeatures);
        CHECK(c1 == c2);
        CHECK(t1.raw == t2.raw);
    }

    auto bad = j;
    bad["schema_version"] = 999;
    CHECK_THROWS_AS(io::forest_from_json(bad), InputError);
}
