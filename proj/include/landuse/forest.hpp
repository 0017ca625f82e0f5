#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "landuse/errors.hpp"
#include "landuse/grid.hpp"
#include "landuse/log.hpp"
#include "landuse/rng.hpp"
#include "landuse/signal.hpp"
#include "landuse/thread.hpp"

namespace landuse {

/// Flat preorder tree. feature == -1 marks a leaf; internal nodes route
/// x[feature] <= threshold to `left`, else to `right`.
struct TreeNode {
    std::int16_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::array<std::uint32_t, kNumClasses> counts{};  // leaf class histogram

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes;
    std::uint64_t seed = 0;

    bool operator==(const Tree&) const = default;
};

struct ForestConfig {
    int n_trees = 500;
    int mtry = 7;  // floor(sqrt(49))
    int min_leaf = 5;
    bool bootstrap = true;
    int k_folds = 5;
    std::uint64_t master_seed = 1;
    std::array<double, kNumClasses> weights{1.0, 1.0, 1.0, 1.0, 1.0};

    void validate(int n_features = kNumFeatures) const {
        if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
        if (mtry < 1 || mtry > n_features) throw ConfigError("mtry must be in [1, n_features]");
        if (min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
        if (k_folds < 2) throw ConfigError("k_folds must be >= 2");
        for (double w : weights)
            if (!(w > 0.0)) throw ConfigError("class weights must be strictly positive");
    }
};

struct Forest {
    std::vector<Tree> trees;
    int n_features = kNumFeatures;
    int mtry = 7;
    int min_leaf = 5;
    bool bootstrap = true;
    std::uint64_t master_seed = 0;
    std::array<double, kNumClasses> weights{1.0, 1.0, 1.0, 1.0, 1.0};
};

/// Raw per-class vote fractions and their weighted scores.
struct VoteTally {
    std::array<double, kNumClasses> raw{};       // fractions, sum to 1
    std::array<double, kNumClasses> weighted{};  // raw * w_c
};

namespace detail {

struct SplitCandidate {
    double impurity = std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;

    // Lower impurity wins; ties prefer the lower feature index, then the
    // lower threshold, independent of feature sampling order.
    bool better_than(const SplitCandidate& o) const {
        if (impurity != o.impurity) return impurity < o.impurity;
        if (feature != o.feature) return feature < o.feature;
        return threshold < o.threshold;
    }
};

class TreeBuilder {
  public:
    TreeBuilder(const double* x, const std::uint8_t* y, std::size_t n_rows, int n_features,
                int mtry, int min_leaf, bool bootstrap, std::uint64_t seed)
        : x_(x), y_(y), n_features_(n_features), mtry_(mtry), min_leaf_(min_leaf), rng_(seed) {
        tree_.seed = seed;
        // Bootstrap sample with replacement, same cardinality as the input.
        indices_.resize(n_rows);
        if (bootstrap) {
            for (std::size_t i = 0; i < n_rows; ++i)
                indices_[i] = static_cast<std::uint32_t>(rng_.uniform_index(n_rows));
        } else {
            for (std::size_t i = 0; i < n_rows; ++i) indices_[i] = static_cast<std::uint32_t>(i);
        }
    }

    Tree build() {
        grow(0, indices_.size());
        return std::move(tree_);
    }

  private:
    std::array<std::uint32_t, kNumClasses> count_classes(std::size_t begin, std::size_t end) const {
        std::array<std::uint32_t, kNumClasses> counts{};
        for (std::size_t i = begin; i < end; ++i) ++counts[y_[indices_[i]] - 1];
        return counts;
    }

    static double weighted_child_impurity(const std::array<std::uint32_t, kNumClasses>& left,
                                          const std::array<std::uint32_t, kNumClasses>& total,
                                          std::uint32_t nl, std::uint32_t n) {
        // n * weighted Gini = nl*(1 - sum(pl^2)) + nr*(1 - sum(pr^2)); constant
        // factor 1/n dropped since it is shared by all candidates of a node.
        std::uint32_t nr = n - nl;
        double sl = 0.0, sr = 0.0;
        for (int k = 0; k < kNumClasses; ++k) {
            double cl = left[k];
            double cr = static_cast<double>(total[k]) - cl;
            sl += cl * cl;
            sr += cr * cr;
        }
        return static_cast<double>(n) - sl / nl - sr / nr;
    }

    // Recursive preorder growth over indices_[begin, end); returns node index.
    std::int32_t grow(std::size_t begin, std::size_t end) {
        const std::size_t n = end - begin;
        auto counts = count_classes(begin, end);
        int n_present = 0;
        for (auto c : counts) n_present += (c > 0);

        std::int32_t node_idx = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        if (n_present <= 1 || n < static_cast<std::size_t>(min_leaf_)) {
            tree_.nodes[node_idx].counts = counts;
            return node_idx;
        }

        // Parent impurity on the same (unnormalized) scale as candidates.
        double parent = static_cast<double>(n);
        {
            double s = 0.0;
            for (auto c : counts) s += static_cast<double>(c) * c;
            parent -= s / static_cast<double>(n);
        }

        rng_.sample_without_replacement(n_features_, mtry_, feat_sample_);
        SplitCandidate best;
        for (int f : feat_sample_) scan_feature(f, begin, end, counts, static_cast<std::uint32_t>(n), best);

        if (best.feature < 0 || best.impurity >= parent) {
            tree_.nodes[node_idx].counts = counts;
            return node_idx;
        }

        const int f = best.feature;
        const double thr = best.threshold;
        auto mid_it = std::partition(indices_.begin() + begin, indices_.begin() + end,
                                     [&](std::uint32_t r) { return x_[r * n_features_ + f] <= thr; });
        std::size_t mid = static_cast<std::size_t>(mid_it - indices_.begin());

        tree_.nodes[node_idx].feature = static_cast<std::int16_t>(f);
        tree_.nodes[node_idx].threshold = thr;
        tree_.nodes[node_idx].left = grow(begin, mid);
        tree_.nodes[node_idx].right = grow(mid, end);
        return node_idx;
    }

    void scan_feature(int f, std::size_t begin, std::size_t end,
                      const std::array<std::uint32_t, kNumClasses>& total, std::uint32_t n,
                      SplitCandidate& best) {
        pairs_.clear();
        pairs_.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            std::uint32_t r = indices_[i];
            pairs_.emplace_back(x_[r * n_features_ + f], y_[r]);
        }
        std::sort(pairs_.begin(), pairs_.end());

        std::array<std::uint32_t, kNumClasses> left{};
        std::uint32_t nl = 0;
        for (std::size_t i = 0; i + 1 < pairs_.size(); ++i) {
            ++left[pairs_[i].second - 1];
            ++nl;
            double v = pairs_[i].first, w = pairs_[i + 1].first;
            if (v == w) continue;
            double thr = v + 0.5 * (w - v);
            if (thr >= w) thr = v;  // guard midpoint rounding onto the right value
            SplitCandidate cand{weighted_child_impurity(left, total, nl, n), f, thr};
            if (cand.better_than(best)) best = cand;
        }
    }

    const double* x_;
    const std::uint8_t* y_;
    int n_features_;
    int mtry_;
    int min_leaf_;
    Rng rng_;
    Tree tree_;
    std::vector<std::uint32_t> indices_;
    std::vector<int> feat_sample_;
    std::vector<std::pair<double, std::uint8_t>> pairs_;
};

}  // namespace detail

/// Grows one CART-style tree on a bootstrap sample of the rows.
/// x: row-major n_rows * n_features; y: class codes 1..5.
inline Tree train_tree(const double* x, const std::uint8_t* y, std::size_t n_rows, int n_features,
                       const ForestConfig& cfg, std::uint64_t seed) {
    if (n_rows == 0) throw std::invalid_argument("train_tree: empty input");
    cfg.validate(n_features);
    detail::TreeBuilder builder(x, y, n_rows, n_features, cfg.mtry, cfg.min_leaf, cfg.bootstrap, seed);
    return builder.build();
}

/// Leaf plurality class code; ties break toward the lower category index.
inline int leaf_vote(const TreeNode& node) {
    int best = 0;
    for (int k = 1; k < kNumClasses; ++k)
        if (node.counts[k] > node.counts[best]) best = k;
    return best + 1;
}

inline int predict_tree(const Tree& tree, const double* x, int n_features) {
    const TreeNode* node = &tree.nodes[0];
    while (!node->is_leaf()) {
        node = x[node->feature] <= node->threshold ? &tree.nodes[node->left] : &tree.nodes[node->right];
    }
    (void)n_features;
    return leaf_vote(*node);
}

/// Aggregates per-tree votes into raw fractions and weighted scores, and
/// returns the argmax class (ties toward the lower category index).
inline std::pair<LandUseClass, VoteTally> predict(const Forest& forest, const double* x, int width) {
    if (width != forest.n_features)
        throw std::invalid_argument("predict: feature row has width " + std::to_string(width) +
                                    ", expected " + std::to_string(forest.n_features));
    std::array<std::uint32_t, kNumClasses> votes{};
    for (const Tree& t : forest.trees) ++votes[predict_tree(t, x, width) - 1];
    VoteTally tally;
    const double n = static_cast<double>(forest.trees.size());
    int best = 0;
    for (int k = 0; k < kNumClasses; ++k) {
        tally.raw[k] = votes[k] / n;
        tally.weighted[k] = tally.raw[k] * forest.weights[k];
        if (tally.weighted[k] > tally.weighted[best]) best = k;
    }
    return {class_from_code(best + 1), tally};
}

/// Class codes for feature rows, from the zoning grid. 0 marks a missing
/// label; callers that require full labeling should use labels_or_throw.
inline std::vector<std::uint8_t> labels_for(const FeatureMatrix& fm, const ZoningGrid& zg) {
    std::vector<std::uint8_t> y(fm.n_rows(), 0);
    for (std::size_t r = 0; r < fm.n_rows(); ++r)
        if (auto c = zg.label_flat(fm.active[r])) y[r] = static_cast<std::uint8_t>(class_code(*c));
    return y;
}

inline std::vector<std::uint8_t> labels_or_throw(const FeatureMatrix& fm, const ZoningGrid& zg) {
    auto y = labels_for(fm, zg);
    std::string offenders;
    int n_missing = 0;
    for (std::size_t r = 0; r < y.size(); ++r)
        if (y[r] == 0) {
            ++n_missing;
            if (n_missing <= 10) {
                auto [i, j] = fm.spec.unflat(fm.active[r]);
                offenders += " (" + std::to_string(i) + "," + std::to_string(j) + ")";
            }
        }
    if (n_missing > 0)
        throw ConsistencyError("unlabeled active cells: " + std::to_string(n_missing) +
                               ", first offenders:" + offenders);
    return y;
}

/// Trains cfg.n_trees trees with per-tree seeds derived from the master seed.
/// Results are independent of the thread count.
inline Forest train_forest(const double* x, const std::uint8_t* y, std::size_t n_rows,
                           int n_features, const ForestConfig& cfg, int threads = 0) {
    if (n_rows == 0) throw std::invalid_argument("train_forest: empty input");
    cfg.validate(n_features);
    Forest forest;
    forest.n_features = n_features;
    forest.mtry = cfg.mtry;
    forest.min_leaf = cfg.min_leaf;
    forest.bootstrap = cfg.bootstrap;
    forest.master_seed = cfg.master_seed;
    forest.weights = cfg.weights;
    forest.trees.resize(cfg.n_trees);
    parallel_for(cfg.n_trees, threads, [&](int t) {
        forest.trees[t] =
            train_tree(x, y, n_rows, n_features, cfg, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(t)));
    });
    return forest;
}

inline Forest train_forest(const FeatureMatrix& fm, const ZoningGrid& labels, const ForestConfig& cfg,
                           int threads = 0) {
    auto y = labels_or_throw(fm, labels);
    return train_forest(fm.values.data(), y.data(), fm.n_rows(), kNumFeatures, cfg, threads);
}

/// Deterministic stratified fold assignment, one fold id per row.
inline std::vector<int> stratified_folds(const std::vector<std::uint8_t>& y, int k_folds,
                                         std::uint64_t master_seed) {
    std::vector<int> fold(y.size(), -1);
    for (int code = 1; code <= kNumClasses; ++code) {
        std::vector<std::uint32_t> rows;
        for (std::size_t r = 0; r < y.size(); ++r)
            if (y[r] == code) rows.push_back(static_cast<std::uint32_t>(r));
        if (rows.empty()) continue;
        if (rows.size() < static_cast<std::size_t>(k_folds))
            log::warn(std::string("stratified_folds: class ") + class_name(class_from_code(code)) +
                      " has fewer rows (" + std::to_string(rows.size()) + ") than folds; distributing best-effort");
        Rng rng(derive_seed(master_seed, 0xF01D0000ULL + static_cast<std::uint64_t>(code)));
        for (std::size_t i = rows.size(); i > 1; --i)
            std::swap(rows[i - 1], rows[rng.uniform_index(i)]);
        for (std::size_t i = 0; i < rows.size(); ++i)
            fold[rows[i]] = static_cast<int>(i % static_cast<std::size_t>(k_folds));
    }
    return fold;
}

/// Out-of-fold predictions: each row predicted exactly once by a forest
/// trained without its fold.
struct CvResult {
    std::vector<int> fold;              // per row
    std::vector<VoteTally> tallies;     // per row, out-of-fold
    std::vector<std::uint8_t> predicted;  // per row, class codes
};

inline CvResult cross_validate(const FeatureMatrix& fm, const ZoningGrid& labels,
                               const ForestConfig& cfg, int threads = 0) {
    cfg.validate();
    auto y = labels_or_throw(fm, labels);
    if (fm.n_rows() < static_cast<std::size_t>(cfg.k_folds))
        throw ConfigError("cross_validate: fewer rows than folds");

    CvResult cv;
    cv.fold = stratified_folds(y, cfg.k_folds, cfg.master_seed);
    cv.tallies.resize(fm.n_rows());
    cv.predicted.resize(fm.n_rows());

    std::vector<double> train_x;
    std::vector<std::uint8_t> train_y;
    for (int f = 0; f < cfg.k_folds; ++f) {
        train_x.clear();
        train_y.clear();
        for (std::size_t r = 0; r < fm.n_rows(); ++r) {
            if (cv.fold[r] == f) continue;
            const double* row = fm.row(r);
            train_x.insert(train_x.end(), row, row + kNumFeatures);
            train_y.push_back(y[r]);
        }
        ForestConfig fold_cfg = cfg;
        fold_cfg.master_seed = derive_seed(cfg.master_seed, 0xCF00ULL + static_cast<std::uint64_t>(f));
        Forest forest = train_forest(train_x.data(), train_y.data(), train_y.size(), kNumFeatures,
                                     fold_cfg, threads);
        std::vector<std::uint32_t> fold_rows;
        for (std::size_t r = 0; r < fm.n_rows(); ++r)
            if (cv.fold[r] == f) fold_rows.push_back(static_cast<std::uint32_t>(r));
        parallel_for(static_cast<int>(fold_rows.size()), threads, [&](int i) {
            std::uint32_t r = fold_rows[static_cast<std::size_t>(i)];
            auto [cls, tally] = predict(forest, fm.row(r), kNumFeatures);
            cv.tallies[r] = tally;
            cv.predicted[r] = static_cast<std::uint8_t>(class_code(cls));
        });
    }
    return cv;
}

/// Re-derives argmax predictions from stored raw fractions under new weights;
/// avoids retraining when only the vote weights change.
inline std::uint8_t reweighted_argmax(const VoteTally& tally, const std::array<double, kNumClasses>& w) {
    int best = 0;
    double best_score = tally.raw[0] * w[0];
    for (int k = 1; k < kNumClasses; ++k) {
        double s = tally.raw[k] * w[k];
        if (s > best_score) {
            best = k;
            best_score = s;
        }
    }
    return static_cast<std::uint8_t>(best + 1);
}

enum class WeightObjective {
    NonResidentialMacroRecall,  // mean recall over non-residential classes present
    MacroRecall,                // mean recall over all classes present
};

/// Mean of per-class recalls over classes present in y (optionally excluding
/// Residential). Used as the weight-tuning objective.
inline double macro_recall(const std::vector<std::uint8_t>& y, const std::vector<std::uint8_t>& pred,
                           WeightObjective objective) {
    std::array<std::size_t, kNumClasses> total{}, correct{};
    for (std::size_t r = 0; r < y.size(); ++r) {
        ++total[y[r] - 1];
        if (pred[r] == y[r]) ++correct[y[r] - 1];
    }
    double sum = 0.0;
    int n = 0;
    for (int k = 0; k < kNumClasses; ++k) {
        if (total[k] == 0) continue;
        if (objective == WeightObjective::NonResidentialMacroRecall &&
            k + 1 == class_code(LandUseClass::Residential))
            continue;
        sum += static_cast<double>(correct[k]) / static_cast<double>(total[k]);
        ++n;
    }
    return n > 0 ? sum / n : 0.0;
}

struct WeightGrid {
    // Candidate multiplier sets per class, in preference order.
    std::array<std::vector<double>, kNumClasses> candidates;
    WeightObjective objective = WeightObjective::NonResidentialMacroRecall;
};

struct TuneResult {
    std::array<double, kNumClasses> weights{1.0, 1.0, 1.0, 1.0, 1.0};
    double objective = 0.0;
    CvResult cv;  // folds and tallies reused for the final evaluation
};

/// Coarse-grid vote-weight search: trains the k-fold forests once, then
/// evaluates every candidate weight vector by re-weighting the stored vote
/// tallies. Ties keep the earlier candidate in lexicographic order.
inline TuneResult tune_weights(const FeatureMatrix& fm, const ZoningGrid& labels,
                               const ForestConfig& cfg, const WeightGrid& grid, int threads = 0) {
    for (const auto& cands : grid.candidates)
        if (cands.empty()) throw ConfigError("tune_weights: empty weight candidate set");

    auto y = labels_or_throw(fm, labels);
    TuneResult result;
    result.cv = cross_validate(fm, labels, cfg, threads);

    std::vector<std::uint8_t> pred(y.size());
    std::array<std::size_t, kNumClasses> pick{};
    bool first = true;
    for (;;) {
        std::array<double, kNumClasses> w;
        for (int k = 0; k < kNumClasses; ++k) w[k] = grid.candidates[k][pick[k]];
        for (std::size_t r = 0; r < y.size(); ++r) pred[r] = reweighted_argmax(result.cv.tallies[r], w);
        double obj = macro_recall(y, pred, grid.objective);
        if (first || obj > result.objective) {
            result.objective = obj;
            result.weights = w;
            first = false;
        }
        // Advance the odometer, last class fastest (lexicographic order).
        int k = kNumClasses - 1;
        while (k >= 0 && ++pick[k] == grid.candidates[k].size()) {
            pick[k] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return result;
}

}  // namespace landuse
