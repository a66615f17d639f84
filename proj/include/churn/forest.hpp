#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "churn/dataset.hpp"
#include "churn/matrix.hpp"
#include "churn/rng.hpp"

namespace churn {

// ---------------------------------------------------------------------------
// Decision-tree induction with the (optionally class-weighted) Gini criterion
// and a bagged 100-tree forest. Trees are grown in parallel; each tree's RNG
// stream is derived from (seed, tree index) so the model is independent of
// worker count and scheduling.
// ---------------------------------------------------------------------------

struct TreeNode {
    bool is_leaf = true;
    // internal
    std::size_t feature_index = 0;
    double threshold = 0.0;  // x[feature] <= threshold routes left
    std::size_t left = 0;
    std::size_t right = 0;
    // leaf
    std::array<double, 2> class_counts{0.0, 0.0};  // weighted

    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    bool operator==(const Tree&) const = default;
};

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t features_per_split = 0;  // 0 = ceil(sqrt(d))
    std::size_t min_samples_split = 2;
    std::uint64_t seed = 0;
    bool keep_in_bag = false;  // bootstrap bookkeeping for out-of-bag analysis
};

struct ForestModel {
    std::vector<Tree> trees;
    std::array<double, 2> class_weights{1.0, 1.0};
    std::size_t n_features = 0;
    ForestConfig config;
    std::vector<std::vector<std::uint32_t>> in_bag;  // per tree, when keep_in_bag

    bool operator==(const ForestModel&) const;
};

enum class WeightMode { Uniform, Balanced };

// Balanced mode: reciprocal of the minority:majority ratio, i.e. minority
// weight N_maj/N_min, majority weight 1.
std::array<double, 2> class_weights(std::span<const int> labels, WeightMode mode);

// 1 - sum((w_c * n_c / S)^2) with S = sum of weighted counts.
double weighted_gini(std::span<const double> class_counts, std::span<const double> weights);

// Best-split induction on the given sample rows (duplicates allowed, as drawn
// by the bootstrap). Thresholds are midpoints between consecutive distinct
// sorted values of each drawn feature; stops on purity, fewer than
// min_samples_split examples, or no positive weighted-Gini decrease.
Tree grow_tree(const Matrix& features, std::span<const int> labels,
               std::span<const std::size_t> sample_rows, const std::array<double, 2>& weights,
               std::size_t features_per_split, std::size_t min_samples_split, Rng& rng);

ForestModel train_forest(const LabeledDataset& data, const ForestConfig& config,
                         const std::array<double, 2>& weights = {1.0, 1.0});

struct ForestPrediction {
    int label = 0;
    std::array<double, 2> scores{0.0, 0.0};  // weight_c * votes_c
};

// Each tree votes its leaf's majority class; score ties resolve to class 0.
ForestPrediction predict(const ForestModel& model, std::span<const double> x);
std::vector<int> predict_batch(const ForestModel& model, const Matrix& features);

// Self-describing flat text file: header, then pre-order node records.
// Doubles are written round-trip exact, so a reloaded model predicts
// identically.
void save_forest(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_forest(const std::filesystem::path& path);

}  // namespace churn
