#include "churn/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace churn {

namespace {

constexpr std::uint64_t kStreamTree = 0xC1;

constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

struct BuildItem {
    std::size_t parent;
    bool is_left;
    std::size_t begin;
    std::size_t end;
};

double gini_of(double s0, double s1) {
    const double total = s0 + s1;
    if (total <= 0.0) return 0.0;
    const double p0 = s0 / total;
    const double p1 = s1 / total;
    return 1.0 - p0 * p0 - p1 * p1;
}

}  // namespace

bool ForestModel::operator==(const ForestModel& other) const {
    return trees == other.trees && class_weights == other.class_weights &&
           n_features == other.n_features && config.n_trees == other.config.n_trees &&
           config.features_per_split == other.config.features_per_split &&
           config.min_samples_split == other.config.min_samples_split &&
           config.seed == other.config.seed && in_bag == other.in_bag;
}

std::array<double, 2> class_weights(std::span<const int> labels, WeightMode mode) {
    if (mode == WeightMode::Uniform) return {1.0, 1.0};
    std::size_t n1 = 0;
    for (int label : labels) n1 += label != 0;
    const std::size_t n0 = labels.size() - n1;
    if (n0 == 0 || n1 == 0) throw std::invalid_argument("balanced class weights need both classes");
    // reciprocal of the minority:majority ratio; majority weight stays 1
    std::array<double, 2> w{1.0, 1.0};
    if (n1 < n0)
        w[1] = static_cast<double>(n0) / static_cast<double>(n1);
    else if (n0 < n1)
        w[0] = static_cast<double>(n1) / static_cast<double>(n0);
    return w;
}

double weighted_gini(std::span<const double> class_counts, std::span<const double> weights) {
    if (class_counts.size() != weights.size())
        throw std::invalid_argument("weighted_gini: counts/weights size mismatch");
    double total = 0.0;
    double sum_sq = 0.0;
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        if (class_counts[c] < 0.0) throw std::invalid_argument("weighted_gini: negative count");
        total += weights[c] * class_counts[c];
    }
    if (total <= 0.0) throw std::invalid_argument("weighted_gini: all-zero counts");
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        const double p = weights[c] * class_counts[c] / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

Tree grow_tree(const Matrix& features, std::span<const int> labels,
               std::span<const std::size_t> sample_rows, const std::array<double, 2>& weights,
               std::size_t features_per_split, std::size_t min_samples_split, Rng& rng) {
    if (sample_rows.empty()) throw std::invalid_argument("grow_tree: empty sample");
    const std::size_t d = features.cols;
    if (features_per_split < 1 || features_per_split > d)
        throw std::invalid_argument("grow_tree: features_per_split out of range");

    std::vector<std::size_t> rows(sample_rows.begin(), sample_rows.end());
    Tree tree;

    // nodes are created in processing order, so the stored layout is pre-order
    std::vector<BuildItem> stack{{kNoParent, false, 0, rows.size()}};
    std::vector<std::pair<double, int>> scratch;  // (value, label), sorted per feature

    while (!stack.empty()) {
        const BuildItem item = stack.back();
        stack.pop_back();
        const std::size_t size = item.end - item.begin;

        const std::size_t node_index = tree.nodes.size();
        tree.nodes.emplace_back();
        if (item.parent != kNoParent) {
            TreeNode& parent = tree.nodes[item.parent];
            (item.is_left ? parent.left : parent.right) = node_index;
        }

        std::size_t n1 = 0;
        for (std::size_t p = item.begin; p < item.end; ++p) n1 += labels[rows[p]] != 0;
        const std::size_t n0 = size - n1;

        auto make_leaf = [&] {
            TreeNode& leaf = tree.nodes[node_index];
            leaf.is_leaf = true;
            leaf.class_counts = {weights[0] * static_cast<double>(n0), weights[1] * static_cast<double>(n1)};
        };

        if (n0 == 0 || n1 == 0 || size < min_samples_split) {
            make_leaf();
            continue;
        }

        const double s0 = weights[0] * static_cast<double>(n0);
        const double s1 = weights[1] * static_cast<double>(n1);
        const double total = s0 + s1;
        const double parent_gini = gini_of(s0, s1);

        double best_decrease = 0.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;

        for (std::size_t f : rng.sample_without_replacement(d, features_per_split)) {
            scratch.clear();
            for (std::size_t p = item.begin; p < item.end; ++p)
                scratch.emplace_back(features.at(rows[p], f), labels[rows[p]]);
            std::sort(scratch.begin(), scratch.end());

            double left0 = 0.0, left1 = 0.0;
            for (std::size_t p = 0; p + 1 < scratch.size(); ++p) {
                if (scratch[p].second != 0)
                    left1 += weights[1];
                else
                    left0 += weights[0];
                if (scratch[p].first == scratch[p + 1].first) continue;

                const double left_total = left0 + left1;
                const double right0 = s0 - left0;
                const double right1 = s1 - left1;
                const double decrease = parent_gini -
                                        (left_total / total) * gini_of(left0, left1) -
                                        ((total - left_total) / total) * gini_of(right0, right1);
                if (decrease > best_decrease) {
                    best_decrease = decrease;
                    best_feature = f;
                    // the midpoint of two adjacent representable doubles can
                    // round up to the larger one, which would route both
                    // sides left; fall back to the smaller value
                    double threshold = 0.5 * (scratch[p].first + scratch[p + 1].first);
                    if (!(threshold < scratch[p + 1].first)) threshold = scratch[p].first;
                    best_threshold = threshold;
                    found = true;
                }
            }
        }

        if (!found) {
            make_leaf();
            continue;
        }

        auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(item.begin),
                                     rows.begin() + static_cast<std::ptrdiff_t>(item.end),
                                     [&](std::size_t r) { return features.at(r, best_feature) <= best_threshold; });
        const auto mid = static_cast<std::size_t>(mid_it - rows.begin());
        if (mid == item.begin || mid == item.end) {
            make_leaf();
            continue;
        }

        TreeNode& node = tree.nodes[node_index];
        node.is_leaf = false;
        node.feature_index = best_feature;
        node.threshold = best_threshold;
        // left pushed last so it is grown next, keeping the RNG draw order fixed
        stack.push_back({node_index, false, mid, item.end});
        stack.push_back({node_index, true, item.begin, mid});
    }
    return tree;
}

ForestModel train_forest(const LabeledDataset& data, const ForestConfig& config,
                         const std::array<double, 2>& weights) {
    const std::size_t n = data.features.rows;
    if (n == 0) throw std::invalid_argument("train_forest: empty data");
    if (config.n_trees < 1) throw std::invalid_argument("train_forest: n_trees must be >= 1");
    if (weights[0] <= 0.0 || weights[1] <= 0.0)
        throw std::invalid_argument("train_forest: class weights must be positive");
    const std::size_t d = data.features.cols;

    ForestModel model;
    model.class_weights = weights;
    model.n_features = d;
    model.config = config;
    if (model.config.features_per_split == 0)
        model.config.features_per_split =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d)))));
    model.config.features_per_split = std::min(model.config.features_per_split, d);
    model.trees.resize(config.n_trees);
    if (config.keep_in_bag) model.in_bag.resize(config.n_trees);

#pragma omp parallel for schedule(dynamic)
    for (long long ti = 0; ti < static_cast<long long>(config.n_trees); ++ti) {
        const auto t = static_cast<std::size_t>(ti);
        Rng rng(mix_seed(mix_seed(config.seed, kStreamTree), t));
        std::vector<std::size_t> sample(n);
        for (std::size_t i = 0; i < n; ++i) sample[i] = rng.index(n);
        model.trees[t] = grow_tree(data.features, data.labels, sample, weights,
                                   model.config.features_per_split, model.config.min_samples_split, rng);
        if (config.keep_in_bag) {
            std::vector<std::uint32_t> bag(sample.begin(), sample.end());
            std::sort(bag.begin(), bag.end());
            bag.erase(std::unique(bag.begin(), bag.end()), bag.end());
            model.in_bag[t] = std::move(bag);
        }
    }
    return model;
}

namespace {

int tree_vote(const Tree& tree, std::span<const double> x) {
    std::size_t node = 0;
    while (!tree.nodes[node].is_leaf) {
        const TreeNode& nd = tree.nodes[node];
        node = x[nd.feature_index] <= nd.threshold ? nd.left : nd.right;
    }
    const auto& counts = tree.nodes[node].class_counts;
    return counts[1] > counts[0] ? 1 : 0;  // leaf tie -> class 0
}

}  // namespace

ForestPrediction predict(const ForestModel& model, std::span<const double> x) {
    if (x.size() != model.n_features) throw std::invalid_argument("predict: dimension mismatch");
    std::array<std::size_t, 2> votes{0, 0};
    for (const Tree& tree : model.trees) ++votes[tree_vote(tree, x)];
    ForestPrediction pred;
    pred.scores = {model.class_weights[0] * static_cast<double>(votes[0]),
                   model.class_weights[1] * static_cast<double>(votes[1])};
    pred.label = pred.scores[1] > pred.scores[0] ? 1 : 0;  // score tie -> class 0
    return pred;
}

std::vector<int> predict_batch(const ForestModel& model, const Matrix& features) {
    if (features.cols != model.n_features) throw std::invalid_argument("predict_batch: dimension mismatch");
    std::vector<int> out(features.rows);
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < static_cast<long long>(features.rows); ++r)
        out[static_cast<std::size_t>(r)] = predict(model, features.row(static_cast<std::size_t>(r))).label;
    return out;
}

// ---------------------------------------------------------------------------
// Persistence: text header plus pre-order node records, doubles round-trip
// exact.
// ---------------------------------------------------------------------------

namespace {

void write_preorder(std::ostream& out, const Tree& tree) {
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        const TreeNode& node = tree.nodes[idx];
        if (node.is_leaf) {
            out << "leaf " << node.class_counts[0] << ' ' << node.class_counts[1] << '\n';
        } else {
            out << "split " << node.feature_index << ' ' << node.threshold << '\n';
            stack.push_back(node.right);
            stack.push_back(node.left);
        }
    }
}

Tree read_preorder(std::istream& in, std::size_t node_count) {
    Tree tree;
    tree.nodes.reserve(node_count);
    // (parent index, is-left-child) slots awaiting the next pre-order node
    std::vector<std::pair<std::size_t, bool>> pending;
    for (std::size_t i = 0; i < node_count; ++i) {
        std::string kind;
        if (!(in >> kind)) throw std::runtime_error("forest file: truncated tree");
        TreeNode node;
        if (kind == "split") {
            node.is_leaf = false;
            if (!(in >> node.feature_index >> node.threshold))
                throw std::runtime_error("forest file: bad split record");
        } else if (kind == "leaf") {
            if (!(in >> node.class_counts[0] >> node.class_counts[1]))
                throw std::runtime_error("forest file: bad leaf record");
        } else {
            throw std::runtime_error("forest file: unknown node kind '" + kind + "'");
        }
        const std::size_t idx = tree.nodes.size();
        tree.nodes.push_back(node);
        if (idx > 0) {
            if (pending.empty()) throw std::runtime_error("forest file: malformed tree shape");
            auto [parent, is_left] = pending.back();
            pending.pop_back();
            (is_left ? tree.nodes[parent].left : tree.nodes[parent].right) = idx;
        }
        if (!node.is_leaf) {
            pending.emplace_back(idx, false);  // right child comes after the whole left subtree
            pending.emplace_back(idx, true);
        }
    }
    if (!pending.empty()) throw std::runtime_error("forest file: malformed tree shape");
    return tree;
}

}  // namespace

void save_forest(const ForestModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "churn-forest 1\n";
    out << "n_trees " << model.trees.size() << '\n';
    out << "n_features " << model.n_features << '\n';
    out << "class_weights " << model.class_weights[0] << ' ' << model.class_weights[1] << '\n';
    out << "seed " << model.config.seed << '\n';
    out << "features_per_split " << model.config.features_per_split << '\n';
    out << "min_samples_split " << model.config.min_samples_split << '\n';
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        out << "tree " << t << " nodes " << model.trees[t].nodes.size() << '\n';
        write_preorder(out, model.trees[t]);
    }
    if (!out) throw std::runtime_error("failed writing model file: " + path.string());
}

ForestModel load_forest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());

    auto expect = [&](const char* keyword) {
        std::string word;
        if (!(in >> word) || word != keyword)
            throw std::runtime_error("forest file: expected '" + std::string(keyword) + "'");
    };

    expect("churn-forest");
    int version = 0;
    in >> version;
    if (version != 1) throw std::runtime_error("forest file: unsupported version");

    ForestModel model;
    std::size_t n_trees = 0;
    expect("n_trees");
    in >> n_trees;
    expect("n_features");
    in >> model.n_features;
    expect("class_weights");
    in >> model.class_weights[0] >> model.class_weights[1];
    expect("seed");
    in >> model.config.seed;
    expect("features_per_split");
    in >> model.config.features_per_split;
    expect("min_samples_split");
    in >> model.config.min_samples_split;
    if (!in) throw std::runtime_error("forest file: bad header");
    model.config.n_trees = n_trees;

    model.trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        expect("tree");
        std::size_t index = 0, node_count = 0;
        in >> index;
        expect("nodes");
        in >> node_count;
        if (!in || index != t || node_count == 0) throw std::runtime_error("forest file: bad tree header");
        model.trees.push_back(read_preorder(in, node_count));
    }
    return model;
}

}  // namespace churn
