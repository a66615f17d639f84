// Acceptance suite: every criterion prints exactly one [PASS]/[FAIL] line.
// Run with no arguments for all criteria, or pass criterion numbers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "churn/baselines.hpp"
#include "churn/csv.hpp"
#include "churn/forest.hpp"
#include "churn/generator.hpp"
#include "churn/metrics.hpp"
#include "churn/month.hpp"
#include "churn/pipeline.hpp"
#include "churn/reference.hpp"
#include "churn/sampler.hpp"
#include "helpers.hpp"

using namespace churn;

namespace {

struct Checker {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// ---------------------------------------------------------------------------
// 1. Metric-formula reproduction
// ---------------------------------------------------------------------------
Checker criterion_1() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    struct Row {
        const char* pair;
        double p, r, tnr, f, g;
    };
    const Row rows[] = {
        {"July to August", 0.8383, 0.3292, 0.9952, 0.473, 0.572},
        {"August to September", 0.7838, 0.3944, 0.9920, 0.525, 0.625},
        {"September to October", 0.7559, 0.3312, 0.9924, 0.461, 0.573},
    };
    for (const auto& row : rows) {
        const auto m = metrics_from_rates(row.p, row.r, row.tnr);
        c.require(m.f_measure && std::abs(*m.f_measure - row.f) <= 0.001,
                  std::string(row.pair) + ": F-measure off published value");
        c.require(m.g_mean && std::abs(*m.g_mean - row.g) <= 0.001,
                  std::string(row.pair) + ": G-mean off published value");
    }
    c.require(seconds_since(start) < 1.0, "runtime exceeded 1 s");
    return c;
}

// ---------------------------------------------------------------------------
// 2. Sampler oracle equivalence on 100 random instances
// ---------------------------------------------------------------------------
Checker criterion_2() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const std::size_t n = 30 + rng.index(271);            // <= 300
        const std::size_t d = 1 + rng.index(10);              // <= 10
        const double share = 0.15 + 0.3 * rng.uniform();
        const auto data = testutil::random_dataset(n, d, share, seed + 10000, 0.5);

        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        const std::size_t query = rng.index(n);
        const std::size_t k = 1 + rng.index(10);
        c.require(knn(query, all, data.features, k) == reference::knn(query, all, data.features, k),
                  "knn mismatch at seed " + std::to_string(seed));

        c.require(tomek_links(data) == reference::tomek_links(data.features, data.labels),
                  "tomek_links mismatch at seed " + std::to_string(seed));

        std::size_t n_pos = 0;
        for (int label : data.labels) n_pos += label != 0;
        if (n_pos > 0 && n_pos < n && n >= 6) {
            const auto mine = borderline_classify(data, 5);
            const auto oracle = reference::borderline_classify(data.features, data.labels, 5);
            c.require(mine.safe == oracle.safe && mine.danger == oracle.danger && mine.noise == oracle.noise,
                      "borderline_classify mismatch at seed " + std::to_string(seed));
        }
        if (!c.ok) break;
    }
    c.require(seconds_since(start) < 60.0, "runtime exceeded 60 s");
    return c;
}

// ---------------------------------------------------------------------------
// 3. SMOTE geometry and allocation arithmetic
// ---------------------------------------------------------------------------
Checker criterion_3() {
    Checker c;

    auto segment_ok = [](std::span<const double> x_new, std::span<const double> xi,
                         std::span<const double> xhat) {
        double denom = 0.0, alpha = 0.0;
        for (std::size_t i = 0; i < xi.size(); ++i) {
            const double span = xhat[i] - xi[i];
            if (std::abs(span) > std::abs(denom)) {
                denom = span;
                alpha = (x_new[i] - xi[i]) / span;
            }
        }
        if (denom == 0.0) {
            for (std::size_t i = 0; i < xi.size(); ++i)
                if (std::abs(x_new[i] - xi[i]) > 1e-9) return false;
            return true;
        }
        if (alpha < -1e-9 || alpha > 1.0 + 1e-9) return false;
        for (std::size_t i = 0; i < xi.size(); ++i)
            if (std::abs(x_new[i] - (xi[i] + alpha * (xhat[i] - xi[i]))) > 1e-9) return false;
        return true;
    };

    // 20 seeded runs: segment property for every synthetic example
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto data = testutil::random_dataset(150, 5, 0.2, seed + 500, 0.5);
        std::vector<std::size_t> minority;
        for (std::size_t i = 0; i < data.labels.size(); ++i)
            if (data.labels[i] == 1) minority.push_back(i);
        if (minority.size() < 2 || minority.size() * 2 >= data.labels.size()) continue;

        SamplerConfig cfg;
        cfg.seed = seed;
        const auto out = smote(data, cfg);
        const long long M =
            std::llround(cfg.target_ratio * static_cast<double>(data.labels.size() - minority.size())) -
            static_cast<long long>(minority.size());
        long long synthetic = 0;
        for (std::size_t r = 0; r < out.origin.size(); ++r) {
            if (out.origin[r] != RowOrigin::Synthetic) continue;
            ++synthetic;
            const auto& prov = out.provenance[r];
            c.require(prov.has_value(), "synthetic row without provenance");
            if (!prov) break;
            const auto neighbors = reference::knn(prov->seed_row, minority, data.features, cfg.k_smote);
            c.require(std::find(neighbors.begin(), neighbors.end(), prov->neighbor_row) != neighbors.end(),
                      "neighbor outside the oracle k-NN list at seed " + std::to_string(seed));
            c.require(segment_ok(out.dataset.features.row(r), data.features.row(prov->seed_row),
                                 data.features.row(prov->neighbor_row)),
                      "segment property violated at seed " + std::to_string(seed));
        }
        c.require(synthetic == std::max(0LL, M), "emitted count differs from M at seed " + std::to_string(seed));
        if (!c.ok) return c;
    }

    // base allocation m = floor(M/T) with T_min = 100
    struct Case {
        std::size_t n_maj;
        long long M;
        std::size_t base;
        std::size_t topups;
    };
    for (const Case& k : {Case{150, 50, 0, 50}, Case{350, 250, 2, 50}, Case{1099, 999, 9, 99}}) {
        Rng rng(k.n_maj);
        std::vector<std::vector<double>> points;
        std::vector<int> labels;
        for (std::size_t i = 0; i < 100; ++i) {
            points.push_back({rng.uniform(), rng.uniform()});
            labels.push_back(1);
        }
        for (std::size_t i = 0; i < k.n_maj; ++i) {
            points.push_back({8.0 + rng.uniform(), rng.uniform()});
            labels.push_back(0);
        }
        const auto data = testutil::make_dataset(points, labels);
        SamplerConfig cfg;
        cfg.seed = 42;
        const auto out = smote(data, cfg);

        std::map<std::size_t, std::size_t> children;
        long long synthetic = 0;
        for (std::size_t r = 0; r < out.origin.size(); ++r) {
            if (out.origin[r] != RowOrigin::Synthetic) continue;
            ++synthetic;
            ++children[out.provenance[r]->seed_row];
        }
        c.require(synthetic == k.M, "emitted count != M for M=" + std::to_string(k.M));
        std::size_t topups = 0;
        for (const auto& [seed_row, count] : children) {
            c.require(count == k.base || count == k.base + 1,
                      "per-seed child count outside {m, m+1} for M=" + std::to_string(k.M));
            topups += count == k.base + 1;
        }
        c.require(topups == k.topups, "top-up row count wrong for M=" + std::to_string(k.M));
        if (k.base > 0)
            c.require(children.size() == 100, "base allocation skipped a minority row for M=" + std::to_string(k.M));
    }
    return c;
}

// ---------------------------------------------------------------------------
// 4. Cost-sensitive contract
// ---------------------------------------------------------------------------
Checker criterion_4() {
    Checker c;

    std::vector<int> labels(110, 0);
    for (int i = 0; i < 10; ++i) labels[static_cast<std::size_t>(i)] = 1;
    const auto w = class_weights(labels, WeightMode::Balanced);
    c.require(w[1] == 10.0 && w[0] == 1.0, "1:10 ratio did not give weights (10, 1)");

    // 40:60 tree vote overturned by weights (10, 1)
    ForestModel stub;
    stub.n_features = 1;
    stub.class_weights = {1.0, 10.0};
    for (int t = 0; t < 100; ++t) {
        Tree tree;
        TreeNode leaf;
        leaf.class_counts = t < 40 ? std::array<double, 2>{0.0, 1.0} : std::array<double, 2>{1.0, 0.0};
        tree.nodes.push_back(leaf);
        stub.trees.push_back(std::move(tree));
    }
    const std::vector<double> x{0.0};
    const auto pred = predict(stub, x);
    c.require(pred.label == 1 && pred.scores[1] == 400.0 && pred.scores[0] == 60.0,
              "weighted vote did not overturn the 40:60 split");

    // scaling both weights of a trained model changes nothing on a 1000-point batch
    const auto data = testutil::random_dataset(600, 4, 0.15, 99, 0.8);
    const auto batch = testutil::random_dataset(1000, 4, 0.15, 100, 0.8);
    ForestConfig cfg;
    cfg.n_trees = 30;
    cfg.seed = 7;
    const auto model = train_forest(data, cfg, {1.0, 8.0});
    const auto base = predict_batch(model, batch.features);
    for (double scale : {0.01, 5.0, 750.0}) {
        ForestModel rescaled = model;
        rescaled.class_weights = {scale, 8.0 * scale};
        c.require(predict_batch(rescaled, batch.features) == base,
                  "scaling both weights changed a prediction");
    }
    return c;
}

// ---------------------------------------------------------------------------
// 5. Forest competence on planted drivers and on two moons
// ---------------------------------------------------------------------------
Checker criterion_5() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();

    const auto dir = testutil::temp_dir("acc5");
    GeneratorSpec spec;
    spec.n_customers = 20000;
    spec.months = expand_month_range("201505:201510");
    spec.churn_rate = 0.07;
    spec.seed = 424242;
    generate_synthetic(spec, dir);

    const auto months = load_month_files(dir, {201505, 201506, 201507, 201508, 201509, 201510});
    const CleaningStats stats = fit_cleaning_stats(months.at(201507));
    WindowDataset train = build_window_pair(months, 201507, &stats);
    const WindowDataset test = build_window_pair(months, 201508, &stats, &train.encoder);

    ForestConfig forest_cfg;
    forest_cfg.seed = 1;
    const auto forest = train_forest(train.data, forest_cfg);
    const auto forest_metrics = evaluate(confusion(predict_batch(forest, test.data.features), test.data.labels));

    const auto lr = train_logreg(train.data);
    std::vector<int> lr_pred;
    lr_pred.reserve(test.data.features.rows);
    for (std::size_t r = 0; r < test.data.features.rows; ++r)
        lr_pred.push_back(predict_logreg(lr, test.data.features.row(r)).label);
    const auto lr_metrics = evaluate(confusion(lr_pred, test.data.labels));

    LabeledDataset permuted = train.data;
    Rng perm_rng(7);
    for (std::size_t i = permuted.labels.size(); i > 1; --i)
        std::swap(permuted.labels[i - 1], permuted.labels[perm_rng.index(i)]);
    const auto control = train_forest(permuted, forest_cfg);
    const auto control_metrics =
        evaluate(confusion(predict_batch(control, test.data.features), test.data.labels));

    const double forest_g = forest_metrics.g_mean.value_or(0.0);
    const double lr_g = lr_metrics.g_mean.value_or(0.0);
    const double control_g = control_metrics.g_mean.value_or(0.0);
    {
        std::ostringstream os;
        os << "G-mean forest " << forest_g << " vs lr " << lr_g << " vs permuted control " << control_g;
        std::printf("       criterion 5: %s\n", os.str().c_str());
    }
    c.require(forest_g > lr_g, "forest G-mean does not beat logistic regression");
    c.require(forest_g > control_g, "forest G-mean does not beat the label-permuted control");

    const auto moons_train = testutil::make_moons(2000, 0.3, 5);
    const auto moons_test = testutil::make_moons(700, 0.3, 6);
    ForestConfig moons_cfg;
    moons_cfg.seed = 2;
    const auto moons_model = train_forest(moons_train, moons_cfg);
    const auto moons_pred = predict_batch(moons_model, moons_test.features);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < moons_pred.size(); ++i) correct += moons_pred[i] == moons_test.labels[i];
    const double accuracy = static_cast<double>(correct) / static_cast<double>(moons_pred.size());
    c.require(accuracy >= 0.90, "moons held-out accuracy below 0.90");

    c.require(seconds_since(start) < 120.0, "runtime exceeded 120 s");
    return c;
}

// ---------------------------------------------------------------------------
// 6. Trend reproduction across the seven methods, 5 seeds, soft 4/5 gates
// ---------------------------------------------------------------------------
Checker criterion_6() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();

    const char* kMethods[7][2] = {
        {"none", "rf"},           {"random-under", "rf"},    {"tomek-under", "rf"},
        {"random-over", "rf"},    {"borderline-smote", "rf"}, {"smote-tomek", "rf"},
        {"none", "rf-cost-sensitive"},
    };

    int under_raises_recall = 0;
    int bsmote_ok = 0;
    int stomek_ok = 0;
    int none_precision_max = 0;
    const int n_seeds = 5;

    for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
        const auto dir = testutil::temp_dir("acc6_" + std::to_string(seed));
        GeneratorSpec spec;
        spec.n_customers = 5000;
        spec.months = expand_month_range("201505:201510");
        spec.churn_rate = 0.07;
        spec.seed = 1000 + seed;
        generate_synthetic(spec, dir);

        std::map<std::string, MetricSet> results;
        for (const auto& method : kMethods) {
            ExperimentConfig cfg;
            cfg.data_dir = dir;
            cfg.train_T = 201507;
            cfg.test_T = 201508;
            cfg.sampler = method[0];
            cfg.classifier = method[1];
            cfg.seed = seed;
            cfg.measure_timings = false;
            cfg.persist_model = false;
            const auto report = run_experiment(cfg);
            results[std::string(method[0]) + ":" + method[1]] = report.metrics;
        }

        const auto& none = results.at("none:rf");
        const auto& under = results.at("random-under:rf");
        const auto& bsmote = results.at("borderline-smote:rf");
        const auto& stomek = results.at("smote-tomek:rf");

        if (none.recall && under.recall && *under.recall > *none.recall) ++under_raises_recall;
        if (none.recall && bsmote.recall && bsmote.precision && under.precision &&
            *bsmote.recall > *none.recall && *bsmote.precision > *under.precision)
            ++bsmote_ok;
        if (none.recall && stomek.recall && stomek.precision && under.precision &&
            *stomek.recall > *none.recall && *stomek.precision > *under.precision)
            ++stomek_ok;

        bool is_max = none.precision.has_value();
        for (const auto& [name, metrics] : results) {
            if (name == "none:rf") continue;
            if (!metrics.precision || !none.precision || *metrics.precision > *none.precision) is_max = false;
        }
        if (is_max) ++none_precision_max;
    }

    std::printf("       criterion 6: under-recall %d/5, bsmote %d/5, smote-tomek %d/5, none-precision-max %d/5\n",
                under_raises_recall, bsmote_ok, stomek_ok, none_precision_max);
    c.require(under_raises_recall >= 4, "random under-sampling raised recall on fewer than 4/5 seeds");
    c.require(bsmote_ok >= 4, "borderline-SMOTE trend held on fewer than 4/5 seeds");
    c.require(stomek_ok >= 4, "SMOTE+Tomek trend held on fewer than 4/5 seeds");
    c.require(none_precision_max >= 4, "no-sampling precision was not the maximum on 4/5 seeds");
    c.require(seconds_since(start) < 900.0, "runtime exceeded 15 min");
    return c;
}

// ---------------------------------------------------------------------------
// 7. Determinism and leakage
// ---------------------------------------------------------------------------
Checker criterion_7() {
    Checker c;

    const auto dir = testutil::temp_dir("acc7");
    GeneratorSpec spec;
    spec.n_customers = 1200;
    spec.months = expand_month_range("201505:201510");
    spec.churn_rate = 0.07;
    spec.seed = 99;
    generate_synthetic(spec, dir);

    ExperimentConfig cfg;
    cfg.data_dir = dir;
    cfg.train_T = 201507;
    cfg.test_T = 201508;
    cfg.sampler = "borderline-smote";
    cfg.classifier = "rf";
    cfg.n_trees = 40;
    cfg.seed = 11;
    cfg.measure_timings = false;
    cfg.output_dir = testutil::temp_dir("acc7_out");

    const auto report_a = run_experiment(cfg);
    emit_report({report_a}, ReportFormat::Csv, cfg.output_dir / "a.csv");
    const auto report_b = run_experiment(cfg);
    emit_report({report_b}, ReportFormat::Csv, cfg.output_dir / "b.csv");
    c.require(slurp(cfg.output_dir / "a.csv") == slurp(cfg.output_dir / "b.csv"),
              "repeated runs emitted different report bytes");

    const auto model_path = cfg.output_dir / "model_201507_201508_borderline-smote_rf.txt";
    const std::string model_before = slurp(model_path);
    c.require(!model_before.empty(), "model file was not persisted");

    // perturb every test-month value cell of one numeric column
    const auto test_file = dir / "customers_201508.csv";
    auto table = read_csv(test_file);
    std::size_t col = 0;
    for (std::size_t i = 0; i < table.header.size(); ++i)
        if (table.header[i] == "arrears_amount") col = i;
    for (auto& row : table.rows) row[col] = "123456.78";
    write_csv(test_file, table.header, table.rows);

    run_experiment(cfg);
    c.require(slurp(model_path) == model_before, "perturbing test-month values changed the model file");
    return c;
}

// ---------------------------------------------------------------------------
// 8. Logistic-regression gradient vs central finite differences
// ---------------------------------------------------------------------------
Checker criterion_8() {
    Checker c;
    Rng rng(808);
    for (int instance = 0; instance < 20; ++instance) {
        const std::size_t n = 10 + rng.index(25);
        const std::size_t d = 1 + rng.index(6);
        LabeledDataset data;
        data.features = Matrix(n, d);
        data.labels.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
            data.labels[r] = static_cast<int>(rng.index(2));
            for (std::size_t cc = 0; cc < d; ++cc) data.features.at(r, cc) = 4.0 * rng.uniform() - 2.0;
        }
        std::vector<double> w(d);
        for (auto& v : w) v = 2.0 * rng.uniform() - 1.0;
        const double b = 2.0 * rng.uniform() - 1.0;

        std::vector<double> grad(d);
        double grad_b = 0.0;
        logreg_gradient(data.features, data.labels, w, b, grad, grad_b);

        const double h = 1e-5;
        for (std::size_t cc = 0; cc <= d; ++cc) {
            double analytic, fd;
            if (cc == d) {
                analytic = grad_b;
                fd = (logreg_loss(data.features, data.labels, w, b + h) -
                      logreg_loss(data.features, data.labels, w, b - h)) /
                     (2 * h);
            } else {
                analytic = grad[cc];
                auto w_hi = w, w_lo = w;
                w_hi[cc] += h;
                w_lo[cc] -= h;
                fd = (logreg_loss(data.features, data.labels, w_hi, b) -
                      logreg_loss(data.features, data.labels, w_lo, b)) /
                     (2 * h);
            }
            const double rel = std::abs(analytic - fd) / std::max(1e-3, std::abs(analytic) + std::abs(fd));
            c.require(rel <= 1e-5, "gradient mismatch at instance " + std::to_string(instance));
        }
    }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    const struct {
        int number;
        const char* name;
        std::function<Checker()> run;
    } criteria[] = {
        {1, "metric-formula reproduction of the published F/G values", criterion_1},
        {2, "knn / tomek / borderline match exhaustive-scan oracles (100 instances)", criterion_2},
        {3, "SMOTE segment property and m = floor(M/T) allocation", criterion_3},
        {4, "cost-sensitive weights, weighted vote, scale invariance", criterion_4},
        {5, "forest beats LR and permuted control; moons accuracy >= 0.90", criterion_5},
        {6, "sampling trend reproduction over 5 seeds (soft 4/5 gates)", criterion_6},
        {7, "byte-identical reports; test-month perturbation leaves the model file intact", criterion_7},
        {8, "LR analytic gradient matches central finite differences", criterion_8},
    };

    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (!selected.empty() && !selected.count(criterion.number)) continue;
        const auto start = std::chrono::steady_clock::now();
        Checker result;
        try {
            result = criterion.run();
        } catch (const std::exception& ex) {
            result.ok = false;
            result.detail = std::string("exception: ") + ex.what();
        }
        const double elapsed = seconds_since(start);
        if (result.ok) {
            std::printf("[PASS] criterion %d: %s (%.2fs)\n", criterion.number, criterion.name, elapsed);
        } else {
            std::printf("[FAIL] criterion %d: %s (%.2fs) -- %s\n", criterion.number, criterion.name, elapsed,
                        result.detail.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
