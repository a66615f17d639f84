#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "churn/baselines.hpp"
#include "helpers.hpp"

using namespace churn;
using namespace testutil;

namespace {

// central finite differences of the loss around (w, b)
double fd_partial(const Matrix& X, std::span<const int> y, std::vector<double> w, double b,
                  std::size_t coord, bool intercept, double h = 1e-5) {
    double lo, hi;
    if (intercept) {
        hi = logreg_loss(X, y, w, b + h);
        lo = logreg_loss(X, y, w, b - h);
    } else {
        w[coord] += h;
        hi = logreg_loss(X, y, w, b);
        w[coord] -= 2 * h;
        lo = logreg_loss(X, y, w, b);
    }
    return (hi - lo) / (2 * h);
}

LabeledDataset separable_1d(std::size_t per_class) {
    std::vector<std::vector<double>> points;
    std::vector<int> labels;
    for (std::size_t i = 0; i < per_class; ++i) {
        points.push_back({-1.0});
        labels.push_back(0);
        points.push_back({+1.0});
        labels.push_back(1);
    }
    return make_dataset(points, labels);
}

}  // namespace

TEST_CASE("logreg analytic gradient matches central finite differences") {
    Rng rng(33);
    for (int instance = 0; instance < 20; ++instance) {
        const std::size_t n = 8 + rng.index(20);
        const std::size_t d = 1 + rng.index(5);
        LabeledDataset data;
        data.features = Matrix(n, d);
        data.labels.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
            data.labels[r] = static_cast<int>(rng.index(2));
            for (std::size_t c = 0; c < d; ++c) data.features.at(r, c) = 4.0 * rng.uniform() - 2.0;
        }
        std::vector<double> w(d);
        for (auto& v : w) v = 2.0 * rng.uniform() - 1.0;
        const double b = 2.0 * rng.uniform() - 1.0;

        std::vector<double> grad(d);
        double grad_b = 0.0;
        logreg_gradient(data.features, data.labels, w, b, grad, grad_b);

        for (std::size_t c = 0; c < d; ++c) {
            const double fd = fd_partial(data.features, data.labels, w, b, c, false);
            const double rel = std::abs(grad[c] - fd) / std::max(1e-3, std::abs(grad[c]) + std::abs(fd));
            CHECK(rel <= 1e-5);
        }
        const double fd_b = fd_partial(data.features, data.labels, w, b, 0, true);
        CHECK(std::abs(grad_b - fd_b) / std::max(1e-3, std::abs(grad_b) + std::abs(fd_b)) <= 1e-5);
    }
}

TEST_CASE("train_logreg") {
    SUBCASE("separable data drives the coefficient positive") {
        const auto data = separable_1d(50);
        const auto model = train_logreg(data);
        REQUIRE(model.coefficients.size() == 1);
        CHECK(model.coefficients[0] > 0.0);
    }

    SUBCASE("stopping contract: converged or capped, and it is reported") {
        const auto data = separable_1d(50);
        LinearModelConfig cfg;
        cfg.max_iterations = 500;
        const auto model = train_logreg(data, cfg);
        if (!model.converged) CHECK(model.iterations <= cfg.max_iterations);
        // convergence on separable data never happens (weights diverge), the cap reports
        std::vector<double> grad(1);
        double grad_b = 0.0;
        logreg_gradient(data.features, data.labels, model.coefficients, model.intercept, grad, grad_b);
        if (model.converged)
            CHECK(std::max(std::abs(grad[0]), std::abs(grad_b)) < cfg.tolerance);
    }

    SUBCASE("training loss never increases across iteration prefixes") {
        const auto data = random_dataset(60, 3, 0.4, 12, 1.0);
        double previous = logreg_loss(data.features, data.labels, std::vector<double>(3, 0.0), 0.0);
        for (std::size_t iters = 1; iters <= 15; ++iters) {
            LinearModelConfig cfg;
            cfg.max_iterations = iters;
            const auto model = train_logreg(data, cfg);
            const double loss = logreg_loss(data.features, data.labels, model.coefficients, model.intercept);
            CHECK(loss <= previous + 1e-12);
            previous = loss;
        }
    }

    SUBCASE("deterministic") {
        const auto data = random_dataset(40, 2, 0.5, 13, 1.0);
        CHECK(train_logreg(data) == train_logreg(data));
    }

    SUBCASE("rejects single-class or non-finite input") {
        auto data = separable_1d(5);
        std::fill(data.labels.begin(), data.labels.end(), 1);
        CHECK_THROWS(train_logreg(data));
        auto nan_data = separable_1d(5);
        nan_data.features.at(0, 0) = std::nan("");
        CHECK_THROWS(train_logreg(nan_data));
    }
}

TEST_CASE("predict_logreg") {
    LinearModel model;
    model.kind = LinearModel::Kind::Logistic;
    model.coefficients = {1.0};
    model.intercept = 0.0;

    SUBCASE("decision value zero means p = 0.5 and class 1") {
        const std::vector<double> x{0.0};
        const auto pred = predict_logreg(model, x);
        CHECK(pred.probability == 0.5);
        CHECK(pred.label == 1);
    }
    SUBCASE("large positive intercept saturates p toward 1") {
        LinearModel flat;
        flat.coefficients = {0.0};
        flat.intercept = 10.0;
        const std::vector<double> x{-5.0};
        CHECK(predict_logreg(flat, x).probability > 0.999);
    }
    SUBCASE("probability is monotone along +w") {
        double previous = 0.0;
        for (double x = -3.0; x <= 3.0; x += 0.5) {
            const std::vector<double> point{x};
            const double p = predict_logreg(model, point).probability;
            CHECK(p > previous);
            previous = p;
        }
    }
    SUBCASE("dimension mismatch is an error") {
        const std::vector<double> x{1.0, 2.0};
        CHECK_THROWS(predict_logreg(model, x));
    }
}

TEST_CASE("train_linear_svm") {
    SUBCASE("defaults match the published grid") {
        CHECK(kDefaultSvmC == 100.0);
        REQUIRE(kSvmCGrid.size() == 9);
        double expected = 1e-4;
        for (double c : kSvmCGrid) {
            CHECK(c == doctest::Approx(expected));
            expected *= 10.0;
        }
    }

    SUBCASE("separable blobs reach training accuracy 1.0 with nonnegative margins") {
        const auto data = make_blobs(60, 2.0, 21);
        const auto model = train_linear_svm(data);
        std::size_t correct = 0;
        for (std::size_t r = 0; r < data.features.rows; ++r) {
            const auto x = data.features.row(r);
            correct += predict_svm(model, x) == data.labels[r];
            const double y = data.labels[r] ? 1.0 : -1.0;
            double z = model.intercept;
            for (std::size_t c = 0; c < x.size(); ++c) z += model.coefficients[c] * x[c];
            CHECK(y * z >= 0.0);
        }
        CHECK(correct == data.features.rows);
    }

    SUBCASE("returned objective never exceeds the first iterate's") {
        const auto data = random_dataset(80, 3, 0.4, 31, 1.0);
        LinearModelConfig one_epoch;
        one_epoch.svm_epochs = 1;
        const auto first = train_linear_svm(data, 100.0, one_epoch);
        const auto full = train_linear_svm(data, 100.0);
        const double obj_first =
            svm_objective(data.features, data.labels, first.coefficients, first.intercept, 100.0);
        const double obj_full =
            svm_objective(data.features, data.labels, full.coefficients, full.intercept, 100.0);
        CHECK(obj_full <= obj_first + 1e-12);
    }

    SUBCASE("deterministic") {
        const auto data = random_dataset(50, 2, 0.5, 41, 1.0);
        CHECK(train_linear_svm(data, 10.0) == train_linear_svm(data, 10.0));
    }

    SUBCASE("rejects non-positive C and non-finite input") {
        const auto data = make_blobs(10, 2.0, 51);
        CHECK_THROWS(train_linear_svm(data, 0.0));
        auto bad = data;
        bad.features.at(0, 0) = std::numeric_limits<double>::infinity();
        CHECK_THROWS(train_linear_svm(bad, 1.0));
    }
}

TEST_CASE("predict_svm") {
    LinearModel model;
    model.kind = LinearModel::Kind::Svm;
    model.coefficients = {1.0, 0.0};
    model.intercept = 0.0;

    SUBCASE("a point on the hyperplane predicts class 1") {
        const std::vector<double> x{0.0, 3.0};
        CHECK(predict_svm(model, x) == 1);
    }
    SUBCASE("negating the model flips every strict prediction") {
        LinearModel negated = model;
        negated.coefficients = {-1.0, 0.0};
        Rng rng(61);
        for (int i = 0; i < 50; ++i) {
            const std::vector<double> x{4.0 * rng.uniform() - 2.0, rng.uniform()};
            double z = model.intercept + model.coefficients[0] * x[0];
            if (z == 0.0) continue;
            CHECK(predict_svm(model, x) != predict_svm(negated, x));
        }
    }
    SUBCASE("appending a zero-weight feature changes nothing") {
        LinearModel wider = model;
        wider.coefficients.push_back(0.0);
        Rng rng(62);
        for (int i = 0; i < 50; ++i) {
            const std::vector<double> x{rng.uniform() - 0.5, rng.uniform()};
            const std::vector<double> x3{x[0], x[1], rng.uniform()};
            CHECK(predict_svm(model, x) == predict_svm(wider, x3));
        }
    }
}

TEST_CASE("linear model persistence") {
    const auto data = make_blobs(30, 1.5, 71);
    const auto model = train_linear_svm(data, 10.0);
    const auto dir = temp_dir("linear");
    save_linear(model, dir / "model.txt");
    const auto loaded = load_linear(dir / "model.txt");
    CHECK(loaded.kind == model.kind);
    CHECK(loaded.coefficients == model.coefficients);
    CHECK(loaded.intercept == model.intercept);
    CHECK(loaded.C == model.C);
}
