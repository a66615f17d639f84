#include "churn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace churn {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^u) without overflow
double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double dot_row(const Matrix& features, std::size_t r, std::span<const double> w) {
    const auto row = features.row(r);
    double z = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) z += row[c] * w[c];
    return z;
}

void check_finite(const Matrix& features) {
    for (double v : features.data)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
}

void check_two_classes(std::span<const int> labels) {
    std::size_t n1 = 0;
    for (int label : labels) n1 += label != 0;
    if (n1 == 0 || n1 == labels.size()) throw std::invalid_argument("training needs both classes");
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

double logreg_loss(const Matrix& features, std::span<const int> labels,
                   std::span<const double> coefficients, double intercept) {
    const std::size_t n = features.rows;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = dot_row(features, i, coefficients) + intercept;
        // mean negative log-likelihood: softplus(-z) + (1-y) z
        loss += softplus(-z) + (labels[i] ? 0.0 : z);
    }
    return loss / static_cast<double>(n);
}

void logreg_gradient(const Matrix& features, std::span<const int> labels,
                     std::span<const double> coefficients, double intercept,
                     std::span<double> grad_coefficients, double& grad_intercept) {
    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    std::fill(grad_coefficients.begin(), grad_coefficients.end(), 0.0);
    grad_intercept = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = dot_row(features, i, coefficients) + intercept;
        const double residual = sigmoid(z) - (labels[i] ? 1.0 : 0.0);
        const auto row = features.row(i);
        for (std::size_t c = 0; c < d; ++c) grad_coefficients[c] += residual * row[c];
        grad_intercept += residual;
    }
    for (std::size_t c = 0; c < d; ++c) grad_coefficients[c] /= static_cast<double>(n);
    grad_intercept /= static_cast<double>(n);
}

LinearModel train_logreg(const LabeledDataset& data, const LinearModelConfig& config) {
    check_finite(data.features);
    check_two_classes(data.labels);
    const std::size_t d = data.features.cols;

    LinearModel model;
    model.kind = LinearModel::Kind::Logistic;
    model.coefficients.assign(d, 0.0);
    model.intercept = 0.0;

    std::vector<double> grad(d, 0.0);
    double grad_b = 0.0;
    double loss = logreg_loss(data.features, data.labels, model.coefficients, model.intercept);

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        logreg_gradient(data.features, data.labels, model.coefficients, model.intercept, grad, grad_b);

        double inf_norm = std::abs(grad_b);
        for (double g : grad) inf_norm = std::max(inf_norm, std::abs(g));
        if (inf_norm < config.tolerance) {
            model.converged = true;
            model.iterations = iter;
            return model;
        }

        // step halving keeps the training loss monotone nonincreasing
        double step = config.step_size;
        std::vector<double> next(d, 0.0);
        double next_b = 0.0;
        double next_loss = loss;
        for (int halving = 0; halving < 50; ++halving) {
            for (std::size_t c = 0; c < d; ++c) next[c] = model.coefficients[c] - step * grad[c];
            next_b = model.intercept - step * grad_b;
            next_loss = logreg_loss(data.features, data.labels, next, next_b);
            if (next_loss <= loss) break;
            step *= 0.5;
        }
        if (next_loss > loss) break;  // no improving step, stop early
        model.coefficients = next;
        model.intercept = next_b;
        loss = next_loss;
        model.iterations = iter + 1;
    }
    return model;
}

LogregPrediction predict_logreg(const LinearModel& model, std::span<const double> x) {
    if (x.size() != model.coefficients.size()) throw std::invalid_argument("predict_logreg: dimension mismatch");
    double z = model.intercept;
    for (std::size_t c = 0; c < x.size(); ++c) z += model.coefficients[c] * x[c];
    LogregPrediction pred;
    pred.probability = sigmoid(z);
    pred.label = pred.probability >= 0.5 ? 1 : 0;
    return pred;
}

// ---------------------------------------------------------------------------
// Linear SVM
// ---------------------------------------------------------------------------

double svm_objective(const Matrix& features, std::span<const int> labels,
                     std::span<const double> coefficients, double intercept, double C) {
    double w2 = 0.0;
    for (double w : coefficients) w2 += w * w;
    double hinge = 0.0;
    for (std::size_t i = 0; i < features.rows; ++i) {
        const double y = labels[i] ? 1.0 : -1.0;
        const double margin = y * (dot_row(features, i, coefficients) + intercept);
        hinge += std::max(0.0, 1.0 - margin);
    }
    return 0.5 * w2 + C * hinge;
}

LinearModel train_linear_svm(const LabeledDataset& data, double C, const LinearModelConfig& config) {
    check_finite(data.features);
    check_two_classes(data.labels);
    if (!(C > 0.0)) throw std::invalid_argument("svm: C must be positive");
    const std::size_t n = data.features.rows;
    const std::size_t d = data.features.cols;

    LinearModel model;
    model.kind = LinearModel::Kind::Svm;
    model.C = C;
    model.coefficients.assign(d, 0.0);
    model.intercept = 0.0;

    // scaled objective (lambda/2)||w||^2 + (1/n) sum hinge, lambda = 1/(nC);
    // full-batch sub-gradient with the 1/(lambda t) schedule
    const double lambda = 1.0 / (static_cast<double>(n) * C);
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    std::vector<double> best_w = w;
    double best_b = b;
    double best_objective = svm_objective(data.features, data.labels, w, b, C);

    std::vector<double> grad(d, 0.0);
    for (std::size_t epoch = 1; epoch <= config.svm_epochs; ++epoch) {
        for (std::size_t c = 0; c < d; ++c) grad[c] = lambda * w[c];
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = data.labels[i] ? 1.0 : -1.0;
            if (y * (dot_row(data.features, i, w) + b) < 1.0) {
                const auto row = data.features.row(i);
                for (std::size_t c = 0; c < d; ++c) grad[c] -= y * row[c] / static_cast<double>(n);
                grad_b -= y / static_cast<double>(n);
            }
        }
        const double step = 1.0 / (lambda * static_cast<double>(epoch));
        for (std::size_t c = 0; c < d; ++c) w[c] -= step * grad[c];
        b -= step * grad_b;

        const double objective = svm_objective(data.features, data.labels, w, b, C);
        if (objective < best_objective) {
            best_objective = objective;
            best_w = w;
            best_b = b;
        }
    }

    model.coefficients = std::move(best_w);
    model.intercept = best_b;
    model.iterations = config.svm_epochs;
    model.converged = true;
    return model;
}

int predict_svm(const LinearModel& model, std::span<const double> x) {
    if (x.size() != model.coefficients.size()) throw std::invalid_argument("predict_svm: dimension mismatch");
    double z = model.intercept;
    for (std::size_t c = 0; c < x.size(); ++c) z += model.coefficients[c] * x[c];
    return z >= 0.0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_linear(const LinearModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "churn-linear 1\n";
    out << "kind " << (model.kind == LinearModel::Kind::Logistic ? "logistic" : "svm") << '\n';
    out << "c " << model.C << '\n';
    out << "intercept " << model.intercept << '\n';
    out << "coefficients " << model.coefficients.size() << '\n';
    for (double w : model.coefficients) out << w << '\n';
}

LinearModel load_linear(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());
    auto expect = [&](const char* keyword) {
        std::string word;
        if (!(in >> word) || word != keyword)
            throw std::runtime_error("linear model file: expected '" + std::string(keyword) + "'");
    };
    expect("churn-linear");
    int version = 0;
    in >> version;
    if (version != 1) throw std::runtime_error("linear model file: unsupported version");
    LinearModel model;
    expect("kind");
    std::string kind;
    in >> kind;
    model.kind = kind == "svm" ? LinearModel::Kind::Svm : LinearModel::Kind::Logistic;
    expect("c");
    in >> model.C;
    expect("intercept");
    in >> model.intercept;
    expect("coefficients");
    std::size_t d = 0;
    in >> d;
    model.coefficients.resize(d);
    for (std::size_t c = 0; c < d; ++c) in >> model.coefficients[c];
    if (!in) throw std::runtime_error("linear model file: truncated");
    return model;
}

}  // namespace churn
