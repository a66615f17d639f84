#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "churn/dataset.hpp"
#include "churn/matrix.hpp"

namespace churn {

// Logistic-regression and linear-SVM comparison classifiers. Both train
// full-batch and deterministically; features are expected standardized.

struct LinearModelConfig {
    std::size_t max_iterations = 500;  // logistic regression
    double step_size = 1.0;
    double tolerance = 1e-6;  // gradient infinity-norm stop
    std::size_t svm_epochs = 200;
};

struct LinearModel {
    enum class Kind { Logistic, Svm };
    Kind kind = Kind::Logistic;
    std::vector<double> coefficients;
    double intercept = 0.0;
    double C = 100.0;  // svm penalty
    bool converged = false;
    std::size_t iterations = 0;

    bool operator==(const LinearModel&) const = default;
};

inline constexpr std::array<double, 9> kSvmCGrid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
inline constexpr double kDefaultSvmC = 100.0;

// Mean negative binomial log-likelihood and its gradient; exposed so the
// finite-difference oracle can check the analytic gradient directly.
double logreg_loss(const Matrix& features, std::span<const int> labels,
                   std::span<const double> coefficients, double intercept);
void logreg_gradient(const Matrix& features, std::span<const int> labels,
                     std::span<const double> coefficients, double intercept,
                     std::span<double> grad_coefficients, double& grad_intercept);

// Gradient ascent on the log-likelihood with a step-halving guard, so the
// training loss never increases across iterations.
LinearModel train_logreg(const LabeledDataset& data, const LinearModelConfig& config = {});

struct LogregPrediction {
    int label = 0;
    double probability = 0.0;
};

// p = sigmoid(w.x + b); class 1 iff p >= 0.5.
LogregPrediction predict_logreg(const LinearModel& model, std::span<const double> x);

// (1/2)||w||^2 + C * sum hinge(1 - y_i (w.x_i + b)) over labels mapped to +-1.
double svm_objective(const Matrix& features, std::span<const int> labels,
                     std::span<const double> coefficients, double intercept, double C);

// Deterministic full-batch sub-gradient descent with a 1/(lambda t) schedule
// for a fixed epoch count; returns the iterate with the lowest objective.
LinearModel train_linear_svm(const LabeledDataset& data, double C = kDefaultSvmC,
                             const LinearModelConfig& config = {});

// class 1 iff w.x + b >= 0 (boundary inclusive, mirroring the LR rule).
int predict_svm(const LinearModel& model, std::span<const double> x);

void save_linear(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_linear(const std::filesystem::path& path);

}  // namespace churn
