#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>

namespace churn {

// Churn is the positive class throughout.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual);

// Zero denominators yield the disengaged optional, never a division fault;
// reports render those as "n/a".
struct MetricSet {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> tpr;  // always equals recall
    std::optional<double> tnr;
    std::optional<double> f_measure;
    std::optional<double> g_mean;
};

MetricSet evaluate(const ConfusionMatrix& cm);

// F and G from already-computed rates; lets published (precision, recall,
// TNR) triples be fed through the same formulas.
MetricSet metrics_from_rates(std::optional<double> precision, std::optional<double> recall,
                             std::optional<double> tnr);

struct PhaseTimings {
    std::optional<double> sampling_seconds;  // absent for sampler "none", rendered "-"
    double training_seconds = 0.0;
    double total_seconds = 0.0;
};

// Wall-clock seconds for the body.
template <typename F>
auto time_phase(F&& body, double& seconds) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(body())>) {
        body();
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } else {
        auto result = body();
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    }
}

}  // namespace churn
