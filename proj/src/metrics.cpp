#include "churn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace churn {

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size()) throw std::invalid_argument("confusion: length mismatch");
    if (predicted.empty()) throw std::invalid_argument("confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0;
        const bool a = actual[i] != 0;
        if (p && a)
            ++cm.tp;
        else if (p && !a)
            ++cm.fp;
        else if (!p && a)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

MetricSet metrics_from_rates(std::optional<double> precision, std::optional<double> recall,
                             std::optional<double> tnr) {
    MetricSet m;
    m.precision = precision;
    m.recall = recall;
    m.tpr = recall;
    m.tnr = tnr;
    if (precision && recall && (*precision + *recall) > 0.0)
        m.f_measure = 2.0 * *recall * *precision / (*recall + *precision);
    if (recall && tnr) m.g_mean = std::sqrt(*recall * *tnr);
    return m;
}

MetricSet evaluate(const ConfusionMatrix& cm) {
    auto rate = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    return metrics_from_rates(rate(cm.tp, cm.tp + cm.fp), rate(cm.tp, cm.tp + cm.fn),
                              rate(cm.tn, cm.tn + cm.fp));
}

}  // namespace churn
