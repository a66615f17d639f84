#include "churn/reference.hpp"

#include <algorithm>
#include <stdexcept>

// Everything here is deliberately the obvious quadratic/cubic scan with a
// full sort; keep it independent of sampler.cpp.
namespace churn::reference {

namespace {

double dist2(const Matrix& m, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) {
        const double d = m.at(a, c) - m.at(b, c);
        s += d * d;
    }
    return s;
}

}  // namespace

std::vector<std::size_t> knn(std::size_t query_index, std::span<const std::size_t> pool,
                             const Matrix& features, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t row : pool) {
        if (row == query_index) continue;
        scored.emplace_back(dist2(features, query_index, row), row);
    }
    if (scored.empty()) throw std::invalid_argument("knn: empty pool after self-exclusion");
    std::sort(scored.begin(), scored.end());
    if (scored.size() > k) scored.resize(k);
    std::vector<std::size_t> out;
    out.reserve(scored.size());
    for (const auto& [d, row] : scored) out.push_back(row);
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> tomek_links(const Matrix& features,
                                                             const std::vector<int>& labels) {
    const std::size_t n = features.rows;
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (labels[i] == labels[j]) continue;
            const double dij = dist2(features, i, j);
            bool broken = false;
            for (std::size_t k = 0; k < n && !broken; ++k) {
                if (k == i || k == j) continue;
                if (dist2(features, i, k) < dij || dist2(features, k, j) < dij) broken = true;
            }
            if (!broken) links.emplace_back(i, j);
        }
    }
    return links;
}

BorderlinePartition borderline_classify(const Matrix& features, const std::vector<int>& labels,
                                        std::size_t m) {
    const std::size_t n = features.rows;
    if (n < m + 1) throw std::invalid_argument("borderline_classify: fewer than m other rows");

    std::size_t n_pos = 0;
    for (int label : labels) n_pos += label != 0;
    if (n_pos == 0 || n_pos == n) throw std::invalid_argument("borderline_classify: need both classes");
    const int minority_label = n_pos <= n - n_pos ? 1 : 0;

    BorderlinePartition part;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != minority_label) continue;
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            scored.emplace_back(dist2(features, i, j), j);
        }
        std::sort(scored.begin(), scored.end());
        std::size_t majority = 0;
        for (std::size_t r = 0; r < m; ++r)
            if (labels[scored[r].second] != minority_label) ++majority;
        if (majority == m)
            part.noise.push_back(i);
        else if (2 * majority >= m)
            part.danger.push_back(i);
        else
            part.safe.push_back(i);
    }
    return part;
}

}  // namespace churn::reference
