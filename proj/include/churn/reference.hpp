#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "churn/matrix.hpp"
#include "churn/sampler.hpp"

// Serial exhaustive-scan implementations, written independently of the
// OpenMP kernels in sampler.cpp. Tests use them as oracles; churn-bench
// compares the two paths for speed and agreement.
namespace churn::reference {

std::vector<std::size_t> knn(std::size_t query_index, std::span<const std::size_t> pool,
                             const Matrix& features, std::size_t k);

// Literal O(n^3) check of the Tomek definition: (i, j) is a link iff no
// example k has d(i,k) < d(i,j) or d(k,j) < d(i,j).
std::vector<std::pair<std::size_t, std::size_t>> tomek_links(const Matrix& features,
                                                             const std::vector<int>& labels);

BorderlinePartition borderline_classify(const Matrix& features, const std::vector<int>& labels,
                                        std::size_t m);

}  // namespace churn::reference
