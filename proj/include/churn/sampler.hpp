#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "churn/dataset.hpp"
#include "churn/matrix.hpp"

namespace churn {

// ---------------------------------------------------------------------------
// Class-rebalancing techniques. All distances are Euclidean over the
// standardized feature matrix. Every sampler is pure given (data, cfg): the
// per-row RNG streams are derived from the seed, so the parallel neighbor
// scans give results independent of evaluation order.
// ---------------------------------------------------------------------------

struct SamplerConfig {
    std::size_t k_smote = 5;        // neighbor count for interpolation
    std::size_t m_borderline = 5;   // neighbor count for danger detection
    double target_ratio = 1.0;      // desired minority:majority ratio, in (0, 1]
    std::uint64_t seed = 0;
};

enum class RowOrigin : std::uint8_t { Original, Synthetic, Replicated };

struct SyntheticProvenance {
    std::size_t seed_row;      // minority example the synthetic row grew from
    std::size_t neighbor_row;  // the neighbor it interpolated toward
};

struct ResampleOutput {
    LabeledDataset dataset;
    std::vector<RowOrigin> origin;                             // per surviving row
    std::vector<std::optional<SyntheticProvenance>> provenance;  // aligned with origin
    std::vector<std::size_t> removed;  // row indices into the pre-removal set, ascending
    std::uint64_t seed = 0;
    std::string warning;  // set when borderline-SMOTE finds no danger examples
};

// The k pool members nearest to the query row, self excluded, ties broken by
// ascending row index. Returns all of them when fewer than k exist.
std::vector<std::size_t> knn(std::size_t query_index, std::span<const std::size_t> pool,
                             const Matrix& features, std::size_t k);

// x_new = x_i + alpha * (x_hat - x_i)
std::vector<double> interpolate(std::span<const double> xi, std::span<const double> xhat, double alpha);

ResampleOutput smote(const LabeledDataset& data, const SamplerConfig& cfg);

struct BorderlinePartition {
    std::vector<std::size_t> safe;
    std::vector<std::size_t> danger;
    std::vector<std::size_t> noise;
};

// Partition of the minority rows by majority share among their m nearest
// neighbors over the whole set: danger iff m/2 <= |S_maj| < m, noise iff
// |S_maj| = m, safe otherwise.
BorderlinePartition borderline_classify(const LabeledDataset& data, std::size_t m);

ResampleOutput borderline_smote(const LabeledDataset& data, const SamplerConfig& cfg);

// Cross-class pairs where no third example is strictly closer to either
// endpoint than they are to each other. Pairs returned with first < second,
// sorted ascending.
std::vector<std::pair<std::size_t, std::size_t>> tomek_links(const LabeledDataset& data);

ResampleOutput smote_tomek(const LabeledDataset& data, const SamplerConfig& cfg);
ResampleOutput random_under(const LabeledDataset& data, const SamplerConfig& cfg);
ResampleOutput tomek_under(const LabeledDataset& data);
ResampleOutput random_over(const LabeledDataset& data, const SamplerConfig& cfg);

// ---------------------------------------------------------------------------
// Selection by name (report columns use the same strings)
// ---------------------------------------------------------------------------

enum class SamplerKind { None, RandomUnder, TomekUnder, RandomOver, Smote, BorderlineSmote, SmoteTomek };

SamplerKind sampler_from_name(std::string_view name);
std::string_view sampler_name(SamplerKind kind);
ResampleOutput apply_sampler(SamplerKind kind, const LabeledDataset& data, const SamplerConfig& cfg);

}  // namespace churn
