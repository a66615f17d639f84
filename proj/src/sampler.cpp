#include "churn/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "churn/rng.hpp"

namespace churn {

namespace {

// stream tags for deriving independent RNG streams from one sampler seed
constexpr std::uint64_t kStreamSmoteRow = 0xA1;
constexpr std::uint64_t kStreamSmoteGlobal = 0xA2;
constexpr std::uint64_t kStreamUnder = 0xB1;
constexpr std::uint64_t kStreamOver = 0xB2;

void validate_config(const SamplerConfig& cfg) {
    if (cfg.k_smote < 1) throw std::invalid_argument("k_smote must be >= 1");
    if (cfg.m_borderline < 1) throw std::invalid_argument("m_borderline must be >= 1");
    if (!(cfg.target_ratio > 0.0) || cfg.target_ratio > 1.0)
        throw std::invalid_argument("target_ratio must be in (0, 1]");
}

struct ClassSplit {
    int minority_label = 1;
    std::vector<std::size_t> minority_rows;
    std::vector<std::size_t> majority_rows;
};

ClassSplit split_classes(const LabeledDataset& data) {
    std::size_t n_pos = 0;
    for (int label : data.labels) n_pos += label != 0;
    ClassSplit split;
    split.minority_label = (n_pos <= data.labels.size() - n_pos) ? 1 : 0;
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        const bool minority = (data.labels[i] != 0) == (split.minority_label == 1);
        (minority ? split.minority_rows : split.majority_rows).push_back(i);
    }
    return split;
}

ResampleOutput passthrough(const LabeledDataset& data, std::uint64_t seed) {
    ResampleOutput out;
    out.dataset = data;
    out.origin.assign(data.labels.size(), RowOrigin::Original);
    out.provenance.assign(data.labels.size(), std::nullopt);
    out.seed = seed;
    return out;
}

// required synthetic count to reach target_ratio
long long oversample_deficit(std::size_t n_min, std::size_t n_maj, double target_ratio) {
    const long long required = std::llround(target_ratio * static_cast<double>(n_maj));
    return required - static_cast<long long>(n_min);
}

ResampleOutput remove_rows(const LabeledDataset& data, const std::vector<RowOrigin>& origin,
                           const std::vector<std::optional<SyntheticProvenance>>& provenance,
                           std::vector<std::size_t> removed, std::uint64_t seed) {
    std::sort(removed.begin(), removed.end());
    removed.erase(std::unique(removed.begin(), removed.end()), removed.end());

    ResampleOutput out;
    out.seed = seed;
    out.removed = removed;
    out.dataset.columns = data.columns;
    out.dataset.standardization = data.standardization;
    out.dataset.features = Matrix(0, data.features.cols);
    std::size_t next_removed = 0;
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        if (next_removed < removed.size() && removed[next_removed] == i) {
            ++next_removed;
            continue;
        }
        out.dataset.features.append_row(data.features.row(i));
        out.dataset.labels.push_back(data.labels[i]);
        out.origin.push_back(origin[i]);
        out.provenance.push_back(provenance[i]);
    }
    return out;
}

// SMOTE core. When `seeds` is null every minority row is a seed example;
// borderline-SMOTE passes the danger subset. M is always the deficit of the
// full minority class and neighbors always come from the full minority class.
ResampleOutput smote_impl(const LabeledDataset& data, const SamplerConfig& cfg,
                          const std::vector<std::size_t>* seeds_override) {
    validate_config(cfg);
    const ClassSplit split = split_classes(data);
    const std::size_t n_min = split.minority_rows.size();
    const std::size_t n_maj = split.majority_rows.size();
    if (n_min < 2) throw std::invalid_argument("smote needs at least 2 minority examples");

    const long long deficit = oversample_deficit(n_min, n_maj, cfg.target_ratio);
    if (deficit <= 0) return passthrough(data, cfg.seed);
    const std::size_t M = static_cast<std::size_t>(deficit);

    const std::vector<std::size_t>& seeds = seeds_override ? *seeds_override : split.minority_rows;
    const std::size_t n_seeds = seeds.size();

    // per-seed allocation: m base children each, remainder topped up one-each
    // to uniformly chosen seeds; when M < n_seeds only M seeds emit one child
    std::size_t base = 0;
    std::vector<std::size_t> children(n_seeds, 0);
    Rng global(mix_seed(cfg.seed, kStreamSmoteGlobal));
    if (M >= n_seeds) {
        base = M / n_seeds;
        const std::size_t remainder = M - base * n_seeds;
        children.assign(n_seeds, base);
        for (std::size_t pos : global.sample_without_replacement(n_seeds, remainder)) ++children[pos];
    } else {
        for (std::size_t pos : global.sample_without_replacement(n_seeds, M)) children[pos] = 1;
    }

    std::vector<std::size_t> offsets(n_seeds + 1, 0);
    for (std::size_t p = 0; p < n_seeds; ++p) offsets[p + 1] = offsets[p] + children[p];

    const std::size_t d = data.features.cols;
    Matrix synthetic(M, d);
    std::vector<SyntheticProvenance> provenance(M);

#pragma omp parallel for schedule(dynamic)
    for (long long pi = 0; pi < static_cast<long long>(n_seeds); ++pi) {
        const auto p = static_cast<std::size_t>(pi);
        if (children[p] == 0) continue;
        const std::size_t seed_row = seeds[p];
        const auto neighbors = knn(seed_row, split.minority_rows, data.features, cfg.k_smote);
        Rng rng(mix_seed(mix_seed(cfg.seed, kStreamSmoteRow), seed_row));

        std::vector<std::size_t> picked;
        picked.reserve(children[p]);
        if (children[p] <= neighbors.size()) {
            for (std::size_t pos : rng.sample_without_replacement(neighbors.size(), children[p]))
                picked.push_back(neighbors[pos]);
        } else {
            for (std::size_t c = 0; c < children[p]; ++c) picked.push_back(neighbors[rng.index(neighbors.size())]);
        }

        for (std::size_t c = 0; c < children[p]; ++c) {
            const double alpha = rng.uniform();
            const auto xi = data.features.row(seed_row);
            const auto xhat = data.features.row(picked[c]);
            auto out_row = synthetic.row(offsets[p] + c);
            for (std::size_t col = 0; col < d; ++col) out_row[col] = xi[col] + alpha * (xhat[col] - xi[col]);
            provenance[offsets[p] + c] = {seed_row, picked[c]};
        }
    }

    ResampleOutput out = passthrough(data, cfg.seed);
    for (std::size_t r = 0; r < M; ++r) {
        out.dataset.features.append_row(synthetic.row(r));
        out.dataset.labels.push_back(split.minority_label);
        out.origin.push_back(RowOrigin::Synthetic);
        out.provenance.push_back(provenance[r]);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// k nearest neighbors
// ---------------------------------------------------------------------------

std::vector<std::size_t> knn(std::size_t query_index, std::span<const std::size_t> pool,
                             const Matrix& features, std::size_t k) {
    if (pool.empty()) throw std::invalid_argument("knn: empty pool");
    const auto query = features.row(query_index);

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(pool.size());
    for (std::size_t row : pool) {
        if (row == query_index) continue;
        scored.emplace_back(squared_distance(query, features.row(row)), row);
    }
    if (scored.empty()) throw std::invalid_argument("knn: empty pool after self-exclusion");

    // ties break by ascending row index via the pair's second member
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end());
    std::vector<std::size_t> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
    return out;
}

std::vector<double> interpolate(std::span<const double> xi, std::span<const double> xhat, double alpha) {
    std::vector<double> out(xi.size());
    for (std::size_t c = 0; c < xi.size(); ++c) out[c] = xi[c] + alpha * (xhat[c] - xi[c]);
    return out;
}

// ---------------------------------------------------------------------------
// SMOTE family
// ---------------------------------------------------------------------------

ResampleOutput smote(const LabeledDataset& data, const SamplerConfig& cfg) {
    return smote_impl(data, cfg, nullptr);
}

BorderlinePartition borderline_classify(const LabeledDataset& data, std::size_t m) {
    if (m < 1) throw std::invalid_argument("borderline_classify: m must be >= 1");
    const std::size_t n = data.labels.size();
    if (n < m + 1) throw std::invalid_argument("borderline_classify: fewer than m other rows");
    const ClassSplit split = split_classes(data);
    if (split.minority_rows.empty() || split.majority_rows.empty())
        throw std::invalid_argument("borderline_classify: need both classes");

    const std::size_t n_min = split.minority_rows.size();
    std::vector<std::size_t> majority_counts(n_min, 0);

#pragma omp parallel for schedule(dynamic)
    for (long long qi = 0; qi < static_cast<long long>(n_min); ++qi) {
        const std::size_t row = split.minority_rows[static_cast<std::size_t>(qi)];
        const auto query = data.features.row(row);
        std::vector<std::pair<double, std::size_t>> scored;
        scored.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == row) continue;
            scored.emplace_back(squared_distance(query, data.features.row(j)), j);
        }
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(m), scored.end());
        std::size_t majority = 0;
        for (std::size_t r = 0; r < m; ++r) {
            const std::size_t neighbor = scored[r].second;
            if ((data.labels[neighbor] != 0) != (split.minority_label == 1)) ++majority;
        }
        majority_counts[static_cast<std::size_t>(qi)] = majority;
    }

    BorderlinePartition part;
    for (std::size_t qi = 0; qi < n_min; ++qi) {
        const std::size_t row = split.minority_rows[qi];
        const std::size_t majority = majority_counts[qi];
        if (majority == m)
            part.noise.push_back(row);
        else if (2 * majority >= m)  // m/2 <= |S_maj| < m
            part.danger.push_back(row);
        else
            part.safe.push_back(row);
    }
    return part;
}

ResampleOutput borderline_smote(const LabeledDataset& data, const SamplerConfig& cfg) {
    validate_config(cfg);
    const BorderlinePartition part = borderline_classify(data, cfg.m_borderline);
    if (part.danger.empty()) {
        ResampleOutput out = passthrough(data, cfg.seed);
        out.warning = "borderline-smote: no danger examples, input returned unchanged";
        return out;
    }
    return smote_impl(data, cfg, &part.danger);
}

// ---------------------------------------------------------------------------
// Tomek links
// ---------------------------------------------------------------------------

std::vector<std::pair<std::size_t, std::size_t>> tomek_links(const LabeledDataset& data) {
    const std::size_t n = data.labels.size();
    const ClassSplit split = split_classes(data);
    if (split.minority_rows.empty() || split.majority_rows.empty()) return {};

    // distance to each row's nearest other example, over all classes
    std::vector<double> nn2(n);
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto xi = data.features.row(i);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            best = std::min(best, squared_distance(xi, data.features.row(j)));
        }
        nn2[i] = best;
    }

    // (i, j) is a link iff d(i,j) does not exceed either endpoint's nearest
    // distance; exact ties do not break a link
    std::vector<std::pair<std::size_t, std::size_t>> links;
#pragma omp parallel
    {
        std::vector<std::pair<std::size_t, std::size_t>> local;
#pragma omp for schedule(dynamic) nowait
        for (long long mi = 0; mi < static_cast<long long>(split.minority_rows.size()); ++mi) {
            const std::size_t i = split.minority_rows[static_cast<std::size_t>(mi)];
            const auto xi = data.features.row(i);
            for (std::size_t j : split.majority_rows) {
                const double d = squared_distance(xi, data.features.row(j));
                if (d <= nn2[i] && d <= nn2[j]) local.emplace_back(std::min(i, j), std::max(i, j));
            }
        }
#pragma omp critical
        links.insert(links.end(), local.begin(), local.end());
    }
    std::sort(links.begin(), links.end());
    return links;
}

ResampleOutput smote_tomek(const LabeledDataset& data, const SamplerConfig& cfg) {
    ResampleOutput augmented = smote(data, cfg);
    const auto links = tomek_links(augmented.dataset);

    std::vector<std::size_t> removed;
    removed.reserve(links.size() * 2);
    for (const auto& [a, b] : links) {
        removed.push_back(a);
        removed.push_back(b);
    }
    ResampleOutput out = remove_rows(augmented.dataset, augmented.origin, augmented.provenance,
                                     std::move(removed), cfg.seed);
    out.warning = augmented.warning;
    return out;
}

// ---------------------------------------------------------------------------
// Random / Tomek under-sampling, random over-sampling
// ---------------------------------------------------------------------------

ResampleOutput random_under(const LabeledDataset& data, const SamplerConfig& cfg) {
    validate_config(cfg);
    const ClassSplit split = split_classes(data);
    const std::size_t n_min = split.minority_rows.size();
    const std::size_t n_maj = split.majority_rows.size();

    const auto target = static_cast<std::size_t>(
        std::max(0LL, std::llround(static_cast<double>(n_min) / cfg.target_ratio)));
    if (n_maj <= target) return passthrough(data, cfg.seed);

    Rng rng(mix_seed(cfg.seed, kStreamUnder));
    std::vector<std::size_t> removed;
    removed.reserve(n_maj - target);
    for (std::size_t pos : rng.sample_without_replacement(n_maj, n_maj - target))
        removed.push_back(split.majority_rows[pos]);

    std::vector<RowOrigin> origin(data.labels.size(), RowOrigin::Original);
    std::vector<std::optional<SyntheticProvenance>> provenance(data.labels.size());
    return remove_rows(data, origin, provenance, std::move(removed), cfg.seed);
}

ResampleOutput tomek_under(const LabeledDataset& data) {
    const ClassSplit split = split_classes(data);
    const auto links = tomek_links(data);

    // only the majority-class endpoint of each link is removed
    std::vector<std::size_t> removed;
    removed.reserve(links.size());
    for (const auto& [a, b] : links) {
        const bool a_minority = (data.labels[a] != 0) == (split.minority_label == 1);
        removed.push_back(a_minority ? b : a);
    }
    std::vector<RowOrigin> origin(data.labels.size(), RowOrigin::Original);
    std::vector<std::optional<SyntheticProvenance>> provenance(data.labels.size());
    return remove_rows(data, origin, provenance, std::move(removed), 0);
}

ResampleOutput random_over(const LabeledDataset& data, const SamplerConfig& cfg) {
    validate_config(cfg);
    const ClassSplit split = split_classes(data);
    const long long deficit =
        oversample_deficit(split.minority_rows.size(), split.majority_rows.size(), cfg.target_ratio);
    if (deficit <= 0) return passthrough(data, cfg.seed);

    ResampleOutput out = passthrough(data, cfg.seed);
    Rng rng(mix_seed(cfg.seed, kStreamOver));
    for (long long c = 0; c < deficit; ++c) {
        const std::size_t row = split.minority_rows[rng.index(split.minority_rows.size())];
        out.dataset.features.append_row(data.features.row(row));
        out.dataset.labels.push_back(data.labels[row]);
        out.origin.push_back(RowOrigin::Replicated);
        out.provenance.push_back(std::nullopt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Name dispatch
// ---------------------------------------------------------------------------

SamplerKind sampler_from_name(std::string_view name) {
    if (name == "none") return SamplerKind::None;
    if (name == "random-under") return SamplerKind::RandomUnder;
    if (name == "tomek-under") return SamplerKind::TomekUnder;
    if (name == "random-over") return SamplerKind::RandomOver;
    if (name == "smote") return SamplerKind::Smote;
    if (name == "borderline-smote") return SamplerKind::BorderlineSmote;
    if (name == "smote-tomek") return SamplerKind::SmoteTomek;
    throw std::invalid_argument(
        "unknown sampler: " + std::string(name) +
        " (expected none|random-under|tomek-under|random-over|smote|borderline-smote|smote-tomek)");
}

std::string_view sampler_name(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::None: return "none";
        case SamplerKind::RandomUnder: return "random-under";
        case SamplerKind::TomekUnder: return "tomek-under";
        case SamplerKind::RandomOver: return "random-over";
        case SamplerKind::Smote: return "smote";
        case SamplerKind::BorderlineSmote: return "borderline-smote";
        case SamplerKind::SmoteTomek: return "smote-tomek";
    }
    throw std::logic_error("unreachable sampler kind");
}

ResampleOutput apply_sampler(SamplerKind kind, const LabeledDataset& data, const SamplerConfig& cfg) {
    switch (kind) {
        case SamplerKind::None: return passthrough(data, cfg.seed);
        case SamplerKind::RandomUnder: return random_under(data, cfg);
        case SamplerKind::TomekUnder: return tomek_under(data);
        case SamplerKind::RandomOver: return random_over(data, cfg);
        case SamplerKind::Smote: return smote(data, cfg);
        case SamplerKind::BorderlineSmote: return borderline_smote(data, cfg);
        case SamplerKind::SmoteTomek: return smote_tomek(data, cfg);
    }
    throw std::logic_error("unreachable sampler kind");
}

}  // namespace churn
