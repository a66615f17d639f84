// Compares the OpenMP kernels against the serial reference scans on one
// synthetic instance: same inputs, results checked for agreement, wall-clock
// side by side.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "churn/forest.hpp"
#include "churn/matrix.hpp"
#include "churn/reference.hpp"
#include "churn/rng.hpp"
#include "churn/sampler.hpp"

namespace {

using churn::LabeledDataset;
using churn::Matrix;
using churn::Rng;

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

LabeledDataset random_dataset(std::size_t n, std::size_t d, double minority_share, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset data;
    data.features = Matrix(n, d);
    data.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const bool minority = rng.uniform() < minority_share;
        data.labels[r] = minority ? 1 : 0;
        for (std::size_t c = 0; c < d; ++c)
            data.features.at(r, c) = rng.uniform() * 4.0 + (minority ? 1.0 : 0.0);
    }
    return data;
}

void report(const char* kernel, double serial_s, double parallel_s, bool agree) {
    std::printf("%-22s serial %8.3fs   openmp %8.3fs   speedup %5.2fx   %s\n", kernel, serial_s, parallel_s,
                parallel_s > 0.0 ? serial_s / parallel_s : 0.0, agree ? "results agree" : "RESULTS DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial reference vs OpenMP kernel benchmark"};
    std::size_t n = 3000, d = 16, tomek_n = 700, trees = 100;
    double minority_share = 0.15;
    std::uint64_t seed = 1;
    app.add_option("--n", n, "rows for the knn/borderline kernels")->capture_default_str();
    app.add_option("--d", d, "feature count")->capture_default_str();
    app.add_option("--tomek-n", tomek_n, "rows for the cubic tomek reference")->capture_default_str();
    app.add_option("--trees", trees, "forest size for the training benchmark")->capture_default_str();
    app.add_option("--minority", minority_share, "minority class share")->capture_default_str();
    app.add_option("--seed", seed, "RNG seed")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
#else
    const int max_threads = 1;
#endif
    std::printf("n=%zu d=%zu tomek_n=%zu trees=%zu threads=%d\n\n", n, d, tomek_n, trees, max_threads);

    const LabeledDataset data = random_dataset(n, d, minority_share, seed);
    std::vector<std::size_t> minority_rows;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
        if (data.labels[i] == 1) minority_rows.push_back(i);

    // knn batch over every minority row
    {
        std::vector<std::vector<std::size_t>> serial(minority_rows.size()), parallel(minority_rows.size());
        double t0 = now_seconds();
        for (std::size_t q = 0; q < minority_rows.size(); ++q)
            serial[q] = churn::reference::knn(minority_rows[q], minority_rows, data.features, 5);
        double t1 = now_seconds();
#pragma omp parallel for schedule(dynamic)
        for (long long q = 0; q < static_cast<long long>(minority_rows.size()); ++q)
            parallel[static_cast<std::size_t>(q)] =
                churn::knn(minority_rows[static_cast<std::size_t>(q)], minority_rows, data.features, 5);
        double t2 = now_seconds();
        report("knn batch (k=5)", t1 - t0, t2 - t1, serial == parallel);
    }

    // borderline danger detection
    {
        double t0 = now_seconds();
        const auto serial = churn::reference::borderline_classify(data.features, data.labels, 5);
        double t1 = now_seconds();
        const auto parallel = churn::borderline_classify(data, 5);
        double t2 = now_seconds();
        const bool agree = serial.safe == parallel.safe && serial.danger == parallel.danger &&
                           serial.noise == parallel.noise;
        report("borderline (m=5)", t1 - t0, t2 - t1, agree);
    }

    // tomek links: cubic literal scan vs quadratic nearest-distance kernel
    {
        const LabeledDataset small = random_dataset(tomek_n, d, minority_share, seed + 1);
        double t0 = now_seconds();
        const auto serial = churn::reference::tomek_links(small.features, small.labels);
        double t1 = now_seconds();
        const auto parallel = churn::tomek_links(small);
        double t2 = now_seconds();
        report("tomek links", t1 - t0, t2 - t1, serial == parallel);
    }

    // forest training: one worker vs all workers, identical model required
    {
        churn::ForestConfig cfg;
        cfg.n_trees = trees;
        cfg.seed = seed;
#ifdef _OPENMP
        omp_set_num_threads(1);
#endif
        double t0 = now_seconds();
        const auto single = churn::train_forest(data, cfg);
        double t1 = now_seconds();
#ifdef _OPENMP
        omp_set_num_threads(max_threads);
#endif
        const auto multi = churn::train_forest(data, cfg);
        double t2 = now_seconds();
        report("forest train", t1 - t0, t2 - t1, single == multi);
    }

    return 0;
}
