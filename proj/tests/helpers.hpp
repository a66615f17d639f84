#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "churn/dataset.hpp"
#include "churn/matrix.hpp"
#include "churn/rng.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("churn_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// ---------------------------------------------------------------------------
// CSV fixture builder: every schema column present, defaults overridable per
// row by column name.
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& schema_columns() {
    static const std::vector<std::string> kColumns = [] {
        std::vector<std::string> cols{"customer_id", "month"};
        for (const char* name : churn::numeric_field_names()) cols.push_back(name);
        for (const char* name : churn::categorical_field_names()) cols.push_back(name);
        cols.insert(cols.end(), {"join_month", "promotion_end_date", "churn_state_start", "churn_state_end"});
        return cols;
    }();
    return kColumns;
}

inline std::map<std::string, std::string> default_cells(const std::string& id, int month) {
    std::map<std::string, std::string> cells;
    for (const auto& col : schema_columns()) cells[col] = "0";
    cells["customer_id"] = id;
    cells["month"] = std::to_string(month);
    cells["city_type"] = "urban";
    cells["credit"] = "A";
    cells["mobile_type"] = "brand_a";
    cells["join_month"] = "201401";
    cells["promotion_end_date"] = "";
    cells["churn_state_start"] = "active";
    cells["churn_state_end"] = "active";
    cells["recharge_amount"] = "50";
    cells["monthly_fee"] = "58";
    cells["paid_data_traffic"] = "1000";
    cells["paid_call_duration"] = "120";
    return cells;
}

inline std::string csv_file(const std::vector<std::map<std::string, std::string>>& rows) {
    std::string out;
    for (std::size_t c = 0; c < schema_columns().size(); ++c) {
        if (c) out += ',';
        out += schema_columns()[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < schema_columns().size(); ++c) {
            if (c) out += ',';
            out += row.at(schema_columns()[c]);
        }
        out += '\n';
    }
    return out;
}

inline churn::CustomerRecord basic_record(const std::string& id, int month) {
    churn::CustomerRecord rec;
    rec.customer_id = id;
    rec.month = month;
    for (auto& v : rec.numeric) v = 0.0;
    rec.categorical[0] = "urban";
    rec.categorical[1] = "A";
    rec.categorical[2] = "brand_a";
    rec.join_month = 201401;
    rec.churn_state_start = churn::ChurnState::Active;
    rec.churn_state_end = churn::ChurnState::Active;
    return rec;
}

// ---------------------------------------------------------------------------
// Synthetic geometry for classifier tests
// ---------------------------------------------------------------------------

inline churn::LabeledDataset make_dataset(const std::vector<std::vector<double>>& points,
                                          const std::vector<int>& labels) {
    churn::LabeledDataset data;
    data.features = churn::Matrix(points.size(), points.empty() ? 0 : points[0].size());
    for (std::size_t r = 0; r < points.size(); ++r)
        for (std::size_t c = 0; c < points[r].size(); ++c) data.features.at(r, c) = points[r][c];
    data.labels = labels;
    return data;
}

inline churn::LabeledDataset random_dataset(std::size_t n, std::size_t d, double minority_share,
                                            std::uint64_t seed, double minority_shift = 1.0) {
    churn::Rng rng(seed);
    churn::LabeledDataset data;
    data.features = churn::Matrix(n, d);
    data.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const bool minority = rng.uniform() < minority_share;
        data.labels[r] = minority ? 1 : 0;
        for (std::size_t c = 0; c < d; ++c)
            data.features.at(r, c) = 4.0 * rng.uniform() + (minority ? minority_shift : 0.0);
    }
    return data;
}

// Two interleaved half-moon clusters.
inline churn::LabeledDataset make_moons(std::size_t n, double noise, std::uint64_t seed) {
    churn::Rng rng(seed);
    churn::LabeledDataset data;
    data.features = churn::Matrix(n, 2);
    data.labels.resize(n);
    constexpr double kPi = 3.14159265358979323846;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = kPi * rng.uniform();
        const bool second = i % 2 == 1;
        double x = second ? 1.0 - std::cos(t) : std::cos(t);
        double y = second ? 0.5 - std::sin(t) : std::sin(t);
        x += noise * (rng.uniform() - 0.5);
        y += noise * (rng.uniform() - 0.5);
        data.features.at(i, 0) = x;
        data.features.at(i, 1) = y;
        data.labels[i] = second ? 1 : 0;
    }
    return data;
}

inline churn::LabeledDataset make_blobs(std::size_t n_per_class, double separation, std::uint64_t seed) {
    churn::Rng rng(seed);
    churn::LabeledDataset data;
    data.features = churn::Matrix(2 * n_per_class, 2);
    data.labels.resize(2 * n_per_class);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const bool positive = i % 2 == 1;
        data.features.at(i, 0) = (positive ? separation : -separation) + (rng.uniform() - 0.5);
        data.features.at(i, 1) = rng.uniform() - 0.5;
        data.labels[i] = positive ? 1 : 0;
    }
    return data;
}

}  // namespace testutil
