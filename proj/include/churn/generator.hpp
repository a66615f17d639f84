#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace churn {

// Synthetic stand-in for the proprietary operator extract. Customers evolve
// month to month; churn propensity is a nonlinear function of planted drivers
// (rising shutdown days, falling traffic, growing arrears, promotion-end
// proximity) plus noise, calibrated so the realized monthly churn rate tracks
// churn_rate. Churned customers stop appearing in later months.
struct GeneratorSpec {
    std::size_t n_customers = 1000;
    std::vector<int> months;  // >= 5 consecutive YYYYMM keys
    double churn_rate = 0.07;
    std::uint64_t seed = 0;
    double noise_level = 1.0;
};

struct GeneratorOutput {
    std::vector<std::filesystem::path> month_files;  // customers_<YYYYMM>.csv
    std::filesystem::path propensity_file;           // ground-truth sidecar
};

GeneratorOutput generate_synthetic(const GeneratorSpec& spec, const std::filesystem::path& out_dir);

// "201505:201512" -> the inclusive month range.
std::vector<int> expand_month_range(const std::string& range);

}  // namespace churn
