#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "churn/metrics.hpp"
#include "churn/sampler.hpp"

namespace churn {

// ---------------------------------------------------------------------------
// Config-driven experiment orchestration: load, clean with training-month
// stats, filter, window-join, encode with train-fitted params, resample the
// training split only, train, predict on the untouched test split, evaluate.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::filesystem::path data_dir;
    int train_T = 0;
    int test_T = 0;
    std::string sampler = "none";      // none | random-under | tomek-under | random-over |
                                       // smote | borderline-smote | smote-tomek
    std::string classifier = "rf";     // lr | svm | rf | rf-cost-sensitive
    SamplerConfig sampler_config;
    std::size_t n_trees = 100;
    double svm_c = 100.0;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    bool measure_timings = true;  // off = timing cells render "-" and reports are byte-reproducible
    bool persist_model = true;
};

struct EvaluationReport {
    std::string experiment_id;
    std::string train_month;  // "average" on aggregate rows
    std::string test_month;
    std::string sampler;
    std::string classifier;
    ConfusionMatrix cm;
    MetricSet metrics;
    PhaseTimings timings;
    bool timed = true;
    bool failed = false;
    std::string error;
};

using ReportTable = std::vector<EvaluationReport>;

EvaluationReport run_experiment(const ExperimentConfig& cfg);

// Runs every experiment (failures become failed rows, the suite continues)
// and appends per-method average rows across the month pairs.
ReportTable run_suite(const std::vector<ExperimentConfig>& cfgs);

enum class ReportFormat { Csv, Markdown };

// CSV keeps machine precision so a re-parse reproduces the table exactly;
// markdown renders rates as percentages (2 dp) and F/G to 3 decimals.
// Undefined metrics render "n/a", absent timings "-".
void emit_report(const ReportTable& table, ReportFormat format, const std::filesystem::path& path);
ReportTable parse_report_csv(const std::filesystem::path& path);

// Flat key = value config; '#' starts a comment. CLI flags override file keys.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

// Expands a suite config (month_pairs x methods grid) into experiment configs.
std::vector<ExperimentConfig> suite_configs(const std::map<std::string, std::string>& options);

// customers_<YYYYMM>.csv for each requested month.
MonthRecords load_month_files(const std::filesystem::path& data_dir, const std::vector<int>& months);

}  // namespace churn
