#include "churn/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "churn/baselines.hpp"
#include "churn/csv.hpp"
#include "churn/forest.hpp"
#include "churn/month.hpp"

namespace churn {

namespace {

std::string format_full(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void validate_classifier(const std::string& name) {
    if (name != "lr" && name != "svm" && name != "rf" && name != "rf-cost-sensitive")
        throw std::invalid_argument("unknown classifier: " + name + " (expected lr|svm|rf|rf-cost-sensitive)");
}

std::string experiment_id(const ExperimentConfig& cfg) {
    return std::to_string(cfg.train_T) + "_" + std::to_string(cfg.test_T) + "_" + cfg.sampler + "_" +
           cfg.classifier;
}

}  // namespace

MonthRecords load_month_files(const std::filesystem::path& data_dir, const std::vector<int>& months) {
    MonthRecords out;
    for (int m : months) {
        if (out.count(m)) continue;
        out.emplace(m, load_csv(data_dir / ("customers_" + std::to_string(m) + ".csv")));
    }
    return out;
}

EvaluationReport run_experiment(const ExperimentConfig& cfg) {
    const SamplerKind sampler_kind = sampler_from_name(cfg.sampler);
    validate_classifier(cfg.classifier);
    if (!is_valid_month(cfg.train_T) || !is_valid_month(cfg.test_T))
        throw std::invalid_argument("train/test months must be valid YYYYMM keys");
    if (cfg.train_T == cfg.test_T) throw std::invalid_argument("test month must differ from train month");

    EvaluationReport report;
    report.experiment_id = experiment_id(cfg);
    report.train_month = std::to_string(cfg.train_T);
    report.test_month = std::to_string(cfg.test_T);
    report.sampler = cfg.sampler;
    report.classifier = cfg.classifier;
    report.timed = cfg.measure_timings;

    double total_seconds = 0.0;
    time_phase(
        [&] {
            std::vector<int> needed;
            for (int T : {cfg.train_T, cfg.test_T})
                for (int delta : {-2, -1, 0, 2}) needed.push_back(month_add(T, delta));
            const MonthRecords months = load_month_files(cfg.data_dir, needed);

            // all leakage-sensitive statistics come from the training month
            const CleaningStats stats = fit_cleaning_stats(months.at(cfg.train_T));
            WindowDataset train = build_window_pair(months, cfg.train_T, &stats);
            const WindowDataset test = build_window_pair(months, cfg.test_T, &stats, &train.encoder);

            const bool train_has_both =
                std::count(train.data.labels.begin(), train.data.labels.end(), 1) > 0 &&
                std::count(train.data.labels.begin(), train.data.labels.end(), 0) > 0;
            if (!train_has_both) throw std::runtime_error("single-class training labels");

            SamplerConfig sampler_cfg = cfg.sampler_config;
            sampler_cfg.seed = cfg.seed;

            // the training split is resampled; the test split never is
            ResampleOutput sampled;
            if (sampler_kind == SamplerKind::None) {
                sampled = apply_sampler(sampler_kind, train.data, sampler_cfg);
            } else {
                double sampling_seconds = 0.0;
                sampled = time_phase([&] { return apply_sampler(sampler_kind, train.data, sampler_cfg); },
                                     sampling_seconds);
                if (cfg.measure_timings) report.timings.sampling_seconds = sampling_seconds;
            }

            std::vector<int> predictions;
            double training_seconds = 0.0;
            if (cfg.classifier == "rf" || cfg.classifier == "rf-cost-sensitive") {
                const auto weights = cfg.classifier == "rf-cost-sensitive"
                                         ? class_weights(sampled.dataset.labels, WeightMode::Balanced)
                                         : std::array<double, 2>{1.0, 1.0};
                ForestConfig forest_cfg;
                forest_cfg.n_trees = cfg.n_trees;
                forest_cfg.seed = cfg.seed;
                const ForestModel model = time_phase(
                    [&] { return train_forest(sampled.dataset, forest_cfg, weights); }, training_seconds);
                predictions = predict_batch(model, test.data.features);
                if (cfg.persist_model && !cfg.output_dir.empty()) {
                    std::filesystem::create_directories(cfg.output_dir);
                    save_forest(model, cfg.output_dir / ("model_" + report.experiment_id + ".txt"));
                }
            } else {
                LinearModel model = time_phase(
                    [&] {
                        return cfg.classifier == "lr" ? train_logreg(sampled.dataset)
                                                      : train_linear_svm(sampled.dataset, cfg.svm_c);
                    },
                    training_seconds);
                predictions.reserve(test.data.features.rows);
                for (std::size_t r = 0; r < test.data.features.rows; ++r) {
                    const auto x = test.data.features.row(r);
                    predictions.push_back(cfg.classifier == "lr" ? predict_logreg(model, x).label
                                                                 : predict_svm(model, x));
                }
                if (cfg.persist_model && !cfg.output_dir.empty()) {
                    std::filesystem::create_directories(cfg.output_dir);
                    save_linear(model, cfg.output_dir / ("model_" + report.experiment_id + ".txt"));
                }
            }
            if (cfg.measure_timings) report.timings.training_seconds = training_seconds;

            report.cm = confusion(predictions, test.data.labels);
            report.metrics = evaluate(report.cm);
        },
        total_seconds);
    if (cfg.measure_timings) report.timings.total_seconds = total_seconds;
    return report;
}

ReportTable run_suite(const std::vector<ExperimentConfig>& cfgs) {
    if (cfgs.empty()) throw std::invalid_argument("run_suite: need at least one experiment");

    ReportTable table;
    for (const auto& cfg : cfgs) {
        try {
            table.push_back(run_experiment(cfg));
        } catch (const std::exception& ex) {
            EvaluationReport failed;
            failed.experiment_id = experiment_id(cfg);
            failed.train_month = std::to_string(cfg.train_T);
            failed.test_month = std::to_string(cfg.test_T);
            failed.sampler = cfg.sampler;
            failed.classifier = cfg.classifier;
            failed.timed = cfg.measure_timings;
            failed.failed = true;
            failed.error = ex.what();
            table.push_back(failed);
        }
    }

    // per-method average rows across month pairs, in first-appearance order
    std::vector<std::pair<std::string, std::string>> methods;
    for (const auto& row : table) {
        const auto method = std::make_pair(row.sampler, row.classifier);
        if (std::find(methods.begin(), methods.end(), method) == methods.end()) methods.push_back(method);
    }

    ReportTable averages;
    for (const auto& [sampler, classifier] : methods) {
        EvaluationReport avg;
        avg.experiment_id = "average_" + sampler + "_" + classifier;
        avg.train_month = "average";
        avg.test_month = "average";
        avg.sampler = sampler;
        avg.classifier = classifier;

        auto mean_of = [&](auto getter) -> std::optional<double> {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& row : table) {
                if (row.failed || row.sampler != sampler || row.classifier != classifier) continue;
                if (const auto value = getter(row)) {
                    sum += *value;
                    ++count;
                }
            }
            if (count == 0) return std::nullopt;
            return sum / static_cast<double>(count);
        };

        avg.metrics.precision = mean_of([](const EvaluationReport& r) { return r.metrics.precision; });
        avg.metrics.recall = mean_of([](const EvaluationReport& r) { return r.metrics.recall; });
        avg.metrics.tpr = avg.metrics.recall;
        avg.metrics.tnr = mean_of([](const EvaluationReport& r) { return r.metrics.tnr; });
        avg.metrics.f_measure = mean_of([](const EvaluationReport& r) { return r.metrics.f_measure; });
        avg.metrics.g_mean = mean_of([](const EvaluationReport& r) { return r.metrics.g_mean; });

        bool any_timed = false;
        const auto sampling = mean_of([](const EvaluationReport& r) { return r.timings.sampling_seconds; });
        double train_sum = 0.0, total_sum = 0.0;
        std::size_t timed_count = 0;
        for (const auto& row : table) {
            if (row.failed || row.sampler != sampler || row.classifier != classifier || !row.timed) continue;
            any_timed = true;
            train_sum += row.timings.training_seconds;
            total_sum += row.timings.total_seconds;
            ++timed_count;
        }
        avg.timed = any_timed;
        if (timed_count > 0) {
            avg.timings.sampling_seconds = sampling;
            avg.timings.training_seconds = train_sum / static_cast<double>(timed_count);
            avg.timings.total_seconds = total_sum / static_cast<double>(timed_count);
        }
        averages.push_back(std::move(avg));
    }
    table.insert(table.end(), averages.begin(), averages.end());
    return table;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string>& report_header() {
    static const std::vector<std::string> kHeader = {
        "experiment_id", "train_month", "test_month", "sampler",    "classifier", "precision", "recall",
        "tnr",           "f_measure",   "g_mean",     "sampling_s", "train_s",    "total_s"};
    return kHeader;
}

std::string csv_metric(const std::optional<double>& v) { return v ? format_full(*v) : "n/a"; }

std::string percent_cell(const std::optional<double>& v) {
    if (!v) return "n/a";
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << (*v * 100.0) << '%';
    return os.str();
}

std::string three_dp(const std::optional<double>& v) {
    if (!v) return "n/a";
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << *v;
    return os.str();
}

std::string timing_cell(const EvaluationReport& row, const std::optional<double>& v, bool human = false) {
    if (!row.timed || !v) return "-";
    if (!human) return format_full(*v);
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << *v;
    return os.str();
}

}  // namespace

void emit_report(const ReportTable& table, ReportFormat format, const std::filesystem::path& path) {
    if (table.empty()) throw std::invalid_argument("emit_report: empty table");

    if (format == ReportFormat::Csv) {
        std::vector<std::vector<std::string>> rows;
        rows.reserve(table.size());
        for (const auto& row : table) {
            const auto& t = row.timings;
            rows.push_back({row.experiment_id, row.train_month, row.test_month, row.sampler, row.classifier,
                            csv_metric(row.metrics.precision), csv_metric(row.metrics.recall),
                            csv_metric(row.metrics.tnr), csv_metric(row.metrics.f_measure),
                            csv_metric(row.metrics.g_mean), timing_cell(row, t.sampling_seconds),
                            timing_cell(row, row.timed ? std::optional<double>(t.training_seconds) : std::nullopt),
                            timing_cell(row, row.timed ? std::optional<double>(t.total_seconds) : std::nullopt)});
        }
        write_csv(path, report_header(), rows);
        return;
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + path.string());
    out << "| experiment | train | test | sampler | classifier | precision | recall | TNR | F-measure | "
           "G-mean | sampling (s) | train (s) | total (s) |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& row : table) {
        const auto& t = row.timings;
        out << "| " << row.experiment_id << " | " << row.train_month << " | " << row.test_month << " | "
            << row.sampler << " | " << row.classifier << " | " << percent_cell(row.metrics.precision)
            << " | " << percent_cell(row.metrics.recall) << " | " << percent_cell(row.metrics.tnr) << " | "
            << three_dp(row.metrics.f_measure) << " | " << three_dp(row.metrics.g_mean) << " | "
            << timing_cell(row, t.sampling_seconds, true) << " | "
            << timing_cell(row, row.timed ? std::optional<double>(t.training_seconds) : std::nullopt, true)
            << " | "
            << timing_cell(row, row.timed ? std::optional<double>(t.total_seconds) : std::nullopt, true)
            << " |\n";
    }
}

ReportTable parse_report_csv(const std::filesystem::path& path) {
    const CsvTable csv = read_csv(path);
    if (csv.header != report_header()) throw std::runtime_error("unexpected report header in " + path.string());

    auto parse_cell = [](const std::string& cell) -> std::optional<double> {
        if (cell == "n/a" || cell == "-") return std::nullopt;
        return std::stod(cell);
    };

    ReportTable table;
    for (const auto& row : csv.rows) {
        if (row.size() != report_header().size()) throw std::runtime_error("short report row in " + path.string());
        EvaluationReport r;
        r.experiment_id = row[0];
        r.train_month = row[1];
        r.test_month = row[2];
        r.sampler = row[3];
        r.classifier = row[4];
        r.metrics.precision = parse_cell(row[5]);
        r.metrics.recall = parse_cell(row[6]);
        r.metrics.tpr = r.metrics.recall;
        r.metrics.tnr = parse_cell(row[7]);
        r.metrics.f_measure = parse_cell(row[8]);
        r.metrics.g_mean = parse_cell(row[9]);
        r.timings.sampling_seconds = parse_cell(row[10]);
        const auto train_s = parse_cell(row[11]);
        const auto total_s = parse_cell(row[12]);
        r.timed = train_s.has_value() || total_s.has_value() || r.timings.sampling_seconds.has_value();
        r.timings.training_seconds = train_s.value_or(0.0);
        r.timings.total_seconds = total_s.value_or(0.0);
        table.push_back(std::move(r));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Config files and suite expansion
// ---------------------------------------------------------------------------

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::map<std::string, std::string> options;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("config line missing '=': " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("config line missing key: " + line);
        options[key] = value;
    }
    return options;
}

std::vector<ExperimentConfig> suite_configs(const std::map<std::string, std::string>& options) {
    auto get = [&](const std::string& key, const std::string& fallback) {
        auto it = options.find(key);
        return it != options.end() ? it->second : fallback;
    };

    std::string data = get("data", "");
    if (data.empty()) {
        if (const char* env = std::getenv("CHURN_DATA_DIR")) data = env;
    }
    if (data.empty()) throw std::invalid_argument("suite config: no data directory (key 'data' or CHURN_DATA_DIR)");

    const std::string pairs_value = get("month_pairs", "");
    if (pairs_value.empty()) throw std::invalid_argument("suite config: key 'month_pairs' is required");
    std::vector<std::pair<int, int>> month_pairs;
    for (const auto& item : split_list(pairs_value)) {
        const auto colon = item.find(':');
        // train-on-previous-month, test-on-next is the default pairing
        const int train_T = parse_month(colon == std::string::npos ? item : item.substr(0, colon));
        const int test_T = colon == std::string::npos ? month_add(train_T, 1) : parse_month(item.substr(colon + 1));
        month_pairs.emplace_back(train_T, test_T);
    }

    // the seven methods of the sampling/cost-sensitive comparison
    const std::string methods_value = get(
        "methods",
        "none:rf, random-under:rf, tomek-under:rf, random-over:rf, borderline-smote:rf, smote-tomek:rf, "
        "none:rf-cost-sensitive");
    std::vector<std::pair<std::string, std::string>> methods;
    for (const auto& item : split_list(methods_value)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("suite config: method must be sampler:classifier, got " + item);
        methods.emplace_back(trim(item.substr(0, colon)), trim(item.substr(colon + 1)));
    }
    if (methods.empty()) throw std::invalid_argument("suite config: no methods");

    ExperimentConfig base;
    base.data_dir = data;
    base.output_dir = get("out", ".");
    base.seed = std::stoull(get("seed", "0"));
    base.sampler_config.k_smote = std::stoul(get("k_smote", "5"));
    base.sampler_config.m_borderline = std::stoul(get("m_borderline", "5"));
    base.sampler_config.target_ratio = std::stod(get("target_ratio", "1.0"));
    base.n_trees = std::stoul(get("trees", "100"));
    base.svm_c = std::stod(get("svm_c", "100"));
    base.measure_timings = get("timings", "on") != "off";
    base.persist_model = get("persist_models", "on") != "off";

    std::vector<ExperimentConfig> cfgs;
    for (const auto& [train_T, test_T] : month_pairs) {
        for (const auto& [sampler, classifier] : methods) {
            ExperimentConfig cfg = base;
            cfg.train_T = train_T;
            cfg.test_T = test_T;
            cfg.sampler = sampler;
            cfg.classifier = classifier;
            cfgs.push_back(std::move(cfg));
        }
    }
    return cfgs;
}

}  // namespace churn
