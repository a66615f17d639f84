#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "churn/generator.hpp"
#include "churn/month.hpp"
#include "churn/pipeline.hpp"

namespace {

std::string env_data_dir() {
    const char* env = std::getenv("CHURN_DATA_DIR");
    return env ? env : "";
}

int cmd_gen(const std::string& months, std::size_t customers, double churn_rate, std::uint64_t seed,
            double noise, const std::string& out_dir) {
    churn::GeneratorSpec spec;
    spec.n_customers = customers;
    spec.months = churn::expand_month_range(months);
    spec.churn_rate = churn_rate;
    spec.seed = seed;
    spec.noise_level = noise;
    const auto out = churn::generate_synthetic(spec, out_dir);
    std::cout << "wrote " << out.month_files.size() << " month files and " << out.propensity_file.string()
              << " under " << out_dir << "\n";
    return 0;
}

void print_row(const churn::EvaluationReport& row) {
    auto pct = [](const std::optional<double>& v) {
        if (!v) return std::string("n/a");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f%%", *v * 100.0);
        return std::string(buf);
    };
    auto dp3 = [](const std::optional<double>& v) {
        if (!v) return std::string("n/a");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", *v);
        return std::string(buf);
    };
    std::cout << row.experiment_id << ": precision " << pct(row.metrics.precision) << ", recall "
              << pct(row.metrics.recall) << ", TNR " << pct(row.metrics.tnr) << ", F-measure "
              << dp3(row.metrics.f_measure) << ", G-mean " << dp3(row.metrics.g_mean);
    if (row.failed) std::cout << " FAILED: " << row.error;
    std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"T+2 churn prediction toolkit"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate synthetic month files");
    std::string gen_months = "201505:201512";
    std::size_t gen_customers = 1000;
    double gen_rate = 0.07;
    std::uint64_t gen_seed = 0;
    double gen_noise = 1.0;
    std::string gen_out = ".";
    gen->add_option("--months", gen_months, "inclusive month range FIRST:LAST")->capture_default_str();
    gen->add_option("--customers", gen_customers, "cohort size")->capture_default_str();
    gen->add_option("--churn-rate", gen_rate, "target monthly churn rate")->capture_default_str();
    gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
    gen->add_option("--noise", gen_noise, "score noise multiplier")->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->capture_default_str();

    // ---- run ----
    auto* run = app.add_subcommand("run", "run one experiment");
    std::string run_train, run_test, run_sampler = "none", run_classifier = "rf";
    std::string run_data = env_data_dir(), run_out = ".";
    std::uint64_t run_seed = 0;
    std::size_t run_k = 5, run_m = 5, run_trees = 100;
    double run_ratio = 1.0, run_svm_c = 100.0;
    bool run_cost_sensitive = false, run_no_timings = false;
    run->add_option("--train-month", run_train, "training window month T (YYYYMM)")->required();
    run->add_option("--test-month", run_test, "test window month T (YYYYMM)")->required();
    run->add_option("--sampler", run_sampler,
                    "none|random-under|tomek-under|random-over|smote|borderline-smote|smote-tomek")
        ->capture_default_str();
    run->add_option("--classifier", run_classifier, "lr|svm|rf|rf-cost-sensitive")->capture_default_str();
    run->add_option("--data", run_data, "data directory (default $CHURN_DATA_DIR)");
    run->add_option("--out", run_out, "output directory")->capture_default_str();
    run->add_option("--seed", run_seed, "RNG seed")->capture_default_str();
    run->add_option("--k-smote", run_k, "SMOTE neighbor count")->capture_default_str();
    run->add_option("--m-borderline", run_m, "danger-detection neighbor count")->capture_default_str();
    run->add_option("--target-ratio", run_ratio, "minority:majority ratio after sampling")->capture_default_str();
    run->add_option("--trees", run_trees, "forest size")->capture_default_str();
    run->add_option("--svm-c", run_svm_c, "SVM penalty C (grid 1e-4..1e4)")->capture_default_str();
    run->add_flag("--cost-sensitive", run_cost_sensitive, "shorthand for --classifier rf-cost-sensitive");
    run->add_flag("--no-timings", run_no_timings, "omit wall-clock columns for byte-reproducible reports");

    // ---- suite ----
    auto* suite = app.add_subcommand("suite", "run an experiment grid from a config file");
    std::string suite_config;
    std::string s_data, s_out, s_pairs, s_methods, s_seed, s_k, s_m, s_ratio, s_trees, s_svm_c, s_timings;
    suite->add_option("--config", suite_config, "flat key = value config file")->required();
    suite->add_option("--data", s_data, "override config key 'data'");
    suite->add_option("--out", s_out, "override config key 'out'");
    suite->add_option("--month-pairs", s_pairs, "override config key 'month_pairs'");
    suite->add_option("--methods", s_methods, "override config key 'methods'");
    suite->add_option("--seed", s_seed, "override config key 'seed'");
    suite->add_option("--k-smote", s_k, "override config key 'k_smote'");
    suite->add_option("--m-borderline", s_m, "override config key 'm_borderline'");
    suite->add_option("--target-ratio", s_ratio, "override config key 'target_ratio'");
    suite->add_option("--trees", s_trees, "override config key 'trees'");
    suite->add_option("--svm-c", s_svm_c, "override config key 'svm_c'");
    suite->add_option("--timings", s_timings, "on|off, override config key 'timings'");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_months, gen_customers, gen_rate, gen_seed, gen_noise, gen_out);

        if (run->parsed()) {
            churn::ExperimentConfig cfg;
            cfg.data_dir = run_data;
            if (cfg.data_dir.empty())
                throw std::invalid_argument("no data directory (--data or CHURN_DATA_DIR)");
            cfg.train_T = churn::parse_month(run_train);
            cfg.test_T = churn::parse_month(run_test);
            cfg.sampler = run_sampler;
            cfg.classifier = run_cost_sensitive ? "rf-cost-sensitive" : run_classifier;
            cfg.sampler_config.k_smote = run_k;
            cfg.sampler_config.m_borderline = run_m;
            cfg.sampler_config.target_ratio = run_ratio;
            cfg.n_trees = run_trees;
            cfg.svm_c = run_svm_c;
            cfg.seed = run_seed;
            cfg.output_dir = run_out;
            cfg.measure_timings = !run_no_timings;

            const auto report = churn::run_experiment(cfg);
            std::filesystem::create_directories(cfg.output_dir);
            churn::emit_report({report}, churn::ReportFormat::Csv, cfg.output_dir / "report.csv");
            print_row(report);
            return 0;
        }

        // suite
        auto options = churn::parse_config_file(suite_config);
        auto override_key = [&](const char* key, const std::string& value) {
            if (!value.empty()) options[key] = value;  // CLI wins
        };
        override_key("data", s_data);
        override_key("out", s_out);
        override_key("month_pairs", s_pairs);
        override_key("methods", s_methods);
        override_key("seed", s_seed);
        override_key("k_smote", s_k);
        override_key("m_borderline", s_m);
        override_key("target_ratio", s_ratio);
        override_key("trees", s_trees);
        override_key("svm_c", s_svm_c);
        override_key("timings", s_timings);

        const auto cfgs = churn::suite_configs(options);
        const auto table = churn::run_suite(cfgs);
        const std::filesystem::path out_dir =
            options.count("out") && !options.at("out").empty() ? options.at("out") : ".";
        std::filesystem::create_directories(out_dir);
        churn::emit_report(table, churn::ReportFormat::Csv, out_dir / "report.csv");
        churn::emit_report(table, churn::ReportFormat::Markdown, out_dir / "report.md");
        for (const auto& row : table) print_row(row);

        bool any_failed = false;
        for (const auto& row : table) any_failed |= row.failed;
        if (any_failed) std::cerr << "warning: some experiments failed; see report rows\n";
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
