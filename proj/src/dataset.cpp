#include "churn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "churn/csv.hpp"
#include "churn/month.hpp"

namespace churn {

namespace {

constexpr std::array<const char*, kNumericFieldCount> kNumericNames = {
    "gat_roaming_tag",
    "half_stop_flag",
    "provincial_roaming_tag",
    "two_low_user_tag",
    "three_low_user_tag",
    "tdlte_tag",
    "fddlte_tag",
    "roaming_call_duration",
    "paid_call_duration",
    "over_product_voice_tag",
    "domestic_ld_call_duration",
    "gat_intl_ld_call_duration",
    "non_gat_intl_ld_call_duration",
    "incoming_call_count",
    "outgoing_call_count",
    "recharge_amount",
    "monthly_fee",
    "grant_amount",
    "paid_data_traffic",
    "free_data_traffic",
    "provincial_data_traffic",
    "domestic_data_traffic",
    "international_data_traffic",
    "data_traffic_used_days",
    "arrears_amount",
    "over_product_voice_income",
    "over_product_stream_income",
    "shutdown_days",
    "sms_count",
    "promotion_tag",
};

constexpr std::array<const char*, kCategoricalFieldCount> kCategoricalNames = {
    "city_type",
    "credit",
    "mobile_type",
};

constexpr const char* kJoinMonth = "join_month";
constexpr const char* kPromotionEndDate = "promotion_end_date";
constexpr const char* kChurnStateStart = "churn_state_start";
constexpr const char* kChurnStateEnd = "churn_state_end";

bool parse_double(const std::string& cell, double& out) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(out)) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

bool parse_month_cell(const std::string& cell, int& out) {
    double value = 0.0;
    if (!parse_double(cell, value)) return false;
    const int ym = static_cast<int>(value);
    if (static_cast<double>(ym) != value || !is_valid_month(ym)) return false;
    out = ym;
    return true;
}

std::optional<ChurnState> parse_state(const std::string& cell) {
    if (cell == "active") return ChurnState::Active;
    if (cell == "churned") return ChurnState::Churned;
    return std::nullopt;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Interpolated median, matching the convention median({1,3}) = 2.
double interpolated_median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Lower median: an order statistic, so a month field stays a valid YYYYMM.
int lower_median(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

template <typename T>
T mode_of(const std::map<T, std::size_t>& counts) {
    // ties resolve to the smallest value, keeping cleaning deterministic
    T best{};
    std::size_t best_count = 0;
    for (const auto& [value, count] : counts) {
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    }
    return best;
}

}  // namespace

const std::array<const char*, kNumericFieldCount>& numeric_field_names() { return kNumericNames; }
const std::array<const char*, kCategoricalFieldCount>& categorical_field_names() { return kCategoricalNames; }

bool is_tag_field(NumericField f) {
    switch (f) {
        case NumericField::GatRoamingTag:
        case NumericField::HalfStopFlag:
        case NumericField::ProvincialRoamingTag:
        case NumericField::TwoLowUserTag:
        case NumericField::ThreeLowUserTag:
        case NumericField::TdlteTag:
        case NumericField::FddlteTag:
        case NumericField::OverProductVoiceTag:
        case NumericField::PromotionTag:
            return true;
        default:
            return false;
    }
}

// ---------------------------------------------------------------------------
// load_csv
// ---------------------------------------------------------------------------

std::vector<CustomerRecord> load_csv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw std::runtime_error("missing file: " + path.string());
    const CsvTable table = read_csv(path);

    std::unordered_map<std::string, std::size_t> column_index;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        const std::string name = trim(table.header[i]);
        if (column_index.count(name)) throw std::runtime_error("duplicate column: " + name);
        column_index.emplace(name, i);
    }

    for (const char* mandatory : {"customer_id", "month", kChurnStateEnd}) {
        if (!column_index.count(mandatory))
            throw std::runtime_error("missing mandatory column '" + std::string(mandatory) + "' in " +
                                     path.string());
    }

    std::set<std::string> known{"customer_id", "month", kJoinMonth, kPromotionEndDate, kChurnStateStart,
                                kChurnStateEnd};
    for (const char* name : kNumericNames) known.insert(name);
    for (const char* name : kCategoricalNames) known.insert(name);
    for (const auto& [name, idx] : column_index) {
        if (!known.count(name)) throw std::runtime_error("unknown column '" + name + "' in " + path.string());
    }

    auto cell_of = [&](const std::vector<std::string>& row, const char* name) -> std::string {
        auto it = column_index.find(name);
        if (it == column_index.end() || it->second >= row.size()) return "";
        return trim(row[it->second]);
    };

    std::vector<CustomerRecord> records;
    records.reserve(table.rows.size());
    std::set<std::pair<std::string, int>> seen;
    for (const auto& row : table.rows) {
        CustomerRecord rec;
        rec.customer_id = cell_of(row, "customer_id");

        int ym = 0;
        if (parse_month_cell(cell_of(row, "month"), ym)) rec.month = ym;

        if (!seen.emplace(rec.customer_id, rec.month).second)
            throw std::runtime_error("duplicate (customer_id, month) pair: " + rec.customer_id + ", " +
                                     std::to_string(rec.month) + " in " + path.string());

        for (std::size_t f = 0; f < kNumericFieldCount; ++f) {
            const std::string cell = cell_of(row, kNumericNames[f]);
            double value = 0.0;
            if (!cell.empty() && parse_double(cell, value)) rec.numeric[f] = value;
        }
        for (std::size_t f = 0; f < kCategoricalFieldCount; ++f) {
            const std::string cell = cell_of(row, kCategoricalNames[f]);
            if (!cell.empty()) rec.categorical[f] = cell;
        }
        if (int jm = 0; parse_month_cell(cell_of(row, kJoinMonth), jm)) rec.join_month = jm;
        if (int pe = 0; parse_month_cell(cell_of(row, kPromotionEndDate), pe)) rec.promotion_end_date = pe;
        rec.churn_state_start = parse_state(cell_of(row, kChurnStateStart));
        rec.churn_state_end = parse_state(cell_of(row, kChurnStateEnd));

        records.push_back(std::move(rec));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

CleaningStats fit_cleaning_stats(std::span<const CustomerRecord> stats_source) {
    if (stats_source.empty()) throw std::invalid_argument("cleaning stats need a nonempty source");

    CleaningStats stats;
    for (std::size_t f = 0; f < kNumericFieldCount; ++f) {
        const auto field = static_cast<NumericField>(f);
        if (is_tag_field(field)) {
            std::map<double, std::size_t> counts;
            for (const auto& rec : stats_source)
                if (rec.numeric[f]) ++counts[*rec.numeric[f]];
            if (counts.empty())
                throw std::runtime_error(std::string("field entirely null in stats source: ") + kNumericNames[f]);
            stats.numeric_fill[f] = mode_of(counts);
        } else {
            std::vector<double> values;
            for (const auto& rec : stats_source)
                if (rec.numeric[f]) values.push_back(*rec.numeric[f]);
            if (values.empty())
                throw std::runtime_error(std::string("field entirely null in stats source: ") + kNumericNames[f]);
            stats.numeric_fill[f] = interpolated_median(std::move(values));
        }
    }
    for (std::size_t f = 0; f < kCategoricalFieldCount; ++f) {
        std::map<std::string, std::size_t> counts;
        for (const auto& rec : stats_source)
            if (rec.categorical[f]) ++counts[*rec.categorical[f]];
        if (counts.empty())
            throw std::runtime_error(std::string("field entirely null in stats source: ") + kCategoricalNames[f]);
        stats.categorical_fill[f] = mode_of(counts);
    }
    {
        std::vector<int> values;
        for (const auto& rec : stats_source)
            if (rec.join_month) values.push_back(*rec.join_month);
        if (values.empty()) throw std::runtime_error("field entirely null in stats source: join_month");
        stats.join_month_fill = lower_median(std::move(values));
    }
    for (const char* name : {kChurnStateStart, kChurnStateEnd}) {
        std::map<int, std::size_t> counts;
        for (const auto& rec : stats_source) {
            const auto& state = (name == kChurnStateStart) ? rec.churn_state_start : rec.churn_state_end;
            if (state) ++counts[static_cast<int>(*state)];
        }
        if (counts.empty()) throw std::runtime_error(std::string("field entirely null in stats source: ") + name);
        const auto fill = static_cast<ChurnState>(mode_of(counts));
        if (name == kChurnStateStart)
            stats.state_start_fill = fill;
        else
            stats.state_end_fill = fill;
    }
    return stats;
}

std::pair<std::vector<CustomerRecord>, CleaningLog> clean(std::span<const CustomerRecord> records,
                                                          const CleaningStats& stats) {
    std::vector<CustomerRecord> cleaned(records.begin(), records.end());
    CleaningLog log;
    auto imputed = [&](const char* field) { ++log[field].imputed; };
    auto clamped = [&](const char* field) { ++log[field].clamped; };

    for (auto& rec : cleaned) {
        for (std::size_t f = 0; f < kNumericFieldCount; ++f) {
            if (!rec.numeric[f]) {
                rec.numeric[f] = stats.numeric_fill[f];
                imputed(kNumericNames[f]);
            }
            if (*rec.numeric[f] < 0.0) {
                rec.numeric[f] = 0.0;
                clamped(kNumericNames[f]);
            }
        }
        const auto used_days = static_cast<std::size_t>(NumericField::DataTrafficUsedDays);
        if (is_valid_month(rec.month)) {
            const double cap = days_in_month(rec.month);
            if (*rec.numeric[used_days] > cap) {
                rec.numeric[used_days] = cap;
                clamped(kNumericNames[used_days]);
            }
        }
        for (std::size_t f = 0; f < kCategoricalFieldCount; ++f) {
            if (!rec.categorical[f]) {
                rec.categorical[f] = stats.categorical_fill[f];
                imputed(kCategoricalNames[f]);
            }
        }
        if (!rec.join_month) {
            rec.join_month = stats.join_month_fill;
            imputed(kJoinMonth);
        }
        if (!rec.churn_state_start) {
            rec.churn_state_start = stats.state_start_fill;
            imputed(kChurnStateStart);
        }
        if (!rec.churn_state_end) {
            rec.churn_state_end = stats.state_end_fill;
            imputed(kChurnStateEnd);
        }
        // promotion_end_date stays as-is: absence means "no promotion"
    }
    return {std::move(cleaned), std::move(log)};
}

std::pair<std::vector<CustomerRecord>, CleaningLog> clean(std::span<const CustomerRecord> records,
                                                          std::span<const CustomerRecord> stats_source) {
    return clean(records, fit_cleaning_stats(stats_source));
}

// ---------------------------------------------------------------------------
// Eligibility
// ---------------------------------------------------------------------------

std::vector<std::string> eligibility_filter(const MonthRecords& records_by_month, int T) {
    const int window[3] = {month_add(T, -2), month_add(T, -1), T};
    for (int m : window) {
        if (!records_by_month.count(m))
            throw std::runtime_error("eligibility window month absent: " + std::to_string(m));
    }

    std::map<std::string, int> active_months;
    for (int m : window) {
        std::set<std::string> active_this_month;
        for (const auto& rec : records_by_month.at(m)) {
            if (rec.month != m) continue;
            if (rec.churn_state_end && *rec.churn_state_end == ChurnState::Active)
                active_this_month.insert(rec.customer_id);
        }
        for (const auto& id : active_this_month) ++active_months[id];
    }

    std::vector<std::string> eligible;
    for (const auto& [id, count] : active_months)
        if (count == 3) eligible.push_back(id);
    return eligible;  // std::map iteration is already sorted
}

// ---------------------------------------------------------------------------
// FeatureEncoder
// ---------------------------------------------------------------------------

Matrix FeatureEncoder::raw_columns(std::span<const CustomerRecord> cleaned, int T) const {
    const std::size_t d = columns_.size();
    Matrix out(cleaned.size(), d);
    for (std::size_t r = 0; r < cleaned.size(); ++r) {
        const auto& rec = cleaned[r];
        std::size_t c = 0;
        for (std::size_t f = 0; f < kNumericFieldCount; ++f) out.at(r, c++) = rec.numeric[f].value_or(0.0);
        for (std::size_t f = 0; f < kCategoricalFieldCount; ++f) {
            const auto& levels = levels_[f];
            for (const auto& level : levels)
                out.at(r, c++) = (rec.categorical[f] && *rec.categorical[f] == level) ? 1.0 : 0.0;
            // unseen levels map to all-zeros
        }
        out.at(r, c++) = rec.join_month ? static_cast<double>(month_diff(*rec.join_month, T)) : 0.0;
        out.at(r, c++) = rec.promotion_end_date ? static_cast<double>(month_diff(*rec.promotion_end_date, T)) : 0.0;
        out.at(r, c++) = rec.promotion_end_date ? 1.0 : 0.0;
        out.at(r, c++) = (rec.churn_state_start && *rec.churn_state_start == ChurnState::Churned) ? 1.0 : 0.0;
        out.at(r, c++) = (rec.churn_state_end && *rec.churn_state_end == ChurnState::Churned) ? 1.0 : 0.0;
    }
    return out;
}

FeatureEncoder FeatureEncoder::fit(std::span<const CustomerRecord> cleaned, int T) {
    FeatureEncoder enc;
    for (std::size_t f = 0; f < kCategoricalFieldCount; ++f) {
        std::set<std::string> levels;
        for (const auto& rec : cleaned)
            if (rec.categorical[f]) levels.insert(*rec.categorical[f]);
        enc.levels_[f].assign(levels.begin(), levels.end());
    }

    for (std::size_t f = 0; f < kNumericFieldCount; ++f) {
        const auto field = static_cast<NumericField>(f);
        enc.columns_.push_back({kNumericNames[f], kNumericNames[f], is_tag_field(field) ? "tag" : "numeric"});
    }
    for (std::size_t f = 0; f < kCategoricalFieldCount; ++f)
        for (const auto& level : enc.levels_[f])
            enc.columns_.push_back({std::string(kCategoricalNames[f]) + "=" + level, kCategoricalNames[f],
                                    "onehot:" + level});
    enc.columns_.push_back({"join_month_offset", kJoinMonth, "month_offset"});
    enc.columns_.push_back({"promotion_end_offset", kPromotionEndDate, "month_offset"});
    enc.columns_.push_back({"has_promotion", kPromotionEndDate, "indicator"});
    enc.columns_.push_back({kChurnStateStart, kChurnStateStart, "state"});
    enc.columns_.push_back({kChurnStateEnd, kChurnStateEnd, "state"});

    const Matrix raw = enc.raw_columns(cleaned, T);
    const std::size_t n = raw.rows, d = raw.cols;
    enc.standardization_.mean.assign(d, 0.0);
    enc.standardization_.stddev.assign(d, 0.0);
    if (n == 0) return enc;
    for (std::size_t c = 0; c < d; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r) sum += raw.at(r, c);
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double dv = raw.at(r, c) - mean;
            ss += dv * dv;
        }
        enc.standardization_.mean[c] = mean;
        enc.standardization_.stddev[c] = std::sqrt(ss / static_cast<double>(n));
    }
    return enc;
}

Matrix FeatureEncoder::transform(std::span<const CustomerRecord> cleaned, int T) const {
    Matrix out = raw_columns(cleaned, T);
    for (std::size_t c = 0; c < out.cols; ++c) {
        const double mean = standardization_.mean[c];
        const double sd = standardization_.stddev[c];
        for (std::size_t r = 0; r < out.rows; ++r) {
            // constant training columns are emitted as constant 0
            out.at(r, c) = sd > 0.0 ? (out.at(r, c) - mean) / sd : 0.0;
        }
    }
    return out;
}

std::pair<Matrix, FeatureEncoder> encode_features(std::span<const CustomerRecord> cleaned, int T) {
    FeatureEncoder enc = FeatureEncoder::fit(cleaned, T);
    return {enc.transform(cleaned, T), std::move(enc)};
}

Matrix encode_features(std::span<const CustomerRecord> cleaned, int T, const FeatureEncoder& encoder) {
    return encoder.transform(cleaned, T);
}

// ---------------------------------------------------------------------------
// build_window_pair
// ---------------------------------------------------------------------------

WindowDataset build_window_pair(const MonthRecords& records_by_month, int T, const CleaningStats* stats,
                                const FeatureEncoder* encoder) {
    const int label_month = month_add(T, 2);
    if (!records_by_month.count(label_month))
        throw std::runtime_error("label month absent: " + std::to_string(label_month));
    if (!records_by_month.count(T)) throw std::runtime_error("window month absent: " + std::to_string(T));

    WindowDataset out;
    out.stats = stats ? *stats : fit_cleaning_stats(records_by_month.at(T));

    MonthRecords cleaned_window;
    for (int m : {month_add(T, -2), month_add(T, -1), T, label_month}) {
        auto it = records_by_month.find(m);
        if (it == records_by_month.end()) continue;
        auto [recs, log] = clean(it->second, out.stats);
        if (m == T) out.cleaning_log = log;
        cleaned_window.emplace(m, std::move(recs));
    }

    out.customer_ids = eligibility_filter(cleaned_window, T);

    std::map<std::string, const CustomerRecord*> feature_rows;
    for (const auto& rec : cleaned_window.at(T)) feature_rows.emplace(rec.customer_id, &rec);
    std::map<std::string, ChurnState> outcome;
    for (const auto& rec : cleaned_window.at(label_month))
        if (rec.churn_state_end) outcome.emplace(rec.customer_id, *rec.churn_state_end);

    std::vector<CustomerRecord> rows;
    rows.reserve(out.customer_ids.size());
    std::vector<int> labels;
    labels.reserve(out.customer_ids.size());
    for (const auto& id : out.customer_ids) {
        rows.push_back(*feature_rows.at(id));
        auto it = outcome.find(id);
        // absent from the T+2 extract = churned
        const bool churned = (it == outcome.end()) || it->second == ChurnState::Churned;
        labels.push_back(churned ? 1 : 0);
    }

    FeatureEncoder fitted;
    const FeatureEncoder* enc = encoder;
    if (!enc) {
        fitted = FeatureEncoder::fit(rows, T);
        enc = &fitted;
    }
    out.data.features = enc->transform(rows, T);
    out.data.labels = std::move(labels);
    out.data.columns = enc->columns();
    out.data.standardization = enc->standardization();
    out.encoder = *enc;
    return out;
}

}  // namespace churn
