#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "churn/matrix.hpp"

namespace churn {

// ---------------------------------------------------------------------------
// Customer schema
//
// One CSV file per month, snake_case header, empty cells = missing values.
// Fields split by storage type: continuous/count values and 0-1 tags live in
// `numeric`, multi-level strings in `categorical`, YYYYMM keys in the two
// date fields, and the active/churned states in their own slots.
// ---------------------------------------------------------------------------

enum class NumericField : std::size_t {
    GatRoamingTag = 0,
    HalfStopFlag,
    ProvincialRoamingTag,
    TwoLowUserTag,
    ThreeLowUserTag,
    TdlteTag,
    FddlteTag,
    RoamingCallDuration,
    PaidCallDuration,
    OverProductVoiceTag,
    DomesticLdCallDuration,
    GatIntlLdCallDuration,
    NonGatIntlLdCallDuration,
    IncomingCallCount,
    OutgoingCallCount,
    RechargeAmount,
    MonthlyFee,
    GrantAmount,
    PaidDataTraffic,
    FreeDataTraffic,
    ProvincialDataTraffic,
    DomesticDataTraffic,
    InternationalDataTraffic,
    DataTrafficUsedDays,
    ArrearsAmount,
    OverProductVoiceIncome,
    OverProductStreamIncome,
    ShutdownDays,
    SmsCount,
    PromotionTag,
    Count_
};
inline constexpr std::size_t kNumericFieldCount = static_cast<std::size_t>(NumericField::Count_);

enum class CategoricalField : std::size_t { CityType = 0, Credit, MobileType, Count_ };
inline constexpr std::size_t kCategoricalFieldCount = static_cast<std::size_t>(CategoricalField::Count_);

const std::array<const char*, kNumericFieldCount>& numeric_field_names();
const std::array<const char*, kCategoricalFieldCount>& categorical_field_names();

// Tags are 0/1 flags; they clean by mode instead of median and encode as a
// single column.
bool is_tag_field(NumericField f);

enum class ChurnState { Active, Churned };

struct CustomerRecord {
    std::string customer_id;
    int month = 0;  // YYYYMM; 0 marks an unparseable month cell

    std::array<std::optional<double>, kNumericFieldCount> numeric;
    std::array<std::optional<std::string>, kCategoricalFieldCount> categorical;
    std::optional<int> join_month;
    std::optional<int> promotion_end_date;  // absent = customer has no promotion
    std::optional<ChurnState> churn_state_start;
    std::optional<ChurnState> churn_state_end;
};

using MonthRecords = std::map<int, std::vector<CustomerRecord>>;

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

// Loads one month file. Header is order-insensitive; customer_id, month and
// churn_state_end must be present. Unparseable cells become missing values,
// never failures. Throws on missing file, missing mandatory columns, unknown
// columns and duplicate (customer_id, month) pairs.
std::vector<CustomerRecord> load_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

struct CleaningStats {
    std::array<double, kNumericFieldCount> numeric_fill{};       // median (mode for tags)
    std::array<std::string, kCategoricalFieldCount> categorical_fill{};
    int join_month_fill = 0;  // lower median, stays a valid YYYYMM
    ChurnState state_start_fill = ChurnState::Active;
    ChurnState state_end_fill = ChurnState::Active;
};

struct FieldCleaningCounts {
    std::size_t imputed = 0;
    std::size_t clamped = 0;
};
using CleaningLog = std::map<std::string, FieldCleaningCounts>;

// Medians/modes over the training-month records. Throws if a field is
// entirely null (promotion_end_date excepted: absence there is meaningful).
CleaningStats fit_cleaning_stats(std::span<const CustomerRecord> stats_source);

// Fills nulls from stats, clamps negatives on the nonnegative fields and caps
// data_traffic_used_days at the month length. Idempotent.
std::pair<std::vector<CustomerRecord>, CleaningLog> clean(std::span<const CustomerRecord> records,
                                                          const CleaningStats& stats);
std::pair<std::vector<CustomerRecord>, CleaningLog> clean(std::span<const CustomerRecord> records,
                                                          std::span<const CustomerRecord> stats_source);

// ---------------------------------------------------------------------------
// Eligibility and the T -> T+2 window join
// ---------------------------------------------------------------------------

// Customers with a record in months T-2, T-1 and T whose churn_state_end is
// active in all three. Returned sorted ascending. Throws if a month is absent.
std::vector<std::string> eligibility_filter(const MonthRecords& records_by_month, int T);

// ---------------------------------------------------------------------------
// Feature encoding
// ---------------------------------------------------------------------------

struct FeatureColumn {
    std::string name;
    std::string source_field;
    std::string encoding;  // numeric | tag | onehot:<level> | month_offset | indicator | state

    bool operator==(const FeatureColumn&) const = default;
};

struct Standardization {
    std::vector<double> mean;
    std::vector<double> stddev;  // population stddev; 0 marks a constant column

    bool operator==(const Standardization&) const = default;
};

// Frozen on training data: categorical level dictionaries plus per-column
// standardization. transform() may run at a different T (offsets are relative
// to the window month, so the model is calendar-shift invariant).
class FeatureEncoder {
public:
    static FeatureEncoder fit(std::span<const CustomerRecord> cleaned, int T);
    Matrix transform(std::span<const CustomerRecord> cleaned, int T) const;

    const std::vector<FeatureColumn>& columns() const { return columns_; }
    const Standardization& standardization() const { return standardization_; }

private:
    Matrix raw_columns(std::span<const CustomerRecord> cleaned, int T) const;

    std::array<std::vector<std::string>, kCategoricalFieldCount> levels_;  // sorted
    std::vector<FeatureColumn> columns_;
    Standardization standardization_;
};

struct LabeledDataset {
    Matrix features;
    std::vector<int> labels;  // 1 = churn
    std::vector<FeatureColumn> columns;
    Standardization standardization;  // from the training split

    bool operator==(const LabeledDataset&) const = default;
};

// encode_features per the module contract: fit on the records when no encoder
// is given, otherwise apply the frozen one.
std::pair<Matrix, FeatureEncoder> encode_features(std::span<const CustomerRecord> cleaned, int T);
Matrix encode_features(std::span<const CustomerRecord> cleaned, int T, const FeatureEncoder& encoder);

// ---------------------------------------------------------------------------
// Window assembly
// ---------------------------------------------------------------------------

struct WindowDataset {
    LabeledDataset data;
    std::vector<std::string> customer_ids;  // row order
    CleaningLog cleaning_log;
    CleaningStats stats;      // the stats actually used
    FeatureEncoder encoder;   // the encoder actually used
};

// Features from the cleaned month-T records of eligible customers; label 1
// iff the customer is churned at the end of T+2 or absent from the T+2 file.
// Cleaning stats / encoder are fitted on month T when not supplied (training
// window); the test window passes the training artifacts in.
WindowDataset build_window_pair(const MonthRecords& records_by_month, int T,
                                const CleaningStats* stats = nullptr,
                                const FeatureEncoder* encoder = nullptr);

}  // namespace churn
