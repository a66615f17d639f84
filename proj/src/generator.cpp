#include "churn/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "churn/csv.hpp"
#include "churn/dataset.hpp"
#include "churn/month.hpp"
#include "churn/rng.hpp"

namespace churn {

namespace {

constexpr std::uint64_t kStreamStatic = 0xD1;
constexpr std::uint64_t kStreamMonthly = 0xD2;

// Churn propensity drivers. Decline is a latent ramp: traffic sags first,
// arrears and recharge react next, shutdown days appear last, and the churn
// decision fires near maturity. A promotion ending opens a second churn mode
// with clean usage. Healthy customers carry look-alike noise (low-usage
// plans, travel shutdowns, billing hiccups) so no single raw column separates
// the classes.
struct Dynamics {
    double entry_hazard_scale = 1.3;   // decline-path entries per month, x churn_rate
    double initial_decline_share = 0.15;
    double pace_min = 0.18, pace_max = 0.30;
    double traffic_onset = 0.40, traffic_slope = 1.45;
    double recharge_onset = 0.55, recharge_slope = 2.0;
    double arrears_onset = 0.55;
    double shutdown_onset = 0.72, shutdown_scale = 30.0;
    double call_onset = 0.60, call_slope = 1.4;
    double promo_bump = 0.9;
    double score_noise = 0.15;
    double shock_rate = 0.025, shock_size = 0.9;  // spontaneous churn, invisible at T
    double healthy_shutdown_rate = 0.06;          // travelers
    double billing_hiccup_rate = 0.07;
    double vacation_rate = 0.04;  // healthy months that look traffic-starved
};
constexpr Dynamics kDyn;

struct CustomerState {
    std::string id;
    // static profile
    std::string city_type, credit, mobile_type;
    int join_month = 0;
    bool has_promotion = false;
    int promotion_end = 0;
    int gat_roaming = 0, provincial_roaming = 0, two_low = 0, three_low = 0;
    int tdlte = 0, fddlte = 0, over_product_voice = 0;
    double usage_scale = 1.0;
    double monthly_fee = 58.0;
    double call_level = 120.0;
    double sms_level = 40.0;
    // dynamic
    bool active = true;
    bool declining = false;
    double decline = 0.0;
    double pace = 0.25;
    double arrears = 0.0;
};

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double ramp(double decline, double onset, double slope) {
    return clamp01((decline - onset) * slope);
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

const char* pick(Rng& rng, std::initializer_list<std::pair<const char*, double>> weighted) {
    double total = 0.0;
    for (const auto& [name, w] : weighted) total += w;
    double draw = rng.uniform() * total;
    for (const auto& [name, w] : weighted) {
        draw -= w;
        if (draw <= 0.0) return name;
    }
    return weighted.begin()->first;
}

double lognoise(Rng& rng, double sigma) {
    // Box-Muller on the deterministic uniform stream
    const double u1 = std::max(rng.uniform(), 1e-12);
    const double u2 = rng.uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    return std::exp(sigma * z);
}

double gauss(Rng& rng, double sigma) {
    const double u1 = std::max(rng.uniform(), 1e-12);
    const double u2 = rng.uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::sin(2.0 * 3.14159265358979323846 * u2);
}

CustomerState make_customer(std::size_t index, const GeneratorSpec& spec) {
    Rng rng(mix_seed(mix_seed(spec.seed, kStreamStatic), index));
    CustomerState c;
    char id[16];
    std::snprintf(id, sizeof(id), "C%07zu", index + 1);
    c.id = id;

    c.city_type = pick(rng, {{"urban", 0.55}, {"suburban", 0.30}, {"rural", 0.15}});
    c.credit = pick(rng, {{"A", 0.25}, {"B", 0.35}, {"C", 0.25}, {"D", 0.10}, {"E", 0.05}});
    c.mobile_type = pick(rng, {{"brand_a", 0.3}, {"brand_b", 0.25}, {"brand_c", 0.2}, {"brand_d", 0.15}, {"brand_e", 0.1}});
    c.join_month = month_add(spec.months.front(), -static_cast<int>(1 + rng.index(48)));

    c.usage_scale = std::exp(0.7 * gauss(rng, 1.0));
    c.gat_roaming = rng.uniform() < 0.05;
    c.provincial_roaming = rng.uniform() < 0.15;
    c.two_low = (c.usage_scale < 0.7) != (rng.uniform() < 0.05);
    c.three_low = (c.usage_scale < 0.5) != (rng.uniform() < 0.05);
    c.tdlte = rng.uniform() < 0.7;
    c.fddlte = rng.uniform() < 0.4;
    c.over_product_voice = rng.uniform() < 0.12;

    static const double kFees[6] = {38, 58, 78, 98, 128, 158};
    const double tier = clamp01(c.usage_scale / 2.5 + 0.2 * rng.uniform());
    c.monthly_fee = kFees[std::min<std::size_t>(5, static_cast<std::size_t>(tier * 6.0))];
    c.call_level = 90.0 * c.usage_scale * lognoise(rng, 0.3);
    c.sms_level = 35.0 * c.usage_scale * lognoise(rng, 0.4);

    c.has_promotion = rng.uniform() < 0.4;
    if (c.has_promotion) {
        const int span = month_diff(spec.months.back(), spec.months.front()) + 6;
        c.promotion_end = month_add(spec.months.front(), -2 + static_cast<int>(rng.index(static_cast<std::size_t>(span))));
    }

    if (rng.uniform() < kDyn.initial_decline_share) {
        c.declining = true;
        c.decline = 0.8 * rng.uniform();
    }
    c.pace = kDyn.pace_min + (kDyn.pace_max - kDyn.pace_min) * rng.uniform();
    return c;
}

std::vector<std::string> make_row(const CustomerState& c, int month, bool churned_this_month, Rng& rng) {
    const double dec = c.declining ? c.decline : 0.0;
    const double traffic_factor = 1.0 - 0.8 * ramp(dec, kDyn.traffic_onset, kDyn.traffic_slope);
    const double call_factor = 1.0 - 0.7 * ramp(dec, kDyn.call_onset, kDyn.call_slope);
    const int month_days = days_in_month(month);

    const double vacation = rng.uniform() < kDyn.vacation_rate ? 0.25 : 1.0;
    const double traffic_total = 3000.0 * c.usage_scale * traffic_factor * vacation * lognoise(rng, 0.25);
    const double paid_traffic = 0.55 * traffic_total * lognoise(rng, 0.1);
    const double free_traffic = 0.20 * traffic_total * lognoise(rng, 0.2);
    const double prov_traffic = 0.15 * traffic_total * lognoise(rng, 0.2);
    const double dom_traffic = 0.08 * traffic_total * lognoise(rng, 0.3);
    const double intl_traffic = c.gat_roaming ? 0.02 * traffic_total * lognoise(rng, 0.5) : 0.0;

    double used_days = month_days * (0.6 + 0.4 * rng.uniform()) * (1.0 - 0.7 * ramp(dec, kDyn.traffic_onset, kDyn.traffic_slope));
    used_days = std::min(static_cast<double>(month_days), std::max(0.0, used_days));

    const double paid_call = c.call_level * call_factor * lognoise(rng, 0.3);
    const double roaming_call = c.gat_roaming ? 25.0 * lognoise(rng, 0.6) : (rng.uniform() < 0.1 ? 4.0 * lognoise(rng, 0.5) : 0.0);
    const double domestic_ld = 0.2 * paid_call * lognoise(rng, 0.4);
    const double gat_intl = c.gat_roaming ? 6.0 * lognoise(rng, 0.7) : 0.0;
    const double non_gat_intl = rng.uniform() < 0.04 ? 3.0 * lognoise(rng, 0.7) : 0.0;
    const auto incoming = static_cast<long>(40.0 * c.usage_scale * lognoise(rng, 0.35));
    const auto outgoing = static_cast<long>(45.0 * c.usage_scale * call_factor * lognoise(rng, 0.35));

    double recharge = c.monthly_fee * (0.8 + 0.5 * rng.uniform());
    recharge *= std::max(0.0, 1.0 - kDyn.recharge_slope * std::max(0.0, dec - kDyn.recharge_onset));

    const bool promo_active = c.has_promotion && month <= c.promotion_end;
    const double grant = promo_active ? 0.3 * c.monthly_fee : 0.0;

    double shutdown_days = 0.0;
    if (dec > kDyn.shutdown_onset)
        shutdown_days = std::min<double>(month_days, std::round((dec - kDyn.shutdown_onset) * kDyn.shutdown_scale));
    else if (rng.uniform() < kDyn.healthy_shutdown_rate)
        shutdown_days = 1.0 + static_cast<double>(rng.index(4));

    const double voice_income = c.over_product_voice ? 8.0 * lognoise(rng, 0.6) : 0.0;
    const double stream_income = rng.uniform() < 0.15 ? 5.0 * lognoise(rng, 0.6) : 0.0;
    const auto sms = static_cast<long>(c.sms_level * lognoise(rng, 0.4) * (1.0 - 0.4 * ramp(dec, 0.4, 1.4)));

    const int half_stop = c.arrears > 1.5 * c.monthly_fee;

    std::vector<std::string> row;
    row.reserve(38);
    row.push_back(c.id);
    row.push_back(std::to_string(month));
    row.push_back(c.city_type);
    row.push_back(c.credit);
    row.push_back(std::to_string(c.join_month));
    row.push_back(std::to_string(c.gat_roaming));
    row.push_back(std::to_string(half_stop));
    row.push_back(std::to_string(c.provincial_roaming));
    row.push_back(std::to_string(c.two_low));
    row.push_back(std::to_string(c.three_low));
    row.push_back(c.mobile_type);
    row.push_back(std::to_string(c.tdlte));
    row.push_back(std::to_string(c.fddlte));
    row.push_back(fixed(roaming_call, 1));
    row.push_back(fixed(paid_call, 1));
    row.push_back(std::to_string(c.over_product_voice));
    row.push_back(fixed(domestic_ld, 1));
    row.push_back(fixed(gat_intl, 1));
    row.push_back(fixed(non_gat_intl, 1));
    row.push_back(std::to_string(incoming));
    row.push_back(std::to_string(outgoing));
    row.push_back(fixed(recharge, 2));
    row.push_back(fixed(c.monthly_fee, 2));
    row.push_back(fixed(grant, 2));
    row.push_back(fixed(paid_traffic, 2));
    row.push_back(fixed(free_traffic, 2));
    row.push_back(fixed(prov_traffic, 2));
    row.push_back(fixed(dom_traffic, 2));
    row.push_back(fixed(intl_traffic, 2));
    row.push_back(fixed(used_days, 0));
    row.push_back(fixed(c.arrears, 2));
    row.push_back(fixed(voice_income, 2));
    row.push_back(fixed(stream_income, 2));
    row.push_back(std::to_string(static_cast<long>(shutdown_days)));
    row.push_back(std::to_string(sms));
    row.push_back(std::to_string(promo_active ? 1 : 0));
    row.push_back(c.has_promotion ? std::to_string(c.promotion_end) : "");
    row.push_back("active");
    row.push_back(churned_this_month ? "churned" : "active");
    return row;
}

const std::vector<std::string>& header() {
    static const std::vector<std::string> kHeader = {
        "customer_id", "month", "city_type", "credit", "join_month", "gat_roaming_tag", "half_stop_flag",
        "provincial_roaming_tag", "two_low_user_tag", "three_low_user_tag", "mobile_type", "tdlte_tag",
        "fddlte_tag", "roaming_call_duration", "paid_call_duration", "over_product_voice_tag",
        "domestic_ld_call_duration", "gat_intl_ld_call_duration", "non_gat_intl_ld_call_duration",
        "incoming_call_count", "outgoing_call_count", "recharge_amount", "monthly_fee", "grant_amount",
        "paid_data_traffic", "free_data_traffic", "provincial_data_traffic", "domestic_data_traffic",
        "international_data_traffic", "data_traffic_used_days", "arrears_amount",
        "over_product_voice_income", "over_product_stream_income", "shutdown_days", "sms_count",
        "promotion_tag", "promotion_end_date", "churn_state_start", "churn_state_end"};
    return kHeader;
}

}  // namespace

std::vector<int> expand_month_range(const std::string& range) {
    const auto colon = range.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("month range must be FIRST:LAST, e.g. 201505:201512");
    const int first = parse_month(range.substr(0, colon));
    const int last = parse_month(range.substr(colon + 1));
    if (month_diff(last, first) < 0) throw std::invalid_argument("month range end precedes start");
    std::vector<int> months;
    for (int m = first; month_diff(last, m) >= 0; m = month_add(m, 1)) months.push_back(m);
    return months;
}

GeneratorOutput generate_synthetic(const GeneratorSpec& spec, const std::filesystem::path& out_dir) {
    if (spec.n_customers == 0) throw std::invalid_argument("generator: n_customers must be positive");
    if (spec.churn_rate < 0.0 || spec.churn_rate >= 1.0)
        throw std::invalid_argument("generator: churn_rate must be in [0, 1)");
    if (spec.months.size() < 5) throw std::invalid_argument("invalid month sequence: need at least 5 months");
    for (std::size_t i = 0; i < spec.months.size(); ++i) {
        if (!is_valid_month(spec.months[i]) ||
            (i > 0 && month_diff(spec.months[i], spec.months[i - 1]) != 1))
            throw std::invalid_argument("invalid month sequence: months must be consecutive YYYYMM keys");
    }

    std::filesystem::create_directories(out_dir);

    std::vector<CustomerState> customers;
    customers.reserve(spec.n_customers);
    for (std::size_t i = 0; i < spec.n_customers; ++i) customers.push_back(make_customer(i, spec));

    GeneratorOutput out;
    std::vector<std::vector<std::string>> propensity_rows;

    for (std::size_t mi = 0; mi < spec.months.size(); ++mi) {
        const int month = spec.months[mi];

        // evolve state and compute this month's churn scores
        std::vector<std::pair<double, std::size_t>> scored;  // (-score, index) for top-k selection
        std::vector<double> scores(customers.size(), 0.0);
        for (std::size_t i = 0; i < customers.size(); ++i) {
            CustomerState& c = customers[i];
            if (!c.active) continue;
            Rng rng(mix_seed(mix_seed(spec.seed, kStreamMonthly), i * 4096 + mi));

            const bool promo_just_ended = c.has_promotion && month_diff(month, c.promotion_end) == 1;
            if (!c.declining) {
                double hazard = spec.churn_rate * kDyn.entry_hazard_scale;
                if (promo_just_ended) hazard = std::min(1.0, hazard * 3.0);
                if (c.credit == "D" || c.credit == "E") hazard *= 1.3;
                if (rng.uniform() < hazard) {
                    c.declining = true;
                    c.decline = 0.0;
                }
            } else {
                c.decline = clamp01(c.decline + c.pace * (0.8 + 0.4 * rng.uniform()));
            }
            if (c.declining && c.decline > kDyn.arrears_onset)
                c.arrears += c.monthly_fee * (0.4 + 0.6 * rng.uniform());
            else if (rng.uniform() < kDyn.billing_hiccup_rate)
                c.arrears = 5.0 + 45.0 * rng.uniform();
            else
                c.arrears = 0.0;

            const bool promo_ending = c.has_promotion && month_diff(c.promotion_end, month) >= 0 &&
                                      month_diff(c.promotion_end, month) <= 1;
            const double shock = rng.uniform() < kDyn.shock_rate ? kDyn.shock_size : 0.0;
            const double score = (c.declining ? c.decline : 0.0) + (promo_ending ? kDyn.promo_bump : 0.0) +
                                 shock + spec.noise_level * gauss(rng, kDyn.score_noise);
            scores[i] = score;
            scored.emplace_back(-score, i);
        }

        // quantile calibration: exactly round(rate * active) churners this month
        const auto n_active = scored.size();
        const auto n_churn = static_cast<std::size_t>(std::llround(spec.churn_rate * static_cast<double>(n_active)));
        std::sort(scored.begin(), scored.end());
        std::vector<bool> churns(customers.size(), false);
        for (std::size_t r = 0; r < std::min(n_churn, n_active); ++r) churns[scored[r].second] = true;
        const double threshold = n_churn > 0 && n_churn <= n_active ? -scored[n_churn - 1].first
                                                                    : scored.empty() ? 1.0 : -scored.front().first + 1.0;

        std::vector<std::vector<std::string>> rows;
        rows.reserve(n_active);
        for (std::size_t i = 0; i < customers.size(); ++i) {
            CustomerState& c = customers[i];
            if (!c.active) continue;
            Rng row_rng(mix_seed(mix_seed(spec.seed, kStreamMonthly), i * 4096 + mi + 2048));
            rows.push_back(make_row(c, month, churns[i], row_rng));

            const double propensity = 1.0 / (1.0 + std::exp(-(scores[i] - threshold) / 0.08));
            propensity_rows.push_back({std::to_string(month), c.id, fixed(propensity, 6),
                                       churns[i] ? "1" : "0"});
            if (churns[i]) c.active = false;  // stops appearing in later months
        }

        const auto file = out_dir / ("customers_" + std::to_string(month) + ".csv");
        write_csv(file, header(), rows);
        out.month_files.push_back(file);
    }

    out.propensity_file = out_dir / "propensities.csv";
    write_csv(out.propensity_file, {"month", "customer_id", "propensity", "churned"}, propensity_rows);
    return out;
}

}  // namespace churn
