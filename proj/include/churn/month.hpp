#pragma once

#include <stdexcept>
#include <string>

namespace churn {

// Months are 6-digit YYYYMM keys, e.g. 201507.

inline bool is_valid_month(int ym) {
    const int year = ym / 100;
    const int month = ym % 100;
    return year >= 1000 && year <= 9999 && month >= 1 && month <= 12;
}

inline int month_add(int ym, int delta) {
    int linear = (ym / 100) * 12 + (ym % 100 - 1) + delta;
    return (linear / 12) * 100 + (linear % 12) + 1;
}

// Signed number of months from b to a.
inline int month_diff(int a, int b) {
    return ((a / 100) - (b / 100)) * 12 + (a % 100) - (b % 100);
}

inline int days_in_month(int ym) {
    static const int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const int year = ym / 100;
    const int month = ym % 100;
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) return 29;
    return kDays[month - 1];
}

inline int parse_month(const std::string& text) {
    if (text.size() != 6) throw std::invalid_argument("month key must be 6 digits (YYYYMM): " + text);
    for (char c : text)
        if (c < '0' || c > '9') throw std::invalid_argument("month key must be 6 digits (YYYYMM): " + text);
    int ym = std::stoi(text);
    if (!is_valid_month(ym)) throw std::invalid_argument("invalid year-month: " + text);
    return ym;
}

}  // namespace churn
