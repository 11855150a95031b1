#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include "peakprob/errors.hpp"

namespace peakprob {

// Calendar dates are plain day-resolution time points; all arithmetic and
// comparisons come from <chrono>.
using Date = std::chrono::sys_days;

inline Date make_date(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                       std::chrono::day{day}};
    if (!ymd.ok()) {
        throw DataError("invalid calendar date: " + std::to_string(year) + "-" +
                        std::to_string(month) + "-" + std::to_string(day));
    }
    return Date{ymd};
}

// Parse "YYYY-MM-DD".
inline Date parse_date(std::string_view iso) {
    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw DataError("invalid ISO date (expected YYYY-MM-DD): " + std::string(iso));
    }
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!is_digit(iso[i])) {
            throw DataError("invalid ISO date (expected YYYY-MM-DD): " + std::string(iso));
        }
    }
    int y = (iso[0] - '0') * 1000 + (iso[1] - '0') * 100 + (iso[2] - '0') * 10 + (iso[3] - '0');
    unsigned m = (iso[5] - '0') * 10u + (iso[6] - '0');
    unsigned d = (iso[8] - '0') * 10u + (iso[9] - '0');
    return make_date(y, m, d);
}

inline std::string to_iso(Date d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return std::string(buf);
}

inline int year_of(Date d) {
    return static_cast<int>(std::chrono::year_month_day{d}.year());
}

inline unsigned month_of(Date d) {
    return static_cast<unsigned>(std::chrono::year_month_day{d}.month());
}

inline unsigned day_of(Date d) {
    return static_cast<unsigned>(std::chrono::year_month_day{d}.day());
}

inline bool is_weekend(Date d) {
    std::chrono::weekday wd{d};
    return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

} // namespace peakprob
