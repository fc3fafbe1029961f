#pragma once

// Calendar dates as day counts; text form is ISO-8601 (YYYY-MM-DD).

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "rehab/error.hpp"

namespace rehab::service {

using Date = std::chrono::sys_days;

inline Date parse_date(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    const std::string s(text);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
        std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
        throw Error(ErrorKind::parse, "date must be YYYY-MM-DD: " + s);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw Error(ErrorKind::validation, "no such calendar date: " + s);
    return Date{ymd};
}

inline std::string format_date(Date date) {
    const std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

inline long days_between(Date from, Date to) { return (to - from).count(); }

inline Date add_days(Date date, long days) { return date + std::chrono::days{days}; }

}  // namespace rehab::service
