#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "tceforge/errors.hpp"

namespace tceforge {

// Calendar date at UTC day granularity, stored as days since the civil epoch.
// Parsed from and formatted as ISO-8601 `YYYY-MM-DD`.
class Date {
public:
    Date() = default;

    static Date from_days(std::int32_t days) {
        Date d;
        d.days_ = days;
        return d;
    }

    static Date from_ymd(int year, unsigned month, unsigned day) {
        using namespace std::chrono;
        year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                           std::chrono::day{day}};
        if (!ymd.ok())
            throw ParseError("invalid calendar date: " + std::to_string(year) + "-" +
                             std::to_string(month) + "-" + std::to_string(day));
        return from_days(static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count()));
    }

    static Date parse(std::string_view text);

    std::int32_t days_since_epoch() const { return days_; }

    std::string to_string() const;

    Date plus_days(std::int32_t n) const { return from_days(days_ + n); }

    friend std::int32_t operator-(Date a, Date b) { return a.days_ - b.days_; }
    auto operator<=>(const Date&) const = default;

private:
    std::int32_t days_ = 0;
};

}  // namespace tceforge
