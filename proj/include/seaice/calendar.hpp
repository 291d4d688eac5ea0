#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "seaice/errors.hpp"

namespace seaice {

/// Proleptic Gregorian calendar date. Field order makes the defaulted
/// comparison chronological.
struct CalendarDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    auto operator<=>(const CalendarDate&) const = default;

    [[nodiscard]] bool valid() const {
        return to_ymd().ok();
    }

    /// Days since 1970-01-01.
    [[nodiscard]] std::int64_t to_days() const {
        return std::chrono::sys_days(to_ymd()).time_since_epoch().count();
    }

    [[nodiscard]] static CalendarDate from_days(std::int64_t days) {
        const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
        return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day())};
    }

    /// Returns nullopt for impossible dates such as 1979-02-30.
    [[nodiscard]] static std::optional<CalendarDate> make(int y, int m, int d) {
        if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
        CalendarDate c{y, static_cast<unsigned>(m), static_cast<unsigned>(d)};
        if (!c.valid()) return std::nullopt;
        return c;
    }

    /// Parses `YYYY-MM-DD`.
    [[nodiscard]] static CalendarDate parse_iso(std::string_view text) {
        int y = 0, m = 0, d = 0;
        char tail = 0;
        const std::string s(text);
        if (std::sscanf(s.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3) {
            throw ContractError("bad date '" + s + "', expected YYYY-MM-DD");
        }
        auto c = make(y, m, d);
        if (!c) throw ContractError("invalid calendar date '" + s + "'");
        return *c;
    }

    [[nodiscard]] std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
        return buf;
    }

    [[nodiscard]] CalendarDate plus_days(std::int64_t n) const { return from_days(to_days() + n); }

private:
    [[nodiscard]] std::chrono::year_month_day to_ymd() const {
        return std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                           std::chrono::day{day}};
    }
};

/// Signed number of days from `a` to `b`.
[[nodiscard]] inline std::int64_t days_between(const CalendarDate& a, const CalendarDate& b) {
    return b.to_days() - a.to_days();
}

}  // namespace seaice
