#pragma once

// Readers for the NSIDC daily sea-ice-extent CSV and the NOAA daily NAO
// index, calendar alignment, and repair of the alternate-day SIE era.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "seaice/calendar.hpp"
#include "seaice/errors.hpp"
#include "seaice/series.hpp"

namespace seaice::ingest {

inline constexpr double kSieMissingSentinel = -9999.0;
inline const std::string kSieUnits = "million sq km";
inline const std::string kNaoUnits = "index";

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_rejected = 0;
    std::size_t gaps_filled = 0;
    CalendarDate first{};
    CalendarDate last{};
};

struct ParsedSeries {
    DailySeries series;
    IngestReport report;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n\v\f";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<int> to_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < text.size()) lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

inline std::vector<std::string_view> split_on(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto c = line.find(sep, pos);
        if (c == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, c - pos));
        pos = c + 1;
    }
    return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const auto b = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > b) out.push_back(line.substr(b, i - b));
    }
    return out;
}

inline CalendarDate checked_date(std::size_t line, int y, int m, int d) {
    auto date = CalendarDate::make(y, m, d);
    if (!date) {
        throw ParseError(line, "invalid date " + std::to_string(y) + "-" + std::to_string(m) + "-" +
                                   std::to_string(d));
    }
    return *date;
}

struct Row {
    CalendarDate date;
    double value;
    bool observed;
};

/// Lays rows (already sorted and unique) onto a daily grid.
inline DailySeries grid_from_rows(const std::vector<Row>& rows, const std::string& units) {
    const auto& first = rows.front().date;
    const auto len = static_cast<std::size_t>(days_between(first, rows.back().date)) + 1;
    std::vector<double> values(len, 0.0);
    std::vector<bool> mask(len, false);
    for (const auto& r : rows) {
        const auto i = static_cast<std::size_t>(days_between(first, r.date));
        values[i] = r.value;
        mask[i] = r.observed;
    }
    return DailySeries(first, std::move(values), std::move(mask), units);
}

inline std::string shortest(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace detail

/// Parses the NSIDC v3.0 daily extent CSV
/// (`Year, Month, Day, Extent, Missing, Source`).
///
/// Leading lines whose first field is not an integer are treated as headers.
/// Rows whose date does not strictly advance are rejected and counted.
[[nodiscard]] inline ParsedSeries parse_sie(std::string_view content) {
    const auto lines = detail::split_lines(content);
    std::vector<detail::Row> rows;
    IngestReport report;
    bool in_body = false;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const auto line = detail::trim(lines[ln]);
        if (line.empty()) continue;
        const auto fields = detail::split_on(line, ',');
        if (!in_body) {
            if (!detail::to_int(fields[0])) continue;  // header
            in_body = true;
        }
        ++report.rows_read;
        if (fields.size() < 4) throw ParseError(ln + 1, "expected at least 4 comma-separated fields");
        const auto y = detail::to_int(fields[0]);
        const auto m = detail::to_int(fields[1]);
        const auto d = detail::to_int(fields[2]);
        const auto extent = detail::to_double(fields[3]);
        if (!y || !m || !d) throw ParseError(ln + 1, "non-numeric date field");
        if (!extent) throw ParseError(ln + 1, "non-numeric extent '" + std::string(detail::trim(fields[3])) + "'");
        if (fields.size() >= 5 && !detail::trim(fields[4]).empty() && !detail::to_double(fields[4])) {
            throw ParseError(ln + 1, "non-numeric missing-area field");
        }
        const auto date = detail::checked_date(ln + 1, *y, *m, *d);
        if (!rows.empty() && date <= rows.back().date) {
            ++report.rows_rejected;
            continue;
        }
        const bool observed = *extent != kSieMissingSentinel && std::isfinite(*extent);
        rows.push_back({date, *extent, observed});
    }
    if (rows.empty()) throw EmptyInputError("SIE input has no data rows");
    report.first = rows.front().date;
    report.last = rows.back().date;
    return {detail::grid_from_rows(rows, kSieUnits), report};
}

/// Parses the NOAA daily NAO ASCII (`year month day value`).
/// Duplicate dates keep the last row; calendar days without a row are masked.
[[nodiscard]] inline ParsedSeries parse_nao(std::string_view content) {
    const auto lines = detail::split_lines(content);
    std::map<CalendarDate, double> by_date;
    IngestReport report;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const auto line = detail::trim(lines[ln]);
        if (line.empty()) continue;
        const auto fields = detail::split_ws(line);
        ++report.rows_read;
        if (fields.size() < 4) throw ParseError(ln + 1, "expected `year month day value`");
        const auto y = detail::to_int(fields[0]);
        const auto m = detail::to_int(fields[1]);
        const auto d = detail::to_int(fields[2]);
        const auto v = detail::to_double(fields[3]);
        if (!y || !m || !d) throw ParseError(ln + 1, "non-numeric date field");
        if (!v || !std::isfinite(*v)) throw ParseError(ln + 1, "non-numeric value '" + std::string(fields[3]) + "'");
        const auto date = detail::checked_date(ln + 1, *y, *m, *d);
        auto [it, inserted] = by_date.insert_or_assign(date, *v);
        if (!inserted) ++report.rows_rejected;
    }
    if (by_date.empty()) throw EmptyInputError("NAO input has no data rows");
    std::vector<detail::Row> rows;
    rows.reserve(by_date.size());
    for (const auto& [date, v] : by_date) rows.push_back({date, v, true});
    report.first = rows.front().date;
    report.last = rows.back().date;
    return {detail::grid_from_rows(rows, kNaoUnits), report};
}

/// Writes a series in the NSIDC layout; masked days become sentinel rows.
[[nodiscard]] inline std::string serialize_sie(const DailySeries& s) {
    std::string out = " Year, Month, Day,     Extent,    Missing, Source Data\n";
    out += "  YYYY,    MM,  DD, 10^6 sq km, 10^6 sq km, Source data product web site\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto d = s.date_at(i);
        const double v = s.is_observed(i) ? s.value(i) : kSieMissingSentinel;
        out += "  " + std::to_string(d.year) + ", " + std::to_string(d.month) + ", " + std::to_string(d.day) +
               ", " + detail::shortest(v) + ", 0.000, ['serialized']\n";
    }
    return out;
}

/// Writes a series in the NAO layout; masked days are omitted.
[[nodiscard]] inline std::string serialize_nao(const DailySeries& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.is_observed(i)) continue;
        const auto d = s.date_at(i);
        out += std::to_string(d.year) + " " + std::to_string(d.month) + " " + std::to_string(d.day) + " " +
               detail::shortest(s.value(i)) + "\n";
    }
    return out;
}

/// Restricts one series to [from, to]; days absent from the source are masked.
[[nodiscard]] inline DailySeries restrict_to(const DailySeries& s, const CalendarDate& from, const CalendarDate& to) {
    const auto len = static_cast<std::size_t>(days_between(from, to)) + 1;
    std::vector<double> values(len, 0.0);
    std::vector<bool> mask(len, false);
    const auto offset = days_between(s.start(), from);
    for (std::size_t i = 0; i < len; ++i) {
        const auto src = offset + static_cast<std::int64_t>(i);
        if (src < 0 || src >= static_cast<std::int64_t>(s.size())) continue;
        const auto j = static_cast<std::size_t>(src);
        if (s.is_observed(j)) {
            values[i] = s.value(j);
            mask[i] = true;
        }
    }
    return DailySeries(from, std::move(values), std::move(mask), s.units());
}

/// Puts both series on the common calendar [from, to].
[[nodiscard]] inline std::pair<DailySeries, DailySeries> align(const DailySeries& a, const DailySeries& b,
                                                               const CalendarDate& from, const CalendarDate& to) {
    if (from > to) throw RangeError("align: from " + from.iso() + " is after to " + to.iso());
    auto overlaps = [&](const DailySeries& s) { return s.start() <= to && s.end() >= from; };
    if (!overlaps(a) || !overlaps(b)) {
        throw RangeError("align: a series does not overlap [" + from.iso() + ", " + to.iso() + "]");
    }
    return {restrict_to(a, from, to), restrict_to(b, from, to)};
}

/// Fills isolated single-day gaps on or before `until` with the mean of the two
/// observed neighbours. Longer gaps stay masked and observed values never change.
[[nodiscard]] inline ParsedSeries fill_alternate_days(const DailySeries& s, const CalendarDate& until) {
    std::vector<double> values = s.values();
    std::vector<bool> mask = s.mask();
    IngestReport report;
    report.first = s.start();
    report.last = s.end();
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (mask[i] || s.date_at(i) > until) continue;
        if (s.is_observed(i - 1) && s.is_observed(i + 1)) {
            values[i] = 0.5 * (s.value(i - 1) + s.value(i + 1));
            mask[i] = true;
            ++report.gaps_filled;
        }
    }
    return {DailySeries(s.start(), std::move(values), std::move(mask), s.units()), report};
}

}  // namespace seaice::ingest
