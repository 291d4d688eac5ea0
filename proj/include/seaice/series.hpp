#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seaice/calendar.hpp"
#include "seaice/errors.hpp"

namespace seaice {

/// Calendar-indexed daily scalar series with an explicit observation mask.
///
/// Index i is the day `start + i`. Masked entries hold NaN and must be ignored
/// by every consumer; equality compares only the mask and observed values.
class DailySeries {
public:
    DailySeries() = default;

    DailySeries(CalendarDate start, std::vector<double> values, std::vector<bool> mask,
                std::string units = {})
        : start_(start), values_(std::move(values)), mask_(std::move(mask)), units_(std::move(units)) {
        if (values_.empty()) throw ContractError("DailySeries needs at least one day");
        if (values_.size() != mask_.size()) throw ContractError("DailySeries values/mask length mismatch");
        if (!start_.valid()) throw ContractError("DailySeries start is not a valid date");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!mask_[i]) {
                values_[i] = std::numeric_limits<double>::quiet_NaN();
            } else if (!std::isfinite(values_[i])) {
                throw ContractError("observed value at " + date_at(i).iso() + " is not finite");
            }
        }
    }

    /// Fully observed series.
    static DailySeries observed(CalendarDate start, std::vector<double> values, std::string units = {}) {
        std::vector<bool> mask(values.size(), true);
        return DailySeries(start, std::move(values), std::move(mask), std::move(units));
    }

    [[nodiscard]] const CalendarDate& start() const noexcept { return start_; }
    [[nodiscard]] CalendarDate end() const { return date_at(size() - 1); }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
    [[nodiscard]] const std::string& units() const noexcept { return units_; }
    [[nodiscard]] double value(std::size_t i) const { return values_.at(i); }
    [[nodiscard]] bool is_observed(std::size_t i) const { return mask_.at(i); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<bool>& mask() const noexcept { return mask_; }

    [[nodiscard]] CalendarDate date_at(std::size_t i) const {
        return start_.plus_days(static_cast<std::int64_t>(i));
    }

    [[nodiscard]] std::optional<std::size_t> index_of(const CalendarDate& d) const {
        const auto off = days_between(start_, d);
        if (off < 0 || static_cast<std::size_t>(off) >= size()) return std::nullopt;
        return static_cast<std::size_t>(off);
    }

    [[nodiscard]] std::size_t observed_count() const {
        std::size_t n = 0;
        for (bool b : mask_) n += b ? 1 : 0;
        return n;
    }

    [[nodiscard]] std::vector<double> observed_values() const {
        std::vector<double> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i)
            if (mask_[i]) out.push_back(values_[i]);
        return out;
    }

    /// Longest run of consecutive observed days as (first index, length).
    [[nodiscard]] std::pair<std::size_t, std::size_t> longest_observed_run() const {
        std::size_t best_start = 0, best_len = 0, cur_start = 0, cur_len = 0;
        for (std::size_t i = 0; i < size(); ++i) {
            if (mask_[i]) {
                if (cur_len == 0) cur_start = i;
                if (++cur_len > best_len) {
                    best_len = cur_len;
                    best_start = cur_start;
                }
            } else {
                cur_len = 0;
            }
        }
        return {best_start, best_len};
    }

    [[nodiscard]] std::vector<double> longest_observed_stretch() const {
        const auto [first, len] = longest_observed_run();
        return {values_.begin() + static_cast<std::ptrdiff_t>(first),
                values_.begin() + static_cast<std::ptrdiff_t>(first + len)};
    }

    friend bool operator==(const DailySeries& a, const DailySeries& b) {
        if (a.start_ != b.start_ || a.mask_ != b.mask_ || a.units_ != b.units_) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a.mask_[i] && std::memcmp(&a.values_[i], &b.values_[i], sizeof(double)) != 0) return false;
        }
        return true;
    }

private:
    CalendarDate start_{};
    std::vector<double> values_;
    std::vector<bool> mask_;
    std::string units_;
};

}  // namespace seaice
