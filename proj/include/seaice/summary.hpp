#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "seaice/errors.hpp"
#include "seaice/series.hpp"

namespace seaice::memory {

enum class Bucket { Yearly, Monthly };

inline constexpr std::size_t kMinBucketSize = 5;

struct SkewRow {
    std::string bucket;  ///< "1979" or "1979-01"
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double diff = 0.0;   ///< mean - median
};

struct SkewSummary {
    Bucket bucket = Bucket::Yearly;
    std::vector<SkewRow> rows;
    std::vector<std::string> notes;  ///< buckets skipped for sparsity
    std::size_t median_above_mean = 0;
    std::size_t mean_above_median = 0;
};

[[nodiscard]] inline double median_of(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

/// Per-bucket mean, median and their difference over observed days.
[[nodiscard]] inline SkewSummary skew_summary(const DailySeries& s, Bucket bucket) {
    std::map<std::string, std::vector<double>> groups;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.is_observed(i)) continue;
        const auto d = s.date_at(i);
        char key[16];
        if (bucket == Bucket::Yearly) {
            std::snprintf(key, sizeof key, "%04d", d.year);
        } else {
            std::snprintf(key, sizeof key, "%04d-%02u", d.year, d.month);
        }
        groups[key].push_back(s.value(i));
    }
    if (groups.empty()) throw EmptyInputError("skew_summary: no observed values");

    SkewSummary out;
    out.bucket = bucket;
    for (auto& [key, vals] : groups) {
        if (vals.size() < kMinBucketSize) {
            out.notes.push_back("skipped " + key + ": only " + std::to_string(vals.size()) + " observations");
            continue;
        }
        SkewRow row;
        row.bucket = key;
        row.count = vals.size();
        double sum = 0.0;
        for (double v : vals) sum += v;
        row.mean = sum / static_cast<double>(vals.size());
        row.median = median_of(std::move(vals));
        row.diff = row.mean - row.median;
        if (row.median > row.mean) ++out.median_above_mean;
        if (row.mean > row.median) ++out.mean_above_median;
        out.rows.push_back(std::move(row));
    }
    return out;
}

/// CSV `bucket,count,mean,median,diff`.
[[nodiscard]] inline std::string skew_csv(const SkewSummary& s) {
    std::ostringstream os;
    os.precision(17);
    os << "bucket,count,mean,median,diff\n";
    for (const auto& r : s.rows) os << r.bucket << ',' << r.count << ',' << r.mean << ',' << r.median << ',' << r.diff << '\n';
    return os.str();
}

}  // namespace seaice::memory
