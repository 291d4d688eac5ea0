#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "seaice/errors.hpp"
#include "seaice/series.hpp"

namespace seaice::memory {

struct CorrelogramPoint {
    int lag = 0;
    double value = 0.0;
};

struct Correlogram {
    std::vector<CorrelogramPoint> points;
    double band = 0.0;  ///< 95% white-noise band, 1.96 / sqrt(n)
    std::size_t n = 0;  ///< observations entering the normalization

    [[nodiscard]] double at(int lag) const {
        for (const auto& p : points)
            if (p.lag == lag) return p.value;
        throw RangeError("correlogram has no lag " + std::to_string(lag));
    }
};

namespace detail {

struct Centered {
    std::vector<double> dev;  ///< deviation from the mean, 0 where unusable
    std::vector<bool> use;
    std::size_t n = 0;
    double ss = 0.0;
};

inline Centered center(const DailySeries& s, const std::vector<bool>& use) {
    Centered c;
    c.use = use;
    c.dev.assign(s.size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (use[i]) {
            sum += s.value(i);
            ++c.n;
        }
    if (c.n == 0) throw EmptyInputError("correlogram: no observed values");
    const double mean = sum / static_cast<double>(c.n);
    for (std::size_t i = 0; i < s.size(); ++i)
        if (use[i]) {
            c.dev[i] = s.value(i) - mean;
            c.ss += c.dev[i] * c.dev[i];
        }
    if (!(c.ss > 0.0)) throw ZeroVarianceError("correlogram: series has zero variance");
    return c;
}

}  // namespace detail

/// Biased (divide-by-n) sample autocorrelation for lags 0..max_lag.
/// Pairs with a masked member are skipped.
[[nodiscard]] inline Correlogram acf(const DailySeries& s, std::size_t max_lag) {
    const std::size_t nobs = s.observed_count();
    if (nobs <= max_lag) throw InsufficientDataError("acf: observed length must exceed max_lag");
    const auto c = detail::center(s, s.mask());
    Correlogram out;
    out.n = c.n;
    out.band = 1.96 / std::sqrt(static_cast<double>(c.n));
    out.points.push_back({0, 1.0});
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t + k < s.size(); ++t)
            if (c.use[t] && c.use[t + k]) acc += c.dev[t] * c.dev[t + k];
        out.points.push_back({static_cast<int>(k), acc / c.ss});
    }
    return out;
}

/// Cross-correlation r(k) = corr(a(t), b(t+k)) for k in [-max_lag, max_lag],
/// over the days on which both series are observed. Inputs must share a calendar.
[[nodiscard]] inline Correlogram ccf(const DailySeries& a, const DailySeries& b, std::size_t max_lag) {
    if (a.start() != b.start() || a.size() != b.size()) throw ContractError("ccf: series must be aligned");
    std::vector<bool> both(a.size());
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        both[i] = a.is_observed(i) && b.is_observed(i);
        n += both[i] ? 1 : 0;
    }
    if (n <= max_lag) throw InsufficientDataError("ccf: jointly observed length must exceed max_lag");
    const auto ca = detail::center(a, both);
    const auto cb = detail::center(b, both);
    const double denom = std::sqrt(ca.ss * cb.ss);
    Correlogram out;
    out.n = n;
    out.band = 1.96 / std::sqrt(static_cast<double>(n));
    const auto L = static_cast<long>(max_lag);
    const auto len = static_cast<long>(a.size());
    for (long k = -L; k <= L; ++k) {
        double acc = 0.0;
        for (long t = std::max(0L, -k); t < len && t + k < len; ++t) {
            const auto i = static_cast<std::size_t>(t), j = static_cast<std::size_t>(t + k);
            if (both[i] && both[j]) acc += ca.dev[i] * cb.dev[j];
        }
        out.points.push_back({static_cast<int>(k), acc / denom});
    }
    return out;
}

/// CSV `lag,value,band`.
[[nodiscard]] inline std::string correlogram_csv(const Correlogram& c) {
    std::ostringstream os;
    os.precision(17);
    os << "lag,value,band\n";
    for (const auto& p : c.points) os << p.lag << ',' << p.value << ',' << c.band << '\n';
    return os.str();
}

}  // namespace seaice::memory
