#pragma once

// Rescaled-range (R/S) family of Hurst exponent estimators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "seaice/errors.hpp"
#include "seaice/series.hpp"

namespace seaice::memory {

inline constexpr std::size_t kHurstMinLength = 256;
inline constexpr std::size_t kHurstMinBlock = 8;
inline constexpr double kHurstGridFactor = 1.25;

struct HurstReport {
    double simple_rs = 0.0;            ///< slope of log2 R/S on the dyadic grid
    double corrected_rs = 0.0;         ///< 0.5 + slope of log2 (R/S / E_AL[R/S]), dyadic grid
    double empirical = 0.0;            ///< slope of log2 R/S on the x1.25 grid
    double corrected_empirical = 0.0;  ///< slope of log2 (R/S - E_ALP + sqrt(pi n / 2)), x1.25 grid
    double theoretical = 0.0;          ///< slope of log2 E_ALP[R/S], x1.25 grid
    std::size_t length = 0;
    bool unreliable = false;           ///< some estimate fell outside (0, 1.5)
};

/// Mean rescaled range over the floor(N / n) non-overlapping blocks of size n.
/// S is the divide-by-n standard deviation; zero-variance blocks are skipped.
[[nodiscard]] inline double rescaled_range(std::span<const double> x, std::size_t n) {
    const std::size_t blocks = x.size() / n;
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const auto block = x.subspan(b * n, n);
        double mean = 0.0;
        for (double v : block) mean += v;
        mean /= static_cast<double>(n);
        double z = 0.0, zmax = 0.0, zmin = 0.0, ss = 0.0;
        for (double v : block) {
            const double d = v - mean;
            z += d;
            zmax = std::max(zmax, z);
            zmin = std::min(zmin, z);
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (sd > 0.0) {
            total += (zmax - zmin) / sd;
            ++used;
        }
    }
    if (used == 0) throw DiagnosticError("hurst: every block of size " + std::to_string(n) + " is constant");
    return total / static_cast<double>(used);
}

/// Anis-Lloyd expected R/S of an independent Gaussian sample of size n,
/// optionally with Peters' (n - 1/2)/n factor.
[[nodiscard]] inline double expected_rs(std::size_t n, bool peters) {
    const double nd = static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 1; i < n; ++i) sum += std::sqrt((nd - static_cast<double>(i)) / static_cast<double>(i));
    double lead;
    if (n <= 340) {
        lead = std::exp(std::lgamma(0.5 * (nd - 1.0)) - std::lgamma(0.5 * nd)) / std::sqrt(std::numbers::pi);
    } else {
        lead = 1.0 / std::sqrt(0.5 * std::numbers::pi * nd);
    }
    const double factor = peters ? (nd - 0.5) / nd : 1.0;
    return factor * lead * sum;
}

namespace detail {

inline std::vector<std::size_t> dyadic_grid(std::size_t len) {
    std::vector<std::size_t> g;
    for (std::size_t n = kHurstMinBlock; n <= len / 2; n *= 2) g.push_back(n);
    return g;
}

inline std::vector<std::size_t> geometric_grid(std::size_t len) {
    std::vector<std::size_t> g;
    double n = static_cast<double>(kHurstMinBlock);
    std::size_t last = 0;
    while (static_cast<std::size_t>(std::lround(n)) <= len / 2) {
        const auto k = static_cast<std::size_t>(std::lround(n));
        if (k != last) g.push_back(k);
        last = k;
        n *= kHurstGridFactor;
    }
    return g;
}

inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace detail

[[nodiscard]] inline HurstReport hurst(std::span<const double> x) {
    if (x.size() < kHurstMinLength) {
        throw DiagnosticError("hurst: need at least " + std::to_string(kHurstMinLength) + " contiguous observations");
    }
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) throw DiagnosticError("hurst: series is constant");

    HurstReport r;
    r.length = x.size();

    const auto dyadic = detail::dyadic_grid(x.size());
    std::vector<double> lx, ly, lc;
    for (auto n : dyadic) {
        const double rs = rescaled_range(x, n);
        lx.push_back(std::log2(static_cast<double>(n)));
        ly.push_back(std::log2(rs));
        lc.push_back(std::log2(rs / expected_rs(n, false)));
    }
    r.simple_rs = detail::slope(lx, ly);
    r.corrected_rs = 0.5 + detail::slope(lx, lc);

    const auto dense = detail::geometric_grid(x.size());
    std::vector<double> gx, gy, gc, gt;
    for (auto n : dense) {
        const double rs = rescaled_range(x, n);
        const double e = expected_rs(n, true);
        const double nd = static_cast<double>(n);
        gx.push_back(std::log2(nd));
        gy.push_back(std::log2(rs));
        gc.push_back(std::log2(rs - e + std::sqrt(0.5 * std::numbers::pi * nd)));
        gt.push_back(std::log2(e));
    }
    r.empirical = detail::slope(gx, gy);
    r.corrected_empirical = detail::slope(gx, gc);
    r.theoretical = detail::slope(gx, gt);

    for (double h : {r.simple_rs, r.corrected_rs, r.empirical, r.corrected_empirical, r.theoretical}) {
        if (!(h > 0.0 && h < 1.5)) r.unreliable = true;
    }
    return r;
}

/// Runs on the longest contiguous observed stretch of the series.
[[nodiscard]] inline HurstReport hurst(const DailySeries& s) {
    const auto stretch = s.longest_observed_stretch();
    return hurst(std::span<const double>(stretch));
}

}  // namespace seaice::memory
