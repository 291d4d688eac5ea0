#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "seaice/errors.hpp"
#include "seaice/regress.hpp"
#include "seaice/series.hpp"

namespace seaice::memory {

struct AdfResult {
    double statistic = 0.0;  ///< t-ratio of rho
    std::size_t lag_order = 0;
    std::size_t observations = 0;
    std::array<double, 3> critical_values{};  ///< 1%, 5%, 10%
    std::pair<double, double> p_value_bracket{0.0, 1.0};
    bool reject_unit_root_5pct = false;
};

/// Finite-sample critical values for the constant-only ADF regression
/// (MacKinnon response surfaces), ordered 1%, 5%, 10%.
[[nodiscard]] inline std::array<double, 3> adf_critical_values(std::size_t nobs) {
    constexpr double coef[3][4] = {
        {-3.43035, -6.5393, -16.786, -79.433},
        {-2.86154, -2.8903, -4.234, -40.040},
        {-2.56677, -1.5384, -2.809, 0.0},
    };
    const double T = static_cast<double>(nobs);
    std::array<double, 3> cv{};
    for (std::size_t i = 0; i < 3; ++i) {
        cv[i] = coef[i][0] + coef[i][1] / T + coef[i][2] / (T * T) + coef[i][3] / (T * T * T);
    }
    return cv;
}

/// Schwert-style cap 12 (n/100)^(1/4).
[[nodiscard]] inline std::size_t adf_lag_cap(std::size_t n) {
    return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

namespace detail {

/// dy_t = a + rho y_{t-1} + sum_{i<=p} phi_i dy_{t-i}, rows t = first..n-1.
inline regress::OlsFit adf_regression(std::span<const double> y, std::size_t p, std::size_t first) {
    const std::size_t n = y.size();
    const auto rows = static_cast<Eigen::Index>(n - first);
    Eigen::MatrixXd X(rows, static_cast<Eigen::Index>(p + 2));
    Eigen::VectorXd dy(rows);
    for (std::size_t t = first; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - first);
        dy(r) = y[t] - y[t - 1];
        X(r, 0) = 1.0;
        X(r, 1) = y[t - 1];
        for (std::size_t i = 1; i <= p; ++i) X(r, static_cast<Eigen::Index>(i + 1)) = y[t - i] - y[t - i - 1];
    }
    std::vector<std::string> labels{"const", "y(t-1)"};
    for (std::size_t i = 1; i <= p; ++i) labels.push_back("dy(t-" + std::to_string(i) + ")");
    return regress::ols(regress::DesignMatrix(std::move(X), std::move(labels)), dy);
}

}  // namespace detail

/// Augmented Dickey-Fuller test, constant and no trend. The lag order
/// minimizes AIC over 0..min(max_lag, cap) on a common sample, then the chosen
/// regression is refit on every usable row. The p-value is only bracketed by
/// the tabulated 1/5/10% critical values.
[[nodiscard]] inline AdfResult adf_test(std::span<const double> y, std::size_t max_lag) {
    const std::size_t n = y.size();
    if (n <= max_lag + 10) throw DiagnosticError("adf_test: series too short for max_lag");
    bool constant = true;
    for (double v : y) constant = constant && v == y[0];
    if (constant) throw ZeroVarianceError("adf_test: series is constant");

    const std::size_t pmax = std::min(max_lag, adf_lag_cap(n));
    std::size_t best_p = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p <= pmax; ++p) {
        const auto fit = detail::adf_regression(y, p, pmax + 1);
        const double T = static_cast<double>(fit.n);
        const double aic = T * std::log(fit.rss / T) + 2.0 * static_cast<double>(fit.p);
        if (aic < best_aic) {
            best_aic = aic;
            best_p = p;
        }
    }

    const auto fit = detail::adf_regression(y, best_p, best_p + 1);
    AdfResult r;
    r.lag_order = best_p;
    r.observations = fit.n;
    r.statistic = fit.coefficients(1) / fit.standard_errors(1);
    r.critical_values = adf_critical_values(fit.n);
    const auto& cv = r.critical_values;
    if (r.statistic < cv[0]) {
        r.p_value_bracket = {0.0, 0.01};
    } else if (r.statistic < cv[1]) {
        r.p_value_bracket = {0.01, 0.05};
    } else if (r.statistic < cv[2]) {
        r.p_value_bracket = {0.05, 0.10};
    } else {
        r.p_value_bracket = {0.10, 1.0};
    }
    r.reject_unit_root_5pct = r.statistic < cv[1];
    return r;
}

/// Runs on the longest contiguous observed stretch.
[[nodiscard]] inline AdfResult adf_test(const DailySeries& s, std::size_t max_lag) {
    const auto stretch = s.longest_observed_stretch();
    return adf_test(std::span<const double>(stretch), max_lag);
}

}  // namespace seaice::memory
