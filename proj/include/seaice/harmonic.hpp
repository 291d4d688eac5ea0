#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "seaice/calendar.hpp"
#include "seaice/errors.hpp"
#include "seaice/regress.hpp"
#include "seaice/series.hpp"

namespace seaice::harmonic {

/// Periods (days) and harmonics per period of the seasonal part; the trend is
/// always quadratic.
struct HarmonicSpec {
    std::vector<double> periods{365.25};
    std::size_t harmonics = 4;

    [[nodiscard]] std::size_t parameter_count() const { return 3 + 2 * harmonics * periods.size(); }

    void validate() const {
        if (periods.empty()) throw ContractError("harmonic spec needs at least one period");
        if (harmonics < 1) throw ContractError("harmonic spec needs K >= 1");
        for (std::size_t a = 0; a < periods.size(); ++a) {
            if (!(periods[a] > 0.0) || !std::isfinite(periods[a])) throw ContractError("periods must be positive");
            for (std::size_t b = a + 1; b < periods.size(); ++b)
                if (periods[a] == periods[b]) throw ContractError("periods must be distinct");
        }
    }
};

/// Fitted trend + seasonal model, parametrized in t = days since `t0`.
///
/// `sine(i-1, j)` and `cosine(i-1, j)` hold the coefficients of harmonic i of
/// period j.
struct HarmonicFit {
    HarmonicSpec spec;
    double beta0 = 0.0, beta1 = 0.0, beta2 = 0.0;
    Eigen::MatrixXd sine;    ///< K x n
    Eigen::MatrixXd cosine;  ///< K x n
    double sigma2 = 0.0;
    double rss = 0.0;
    std::size_t observations = 0;
    CalendarDate t0{};
    double t_first = 0.0;  ///< first fitted sample, days since t0
    double t_last = 0.0;   ///< last fitted sample, days since t0

    [[nodiscard]] double omega(std::size_t j) const { return 2.0 * std::numbers::pi / spec.periods[j]; }
    [[nodiscard]] CalendarDate last_date() const {
        return t0.plus_days(static_cast<std::int64_t>(std::llround(t_last)));
    }
    [[nodiscard]] double days_since_t0(const CalendarDate& d) const {
        return static_cast<double>(days_between(t0, d));
    }
};

enum class PhaseKind { PositionVelocity, VelocityAcceleration };

[[nodiscard]] inline std::string to_string(PhaseKind k) {
    return k == PhaseKind::PositionVelocity ? "position-velocity" : "velocity-acceleration";
}

struct PhasePoint {
    double t = 0.0;
    double u = 0.0;
    double v = 0.0;
};

struct PhaseTrajectory {
    int year = 0;
    PhaseKind kind = PhaseKind::VelocityAcceleration;
    std::vector<PhasePoint> points;
    double area = 0.0;
};

/// Absolute shoelace area of the polygon closed by joining last to first.
template <typename Points, typename GetU, typename GetV>
[[nodiscard]] double shoelace_area(const Points& pts, GetU u, GetV v) {
    const std::size_t n = std::size(pts);
    if (n < 3) return 0.0;
    // Shift to the first vertex: same area, less cancellation.
    const double u0 = u(pts[0]), v0 = v(pts[0]);
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % n];
        twice += (u(a) - u0) * (v(b) - v0) - (u(b) - u0) * (v(a) - v0);
    }
    return 0.5 * std::abs(twice);
}

[[nodiscard]] inline double shoelace_area(const std::vector<PhasePoint>& pts) {
    return shoelace_area(pts, [](const PhasePoint& p) { return p.u; }, [](const PhasePoint& p) { return p.v; });
}

[[nodiscard]] inline double eval_fit(const HarmonicFit& f, double t) {
    double x = f.beta0 + f.beta1 * t + f.beta2 * t * t;
    for (std::size_t j = 0; j < f.spec.periods.size(); ++j) {
        const double w = f.omega(j);
        for (std::size_t i = 1; i <= f.spec.harmonics; ++i) {
            const double arg = static_cast<double>(i) * w * t;
            x += f.sine(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) * std::sin(arg) +
                 f.cosine(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) * std::cos(arg);
        }
    }
    return x;
}

/// dx/dt; each harmonic term carries its own factor i * omega_j.
[[nodiscard]] inline double velocity(const HarmonicFit& f, double t) {
    double x = f.beta1 + 2.0 * f.beta2 * t;
    for (std::size_t j = 0; j < f.spec.periods.size(); ++j) {
        const double w = f.omega(j);
        for (std::size_t i = 1; i <= f.spec.harmonics; ++i) {
            const double iw = static_cast<double>(i) * w;
            const double arg = iw * t;
            x += iw * (f.sine(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) * std::cos(arg) -
                       f.cosine(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) * std::sin(arg));
        }
    }
    return x;
}

/// d2x/dt2; each harmonic term carries (i * omega_j)^2.
[[nodiscard]] inline double acceleration(const HarmonicFit& f, double t) {
    double x = 2.0 * f.beta2;
    for (std::size_t j = 0; j < f.spec.periods.size(); ++j) {
        const double w = f.omega(j);
        for (std::size_t i = 1; i <= f.spec.harmonics; ++i) {
            const double iw = static_cast<double>(i) * w;
            const double arg = iw * t;
            x -= iw * iw *
                 (f.sine(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) * std::sin(arg) +
                  f.cosine(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) * std::cos(arg));
        }
    }
    return x;
}

/// Least-squares fit of the quadratic-trend + multi-period harmonic model.
///
/// t0 is the first observed date. The trend columns are built on
/// s = (t - centre) / half_range and mapped back to powers of t afterwards.
[[nodiscard]] inline HarmonicFit fit_harmonic(const DailySeries& series, const HarmonicSpec& spec) {
    spec.validate();
    const std::size_t nobs = series.observed_count();
    const std::size_t p = spec.parameter_count();
    if (nobs <= p) {
        throw InsufficientDataError("harmonic fit needs more than " + std::to_string(p) + " observations, got " +
                                    std::to_string(nobs));
    }
    std::size_t first_obs = 0;
    while (!series.is_observed(first_obs)) ++first_obs;

    HarmonicFit fit;
    fit.spec = spec;
    fit.t0 = series.date_at(first_obs);

    std::vector<double> ts;
    Eigen::VectorXd y(static_cast<Eigen::Index>(nobs));
    ts.reserve(nobs);
    for (std::size_t i = first_obs; i < series.size(); ++i) {
        if (!series.is_observed(i)) continue;
        y(static_cast<Eigen::Index>(ts.size())) = series.value(i);
        ts.push_back(static_cast<double>(i - first_obs));
    }
    fit.t_first = ts.front();
    fit.t_last = ts.back();
    const double centre = 0.5 * (fit.t_first + fit.t_last);
    const double half = std::max(1.0, 0.5 * (fit.t_last - fit.t_first));

    const std::size_t nper = spec.periods.size();
    const std::size_t K = spec.harmonics;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(nobs), static_cast<Eigen::Index>(p));
    std::vector<std::string> labels{"1", "s", "s^2"};
    for (std::size_t j = 0; j < nper; ++j) {
        for (std::size_t i = 1; i <= K; ++i) {
            labels.push_back("sin(" + std::to_string(i) + "w" + std::to_string(j + 1) + "t)");
            labels.push_back("cos(" + std::to_string(i) + "w" + std::to_string(j + 1) + "t)");
        }
    }
    for (std::size_t r = 0; r < nobs; ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        const double t = ts[r];
        const double s = (t - centre) / half;
        X(row, 0) = 1.0;
        X(row, 1) = s;
        X(row, 2) = s * s;
        Eigen::Index c = 3;
        for (std::size_t j = 0; j < nper; ++j) {
            const double w = fit.omega(j);
            for (std::size_t i = 1; i <= K; ++i) {
                const double arg = static_cast<double>(i) * w * t;
                X(row, c++) = std::sin(arg);
                X(row, c++) = std::cos(arg);
            }
        }
    }

    const auto ols = regress::ols(regress::DesignMatrix(std::move(X), std::move(labels)), y);
    const auto& b = ols.coefficients;
    // a0 + a1 (t - c)/h + a2 (t - c)^2/h^2 expanded in powers of t.
    const double a0 = b(0), a1 = b(1) / half, a2 = b(2) / (half * half);
    fit.beta2 = a2;
    fit.beta1 = a1 - 2.0 * a2 * centre;
    fit.beta0 = a0 - a1 * centre + a2 * centre * centre;
    fit.sine.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(nper));
    fit.cosine.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(nper));
    Eigen::Index c = 3;
    for (std::size_t j = 0; j < nper; ++j) {
        for (std::size_t i = 0; i < K; ++i) {
            fit.sine(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b(c++);
            fit.cosine(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b(c++);
        }
    }
    fit.sigma2 = ols.sigma2;
    fit.rss = ols.rss;
    fit.observations = nobs;
    return fit;
}

/// Daily samples of the fitted model over the part of `year` inside the fitted domain.
[[nodiscard]] inline PhaseTrajectory phase_trajectory(const HarmonicFit& f, int year, PhaseKind kind) {
    const CalendarDate jan1{year, 1, 1};
    const CalendarDate dec31{year, 12, 31};
    const double lo = std::max(f.days_since_t0(jan1), std::ceil(f.t_first));
    const double hi = std::min(f.days_since_t0(dec31), std::floor(f.t_last));
    if (lo > hi) throw RangeError("phase_trajectory: year " + std::to_string(year) + " is outside the fitted range");
    PhaseTrajectory tr;
    tr.year = year;
    tr.kind = kind;
    for (double t = lo; t <= hi; t += 1.0) {
        if (kind == PhaseKind::PositionVelocity) {
            tr.points.push_back({t, eval_fit(f, t), velocity(f, t)});
        } else {
            tr.points.push_back({t, velocity(f, t), acceleration(f, t)});
        }
    }
    tr.area = shoelace_area(tr.points);
    return tr;
}

/// Daily velocity and acceleration of the fitted model over [from, to].
[[nodiscard]] inline std::pair<DailySeries, DailySeries> derivative_series(const HarmonicFit& f,
                                                                           const CalendarDate& from,
                                                                           const CalendarDate& to) {
    if (from > to) throw RangeError("derivative_series: empty range");
    const double lo = f.days_since_t0(from);
    const double hi = f.days_since_t0(to);
    if (lo < f.t_first || hi > f.t_last) {
        throw RangeError("derivative_series: [" + from.iso() + ", " + to.iso() + "] leaves the fitted domain [" +
                         f.t0.iso() + ", " + f.last_date().iso() + "]");
    }
    const auto len = static_cast<std::size_t>(hi - lo) + 1;
    std::vector<double> vel(len), acc(len);
    for (std::size_t i = 0; i < len; ++i) {
        const double t = lo + static_cast<double>(i);
        vel[i] = velocity(f, t);
        acc[i] = acceleration(f, t);
    }
    return {DailySeries::observed(from, std::move(vel), "million sq km / day"),
            DailySeries::observed(from, std::move(acc), "million sq km / day^2")};
}

/// Central-difference velocity and acceleration of the raw series; a day is
/// observed only when it and both neighbours are.
[[nodiscard]] inline std::pair<DailySeries, DailySeries> difference_series(const DailySeries& s) {
    const std::size_t n = s.size();
    std::vector<double> vel(n, 0.0), acc(n, 0.0);
    std::vector<bool> mask(n, false);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(s.is_observed(i - 1) && s.is_observed(i) && s.is_observed(i + 1))) continue;
        vel[i] = 0.5 * (s.value(i + 1) - s.value(i - 1));
        acc[i] = s.value(i + 1) - 2.0 * s.value(i) + s.value(i - 1);
        mask[i] = true;
    }
    return {DailySeries(s.start(), std::move(vel), mask, "million sq km / day"),
            DailySeries(s.start(), std::move(acc), mask, "million sq km / day^2")};
}

/// CSV `year,t,u,v` followed by a single `area,<value>` line.
[[nodiscard]] inline std::string trajectory_csv(const PhaseTrajectory& tr) {
    std::ostringstream os;
    os.precision(17);
    os << "year,t,u,v\n";
    for (const auto& p : tr.points) os << tr.year << ',' << p.t << ',' << p.u << ',' << p.v << '\n';
    os << "area," << tr.area << '\n';
    return os.str();
}

}  // namespace seaice::harmonic
