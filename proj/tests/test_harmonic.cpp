#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "seaice/harmonic.hpp"

using namespace seaice;
using namespace seaice::harmonic;

namespace {

constexpr double kYear = 365.25;
const double kOmega = 2.0 * std::numbers::pi / kYear;

HarmonicFit manual_fit(double b0, double b1, double b2, std::vector<double> sine, std::vector<double> cosine,
                       double days = 3650.0) {
    HarmonicFit f;
    f.spec.harmonics = sine.size();
    f.beta0 = b0;
    f.beta1 = b1;
    f.beta2 = b2;
    f.sine = Eigen::Map<Eigen::VectorXd>(sine.data(), static_cast<Eigen::Index>(sine.size()));
    f.cosine = Eigen::Map<Eigen::VectorXd>(cosine.data(), static_cast<Eigen::Index>(cosine.size()));
    f.t0 = {2000, 1, 1};
    f.t_first = 0.0;
    f.t_last = days;
    return f;
}

DailySeries sample(const HarmonicFit& f, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = eval_fit(f, static_cast<double>(i));
    return DailySeries::observed(f.t0, v);
}

double naive_eval(const HarmonicFit& f, double t) {
    double x = f.beta0 + f.beta1 * t + f.beta2 * t * t;
    for (Eigen::Index i = 0; i < f.sine.rows(); ++i) {
        x += f.sine(i, 0) * std::sin((i + 1) * kOmega * t);
        x += f.cosine(i, 0) * std::cos((i + 1) * kOmega * t);
    }
    return x;
}

}  // namespace

TEST(FitHarmonic, RecoversExactSinusoidPlusTrend) {
    const std::size_t n = 3653;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        v[i] = 5.0 + 0.001 * t + 2.0 * std::sin(kOmega * t);
    }
    const auto f = fit_harmonic(DailySeries::observed({1990, 1, 1}, v), HarmonicSpec{});
    EXPECT_NEAR(f.beta0, 5.0, 1e-6);
    EXPECT_NEAR(f.beta1, 0.001, 1e-6);
    EXPECT_NEAR(f.beta2, 0.0, 1e-6);
    EXPECT_NEAR(f.sine(0, 0), 2.0, 1e-6);
    for (Eigen::Index i = 0; i < 4; ++i) {
        if (i > 0) {
            EXPECT_NEAR(f.sine(i, 0), 0.0, 1e-6);
        }
        EXPECT_NEAR(f.cosine(i, 0), 0.0, 1e-6);
    }
    EXPECT_LT(f.rss, 1e-10 * static_cast<double>(n));
}

TEST(FitHarmonic, TooManyParameters) {
    HarmonicSpec spec;
    spec.harmonics = 50;
    EXPECT_THROW((void)fit_harmonic(DailySeries::observed({2000, 1, 1}, std::vector<double>(100, 1.0)), spec),
                 InsufficientDataError);
}

TEST(FitHarmonic, TimeOriginIsFirstObservedDay) {
    std::vector<double> v(800, 0.0);
    std::vector<bool> m(800, true);
    m[0] = m[1] = false;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(kOmega * (static_cast<double>(i) - 2.0));
    const auto f = fit_harmonic(DailySeries({2000, 1, 1}, v, m), HarmonicSpec{});
    EXPECT_EQ(f.t0, (CalendarDate{2000, 1, 3}));
    EXPECT_NEAR(f.cosine(0, 0), 1.0, 1e-8);
}

TEST(FitHarmonic, RefitOnFittedValuesIsIdempotent) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    const std::size_t n = 2000;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        v[i] = 12 - 4 * std::cos(kOmega * t) + 1.5 * std::sin(2 * kOmega * t) + 0.3 * z(rng);
    }
    const auto f1 = fit_harmonic(DailySeries::observed({1985, 1, 1}, v), HarmonicSpec{});
    const auto f2 = fit_harmonic(sample(f1, n), HarmonicSpec{});
    EXPECT_NEAR(f2.beta0, f1.beta0, 1e-8);
    EXPECT_NEAR(f2.beta1, f1.beta1, 1e-8);
    EXPECT_NEAR(f2.beta2, f1.beta2, 1e-8);
    EXPECT_LT((f2.sine - f1.sine).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((f2.cosine - f1.cosine).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FitHarmonic, TwoPeriods) {
    const std::size_t n = 4000;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        v[i] = 3 + std::sin(kOmega * t) + 0.5 * std::cos(2 * std::numbers::pi * t / 182.0);
    }
    HarmonicSpec spec;
    spec.periods = {kYear, 182.0};
    spec.harmonics = 2;
    const auto f = fit_harmonic(DailySeries::observed({2000, 1, 1}, v), spec);
    EXPECT_NEAR(f.sine(0, 0), 1.0, 1e-7);
    EXPECT_NEAR(f.cosine(0, 1), 0.5, 1e-7);
    spec.periods = {kYear, kYear};
    EXPECT_THROW(spec.validate(), ContractError);
}

TEST(EvalFit, TrendOnlyAndCosineOnly) {
    const auto trend = manual_fit(1.0, 0.5, 0.25, {0, 0}, {0, 0});
    EXPECT_DOUBLE_EQ(eval_fit(trend, 2.0), 1.0 + 1.0 + 1.0);
    const auto cos_only = manual_fit(2.0, 0.0, 0.0, {0, 0, 0}, {1.0, -0.5, 0.25});
    EXPECT_NEAR(eval_fit(cos_only, 0.0), 2.0 + 0.75, 1e-15);
}

TEST(EvalFit, MatchesNaiveSummation) {
    const auto f = manual_fit(10.0, -1e-4, 3e-9, {1.2, -0.4, 0.1, 0.02}, {-4.0, 0.8, -0.3, 0.05});
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 15000.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = u(rng);
        EXPECT_NEAR(eval_fit(f, t), naive_eval(f, t), 1e-12 * std::max(1.0, std::abs(naive_eval(f, t))));
    }
}

TEST(Derivatives, TrendTerms) {
    const auto f = manual_fit(1.0, 0.3, 0.02, {0}, {0});
    EXPECT_DOUBLE_EQ(velocity(f, 10.0), 0.3 + 2 * 0.02 * 10.0);
    EXPECT_DOUBLE_EQ(acceleration(f, 10.0), 0.04);
}

TEST(Derivatives, SineVelocityAtOrigin) {
    const auto f = manual_fit(0.0, 0.0, 0.0, {1.0}, {0.0});
    EXPECT_NEAR(velocity(f, 0.0), kOmega, 1e-15);
    EXPECT_NEAR(acceleration(f, kYear / 4), -kOmega * kOmega, 1e-15);
}

TEST(Derivatives, AgreeWithCentralDifferences) {
    const auto f = manual_fit(11.0, -1e-4, 2e-9, {1.8, -0.3, 0.12, 0.05}, {-4.2, 0.9, -0.2, 0.03}, 15000.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1.0, 14999.0);
    const double h = 1e-3;
    for (int i = 0; i < 100; ++i) {
        const double t = u(rng);
        const double fd_v = (eval_fit(f, t + h) - eval_fit(f, t - h)) / (2 * h);
        const double fd_a = (velocity(f, t + h) - velocity(f, t - h)) / (2 * h);
        EXPECT_LT(std::abs(velocity(f, t) - fd_v), 1e-6 * std::abs(velocity(f, t))) << t;
        EXPECT_LT(std::abs(acceleration(f, t) - fd_a), 1e-6 * std::abs(acceleration(f, t))) << t;
    }
}

TEST(Shoelace, CircleArea) {
    std::vector<PhasePoint> pts;
    const double r = 3.0;
    for (int i = 0; i < 365; ++i) {
        const double a = 2 * std::numbers::pi * i / 365.0;
        pts.push_back({0.0, r * std::cos(a), r * std::sin(a)});
    }
    EXPECT_NEAR(shoelace_area(pts), std::numbers::pi * r * r, 1e-3 * std::numbers::pi * r * r);
}

TEST(Shoelace, EllipseOfUnitFrequencySinusoid) {
    // x = A sin(w t), x' = A w cos(w t) with A = 2, w = 1 encloses pi A^2 w = 4 pi.
    std::vector<PhasePoint> pts;
    for (int i = 0; i < 10000; ++i) {
        const double t = 2 * std::numbers::pi * i / 10000.0;
        pts.push_back({t, 2 * std::sin(t), 2 * std::cos(t)});
    }
    EXPECT_NEAR(shoelace_area(pts), 4 * std::numbers::pi, 1e-6);
}

TEST(PhaseTrajectory, DailySampledEllipse) {
    const double A = 3.0;
    const auto f = manual_fit(0.0, 0.0, 0.0, {A}, {0.0}, 3000.0);
    const auto tr = phase_trajectory(f, 2001, PhaseKind::PositionVelocity);
    EXPECT_EQ(tr.points.size(), 365u);
    const double expected = std::numbers::pi * A * A * kOmega;
    EXPECT_NEAR(tr.area, expected, 1e-3 * expected);
}

TEST(PhaseTrajectory, TrendOnlyCollapses) {
    const auto f = manual_fit(5.0, 0.01, 0.0, {0.0}, {0.0}, 3000.0);
    EXPECT_LT(phase_trajectory(f, 2002, PhaseKind::PositionVelocity).area, 1e-9);
    EXPECT_LT(phase_trajectory(f, 2002, PhaseKind::VelocityAcceleration).area, 1e-12);
}

TEST(PhaseTrajectory, PartialYearAndOutOfRange) {
    const auto f = manual_fit(0.0, 0.0, 0.0, {1.0}, {0.0}, 400.0);
    EXPECT_EQ(phase_trajectory(f, 2001, PhaseKind::VelocityAcceleration).points.size(), 400u - 366u + 1u);
    EXPECT_THROW((void)phase_trajectory(f, 2005, PhaseKind::VelocityAcceleration), RangeError);
}

TEST(PhaseTrajectory, CsvFormat) {
    const auto f = manual_fit(0.0, 0.0, 0.0, {1.0}, {0.0}, 400.0);
    const auto csv = trajectory_csv(phase_trajectory(f, 2000, PhaseKind::PositionVelocity));
    EXPECT_EQ(csv.rfind("year,t,u,v\n", 0), 0u);
    const auto last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
    EXPECT_EQ(last.rfind("area,", 0), 0u);
}

TEST(DerivativeSeries, MatchesPointwiseAndRejectsOutsideDomain) {
    const auto f = manual_fit(1.0, 0.0, 0.0, {2.0}, {1.0}, 1000.0);
    const auto [v, a] = derivative_series(f, {2000, 2, 1}, {2000, 3, 1});
    EXPECT_EQ(v.size(), 30u);
    EXPECT_DOUBLE_EQ(v.value(0), velocity(f, 31.0));
    EXPECT_DOUBLE_EQ(a.value(29), acceleration(f, 60.0));
    EXPECT_THROW((void)derivative_series(f, {1999, 12, 31}, {2000, 1, 5}), RangeError);
    EXPECT_THROW((void)derivative_series(f, {2002, 1, 1}, {2003, 1, 1}), RangeError);
}

TEST(DifferenceSeries, CentralDifferencesWithMaskPropagation) {
    const DailySeries s({2000, 1, 1}, {1, 4, 9, 16, 0, 36}, {true, true, true, true, false, true});
    const auto [v, a] = difference_series(s);
    EXPECT_FALSE(v.is_observed(0));
    EXPECT_DOUBLE_EQ(v.value(1), 4.0);
    EXPECT_DOUBLE_EQ(a.value(2), 2.0);
    EXPECT_FALSE(v.is_observed(3));
    EXPECT_FALSE(a.is_observed(5));
}
