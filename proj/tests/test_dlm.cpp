#include <gtest/gtest.h>

#include <random>

#include "seaice/dlm.hpp"
#include "support/simulate.hpp"

using namespace seaice;
using namespace seaice::causality;

namespace {

struct Sim {
    regress::DesignMatrix X;
    Eigen::VectorXd y;
    std::vector<CalendarDate> times;
};

/// y_t = b0 + b1(t) x_t + noise with x_t ~ N(0, 1).
Sim simulate(std::size_t n, std::uint64_t seed, const std::function<double(std::size_t)>& slope, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    std::vector<CalendarDate> times;
    for (std::size_t t = 0; t < n; ++t) {
        const auto i = static_cast<Eigen::Index>(t);
        X(i, 0) = 1.0;
        X(i, 1) = z(rng);
        y(i) = 0.5 + slope(t) * X(i, 1) + sd * z(rng);
        times.push_back(CalendarDate{2000, 1, 1}.plus_days(static_cast<std::int64_t>(t)));
    }
    return {regress::DesignMatrix(X, {"1", "x"}), y, times};
}

}  // namespace

TEST(Dlm, ConstantTruthConvergesToOls) {
    const std::size_t n = 4000;
    const auto s = simulate(n, 1, [](std::size_t) { return 0.7; });
    const auto tr = dlm_filter(s.X, s.y, s.times, 0.9999);
    const auto ref = regress::ols(s.X, s.y);
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t t = 3 * n / 4; t < n; ++t) {
            EXPECT_NEAR(tr.coefficient_paths[j][t], ref.coefficients(static_cast<Eigen::Index>(j)),
                        0.05 * std::abs(ref.coefficients(static_cast<Eigen::Index>(j))))
                << j << " " << t;
        }
    }
}

TEST(Dlm, TracksAMidSampleJump) {
    const std::size_t n = 2000, jump = 1000;
    const auto s = simulate(n, 2, [&](std::size_t t) { return t < jump ? 0.2 : 0.8; }, 0.5);
    const auto tr = dlm_filter(s.X, s.y, s.times, 0.98);
    std::size_t crossed = n;
    for (std::size_t t = jump; t < n; ++t) {
        if (tr.coefficient_paths[1][t] > 0.5) {
            crossed = t;
            break;
        }
    }
    EXPECT_LT(crossed - jump, 200u);
}

TEST(Dlm, ExactlyIdentifiedSingleRegressor) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    const std::size_t n = 50;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    std::vector<CalendarDate> times;
    for (std::size_t t = 0; t < n; ++t) {
        X(static_cast<Eigen::Index>(t), 0) = u(rng);
        y(static_cast<Eigen::Index>(t)) = 1.7 * X(static_cast<Eigen::Index>(t), 0);
        times.push_back(CalendarDate{2000, 1, 1}.plus_days(static_cast<std::int64_t>(t)));
    }
    const auto tr = dlm_filter(regress::DesignMatrix(X, {"x"}), y, times, 0.95);
    for (std::size_t t = 0; t < n; ++t) EXPECT_NEAR(tr.coefficient_paths[0][t], 1.7, 1e-5) << t;
}

TEST(Dlm, ErrorShrinksWithSampleSize) {
    const std::vector<std::size_t> sizes{250, 1000, 4000};
    std::vector<double> mse;
    for (auto n : sizes) {
        double acc = 0.0;
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const auto s = simulate(n, 100 + seed, [](std::size_t) { return 0.7; });
            const double e = dlm_filter(s.X, s.y, s.times, 0.9999).coefficient_paths[1].back() - 0.7;
            acc += e * e / 30.0;
        }
        mse.push_back(acc);
    }
    EXPECT_GT(mse[0], mse[1]);
    EXPECT_GT(mse[1], mse[2]);
}

TEST(Dlm, DiscountOutsideRangeIsRejected) {
    const auto s = simulate(20, 4, [](std::size_t) { return 1.0; });
    EXPECT_THROW((void)dlm_filter(s.X, s.y, s.times, 1.0), ContractError);
    EXPECT_THROW((void)dlm_filter(s.X, s.y, s.times, 0.8), ContractError);
}

TEST(Dlm, BreakdownReportsTheStep) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Ones(5);
    std::vector<CalendarDate> times(5);
    DlmOptions opt;
    opt.prior_obs_variance = -10.0;  // forces a negative forecast variance
    opt.prior_variance = 1.0;
    try {
        (void)dlm_filter(regress::DesignMatrix(X, {"x"}), y, times, 0.95, opt);
        FAIL() << "expected FilterError";
    } catch (const FilterError& e) {
        EXPECT_EQ(e.step(), 0u);
    }
}

TEST(Dlm, LagDesignOverload) {
    const auto y = seaice::testing::daily(seaice::testing::ar1(300, 0.5, 5));
    const NamedSeries ys{"Y", y};
    const auto d = build_lag_design(ys, ys, {}, 2);
    const auto tr = dlm_filter(d, 0.98);
    EXPECT_EQ(tr.labels, (std::vector<std::string>{"(intercept)", "Y(t-1)", "Y(t-2)"}));
    EXPECT_EQ(tr.times.size(), d.m());
    EXPECT_EQ(tr.times.front(), d.row_date(0));
}
