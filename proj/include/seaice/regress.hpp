#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "seaice/errors.hpp"

namespace seaice::regress {

/// Singular values below this fraction of the largest mark a rank-deficient design.
inline constexpr double kRankTolerance = 1e-10;

/// Dense regressor matrix with one label per column.
class DesignMatrix {
public:
    DesignMatrix(Eigen::MatrixXd x, std::vector<std::string> labels) : x_(std::move(x)), labels_(std::move(labels)) {
        if (x_.rows() < 1 || x_.cols() < 1) throw ContractError("design matrix needs n >= 1 and p >= 1");
        if (static_cast<Eigen::Index>(labels_.size()) != x_.cols()) {
            throw ContractError("design matrix has " + std::to_string(x_.cols()) + " columns but " +
                                std::to_string(labels_.size()) + " labels");
        }
        if (!x_.allFinite()) throw ContractError("design matrix contains non-finite entries");
    }

    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(x_.rows()); }
    [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(x_.cols()); }
    [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return x_; }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }

private:
    Eigen::MatrixXd x_;
    std::vector<std::string> labels_;
};

struct OlsFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    double sigma2 = 0.0;  ///< rss / (n - p)
    Eigen::VectorXd standard_errors;
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<std::string> labels;
};

struct FTestResult {
    double f_stat = 0.0;
    std::size_t df_num = 0;
    std::size_t df_den = 0;
    double p_value = 1.0;
};

/// Least squares through a column-pivoted Householder QR.
///
/// Rank is judged from the singular values of R (identical to those of X).
/// Standard errors use diag((X'X)^-1) = row norms of R^-1, mapped back through
/// the pivot permutation.
[[nodiscard]] inline OlsFit ols(const DesignMatrix& design, const Eigen::VectorXd& y) {
    const auto& X = design.matrix();
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) throw ContractError("response length does not match design rows");
    if (!y.allFinite()) throw ContractError("response contains non-finite entries");
    if (n <= p) {
        throw InsufficientDataError("ols needs more observations (" + std::to_string(n) + ") than columns (" +
                                    std::to_string(p) + ")");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const auto& perm = qr.colsPermutation().indices();

    const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(R).singularValues();
    const double smax = sv.maxCoeff();
    if (!(smax > 0.0) || sv.minCoeff() < kRankTolerance * smax) {
        // With column pivoting the most dependent column is pivoted last.
        throw SingularDesignError(design.labels()[static_cast<std::size_t>(perm(p - 1))]);
    }

    OlsFit fit;
    fit.n = static_cast<std::size_t>(n);
    fit.p = static_cast<std::size_t>(p);
    fit.labels = design.labels();
    fit.coefficients = qr.solve(y);
    fit.fitted = X * fit.coefficients;
    fit.residuals = y - fit.fitted;
    fit.rss = fit.residuals.squaredNorm();
    fit.sigma2 = fit.rss / static_cast<double>(n - p);

    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    fit.standard_errors.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        fit.standard_errors(perm(i)) = std::sqrt(fit.sigma2 * Rinv.row(i).squaredNorm());
    }
    return fit;
}

/// Upper tail P(F > f) of the F(d1, d2) distribution.
[[nodiscard]] inline double f_upper_tail(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw ContractError("F distribution needs positive degrees of freedom");
    if (std::isnan(f)) throw ContractError("F statistic is NaN");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    const double x = d2 / (d2 + d1 * f);
    return std::clamp(boost::math::ibeta(0.5 * d2, 0.5 * d1, x), 0.0, 1.0);
}

/// Nested-model ANOVA F-test: null columns must be a subset of the full model's.
[[nodiscard]] inline FTestResult f_test_nested(const OlsFit& null_fit, const OlsFit& full_fit, std::size_t n) {
    if (full_fit.p <= null_fit.p) {
        throw ContractError("f_test_nested: full model must have more columns than the null model");
    }
    if (n <= full_fit.p) throw ContractError("f_test_nested: no residual degrees of freedom");
    FTestResult r;
    r.df_num = full_fit.p - null_fit.p;
    r.df_den = n - full_fit.p;
    const double gain = std::max(0.0, null_fit.rss - full_fit.rss);
    if (full_fit.rss <= 0.0) {
        r.f_stat = gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    } else {
        r.f_stat = (gain / static_cast<double>(r.df_num)) / (full_fit.rss / static_cast<double>(r.df_den));
    }
    r.p_value = f_upper_tail(r.f_stat, static_cast<double>(r.df_num), static_cast<double>(r.df_den));
    return r;
}

}  // namespace seaice::regress
