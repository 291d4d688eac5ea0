#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seaice/errors.hpp"
#include "seaice/regress.hpp"

namespace seaice::regress {

struct LassoOptions {
    double tolerance = 1e-8;       ///< max |coefficient change| per sweep, standardized scale
    std::size_t max_sweeps = 10000;
    bool record_objective = false;  ///< fill LassoFit::objective_trace after every sweep
};

struct LassoFit {
    Eigen::VectorXd coefficients;  ///< original scale, one per design column
    double intercept = 0.0;
    double lambda = 0.0;
    std::vector<std::size_t> active_set;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
};

struct LassoCvResult {
    double lambda = 0.0;
    LassoFit fit;
    std::vector<double> lambdas;
    std::vector<double> cv_error;  ///< pooled out-of-fold mean squared error per lambda
};

namespace detail {

/// Additive sufficient statistics of a row block. Columns are shifted by a
/// fixed reference (the full-sample means) before accumulation so that the
/// later centring does not suffer from cancellation.
struct Moments {
    double n = 0.0;
    Eigen::VectorXd sum_x;
    Eigen::MatrixXd xtx;
    double sum_y = 0.0;
    Eigen::VectorXd xty;
    double yty = 0.0;

    Moments& operator-=(const Moments& o) {
        n -= o.n;
        sum_x -= o.sum_x;
        xtx -= o.xtx;
        sum_y -= o.sum_y;
        xty -= o.xty;
        yty -= o.yty;
        return *this;
    }
};

struct Shift {
    Eigen::RowVectorXd x;
    double y = 0.0;
};

inline Shift reference_shift(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return {X.colwise().mean(), y.mean()};
}

inline Moments block_moments(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Shift& shift,
                             Eigen::Index first, Eigen::Index count) {
    const Eigen::MatrixXd xs = X.middleRows(first, count).rowwise() - shift.x;
    const Eigen::VectorXd ys = y.segment(first, count).array() - shift.y;
    Moments m;
    m.n = static_cast<double>(count);
    m.sum_x = xs.colwise().sum().transpose();
    m.xtx = Eigen::MatrixXd(xs.cols(), xs.cols());
    m.xtx.setZero();
    m.xtx.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose());
    m.xtx = m.xtx.selfadjointView<Eigen::Lower>();
    m.sum_y = ys.sum();
    m.xty = xs.transpose() * ys;
    m.yty = ys.squaredNorm();
    return m;
}

/// Standardized problem: columns centred and scaled to unit (divide-by-n) variance.
struct Standardized {
    Eigen::VectorXd mean_x;  ///< in shifted coordinates
    Eigen::VectorXd sd;
    double mean_y = 0.0;     ///< in shifted coordinates
    Eigen::MatrixXd gram;    ///< X~'X~ / n
    Eigen::VectorXd corr;    ///< X~'y~ / n
    double var_y = 0.0;
    std::vector<bool> usable;  ///< false for constant columns
};

inline Standardized standardize(const Moments& m) {
    const Eigen::Index p = m.sum_x.size();
    Standardized s;
    s.mean_x = m.sum_x / m.n;
    s.mean_y = m.sum_y / m.n;
    Eigen::MatrixXd cov = m.xtx / m.n - s.mean_x * s.mean_x.transpose();
    s.sd.resize(p);
    s.usable.assign(static_cast<std::size_t>(p), true);
    const double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < p; ++j) {
        const double v = cov(j, j);
        if (!(v > 1e-24 * scale)) {
            s.usable[static_cast<std::size_t>(j)] = false;
            s.sd(j) = 1.0;
        } else {
            s.sd(j) = std::sqrt(v);
        }
    }
    const Eigen::VectorXd inv = s.sd.cwiseInverse();
    s.gram = inv.asDiagonal() * cov * inv.asDiagonal();
    s.corr = inv.asDiagonal() * (m.xty / m.n - s.mean_x * s.mean_y);
    s.var_y = std::max(0.0, m.yty / m.n - s.mean_y * s.mean_y);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!s.usable[static_cast<std::size_t>(j)]) {
            s.gram.row(j).setZero();
            s.gram.col(j).setZero();
            s.corr(j) = 0.0;
        }
    }
    return s;
}

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

inline double objective(const Standardized& s, const Eigen::VectorXd& beta, const Eigen::VectorXd& g,
                        double lambda) {
    return 0.5 * (s.var_y - 2.0 * s.corr.dot(beta) + beta.dot(g)) + lambda * beta.lpNorm<1>();
}

struct CdState {
    Eigen::VectorXd beta;  ///< standardized scale
    std::size_t sweeps = 0;
    bool converged = false;
    std::vector<double> trace;
};

/// Cyclic coordinate descent in covariance form; `g` tracks gram * beta.
inline CdState coordinate_descent(const Standardized& s, double lambda, Eigen::VectorXd beta,
                                  const LassoOptions& opt) {
    const Eigen::Index p = s.corr.size();
    Eigen::VectorXd g = s.gram * beta;
    CdState st;
    for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!s.usable[static_cast<std::size_t>(j)]) continue;
            const double gjj = s.gram(j, j);
            const double z = s.corr(j) - g(j) + gjj * beta(j);
            const double next = soft_threshold(z, lambda) / gjj;
            const double delta = next - beta(j);
            if (delta != 0.0) {
                g.noalias() += delta * s.gram.col(j);
                beta(j) = next;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        st.sweeps = sweep;
        if (opt.record_objective) st.trace.push_back(objective(s, beta, g, lambda));
        if (max_delta < opt.tolerance) {
            st.converged = true;
            break;
        }
    }
    st.beta = std::move(beta);
    return st;
}

inline LassoFit to_original_scale(const Standardized& s, const Shift& shift, CdState st, double lambda) {
    LassoFit fit;
    fit.lambda = lambda;
    fit.iterations = st.sweeps;
    fit.converged = st.converged;
    fit.objective_trace = std::move(st.trace);
    fit.coefficients = st.beta.cwiseQuotient(s.sd);
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
        if (fit.coefficients(j) != 0.0) fit.active_set.push_back(static_cast<std::size_t>(j));
    }
    // Intercept in unshifted coordinates.
    fit.intercept = (s.mean_y + shift.y) - (s.mean_x + shift.x.transpose()).dot(fit.coefficients);
    return fit;
}

inline void check_inputs(const DesignMatrix& X, const Eigen::VectorXd& y) {
    if (static_cast<std::size_t>(y.size()) != X.rows()) throw ContractError("lasso: response length mismatch");
    if (!y.allFinite()) throw ContractError("lasso: response contains non-finite entries");
    if (X.rows() < 2) throw InsufficientDataError("lasso needs at least two rows");
}

}  // namespace detail

/// Smallest penalty at which every coefficient is zero: max_j |x~_j' y~| / n.
[[nodiscard]] inline double lambda_max(const DesignMatrix& X, const Eigen::VectorXd& y) {
    detail::check_inputs(X, y);
    const auto shift = detail::reference_shift(X.matrix(), y);
    const auto s = detail::standardize(detail::block_moments(X.matrix(), y, shift, 0, X.matrix().rows()));
    return s.corr.cwiseAbs().maxCoeff();
}

/// `count` penalties spaced geometrically from lambda_max down to min_ratio * lambda_max.
[[nodiscard]] inline std::vector<double> lambda_grid(const DesignMatrix& X, const Eigen::VectorXd& y,
                                                     std::size_t count, double min_ratio) {
    if (count == 0) throw ContractError("lambda_grid: count must be positive");
    if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw ContractError("lambda_grid: min_ratio must lie in (0, 1)");
    const double top = lambda_max(X, y);
    std::vector<double> grid(count, top);
    for (std::size_t i = 1; i < count; ++i) {
        grid[i] = top * std::pow(min_ratio, static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return grid;
}

/// L1-penalized least squares, minimizing (1/2n)||y - b0 - X b||^2 + lambda ||b||_1
/// on internally standardized columns; the intercept is never penalized.
/// Coefficients come back on the original column scale.
[[nodiscard]] inline LassoFit lasso(const DesignMatrix& X, const Eigen::VectorXd& y, double lambda,
                                    const LassoOptions& opt = {}) {
    detail::check_inputs(X, y);
    if (!(lambda >= 0.0)) throw ContractError("lasso: lambda must be nonnegative");
    const auto& M = X.matrix();
    const auto shift = detail::reference_shift(M, y);
    const auto s = detail::standardize(detail::block_moments(M, y, shift, 0, M.rows()));
    auto st = detail::coordinate_descent(s, lambda, Eigen::VectorXd::Zero(M.cols()), opt);
    return detail::to_original_scale(s, shift, std::move(st), lambda);
}

namespace detail {

struct FoldMoments {
    Shift shift;
    std::vector<Eigen::Index> bounds;
    std::vector<Moments> folds;
    Moments total;
};

inline FoldMoments fold_moments(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, std::size_t folds) {
    const Eigen::Index n = M.rows();
    if (folds < 2) throw ContractError("lasso_path_cv: need at least 2 folds");
    if (static_cast<Eigen::Index>(folds) > n) throw InsufficientDataError("lasso_path_cv: more folds than rows");
    FoldMoments fm;
    fm.shift = reference_shift(M, y);
    fm.bounds.resize(folds + 1);
    const auto nf = static_cast<Eigen::Index>(folds);
    for (std::size_t f = 0; f <= folds; ++f) fm.bounds[f] = static_cast<Eigen::Index>(f) * n / nf;
    for (std::size_t f = 0; f < folds; ++f) {
        fm.folds.push_back(block_moments(M, y, fm.shift, fm.bounds[f], fm.bounds[f + 1] - fm.bounds[f]));
    }
    fm.total = fm.folds.front();
    for (std::size_t f = 1; f < folds; ++f) {
        const auto& o = fm.folds[f];
        fm.total.n += o.n;
        fm.total.sum_x += o.sum_x;
        fm.total.xtx += o.xtx;
        fm.total.sum_y += o.sum_y;
        fm.total.xty += o.xty;
        fm.total.yty += o.yty;
    }
    return fm;
}

inline LassoCvResult cross_validate(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, const FoldMoments& fm,
                                    const std::vector<double>& lambdas, const LassoOptions& opt) {
    if (lambdas.empty()) throw ContractError("lasso_path_cv: lambda grid is empty");
    if (!std::is_sorted(lambdas.rbegin(), lambdas.rend())) {
        throw ContractError("lasso_path_cv: lambdas must be sorted descending");
    }
    std::vector<double> sse(lambdas.size(), 0.0);
    for (std::size_t f = 0; f < fm.folds.size(); ++f) {
        Moments train = fm.total;
        train -= fm.folds[f];
        const auto s = standardize(train);
        const Eigen::Index first = fm.bounds[f], count = fm.bounds[f + 1] - fm.bounds[f];
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(M.cols());
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
            auto st = coordinate_descent(s, lambdas[l], beta, opt);
            beta = st.beta;
            const auto fit = to_original_scale(s, fm.shift, std::move(st), lambdas[l]);
            const Eigen::VectorXd pred = (M.middleRows(first, count) * fit.coefficients).array() + fit.intercept;
            sse[l] += (y.segment(first, count) - pred).squaredNorm();
        }
    }

    LassoCvResult out;
    out.lambdas = lambdas;
    out.cv_error.resize(lambdas.size());
    std::size_t best = 0;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        out.cv_error[l] = sse[l] / fm.total.n;
        if (out.cv_error[l] < out.cv_error[best]) best = l;
    }
    out.lambda = lambdas[best];
    const auto s = standardize(fm.total);
    auto st = coordinate_descent(s, out.lambda, Eigen::VectorXd::Zero(M.cols()), opt);
    out.fit = to_original_scale(s, fm.shift, std::move(st), out.lambda);
    return out;
}

inline std::vector<double> geometric_grid(double top, std::size_t count, double min_ratio) {
    if (count == 0) throw ContractError("lambda_grid: count must be positive");
    if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw ContractError("lambda_grid: min_ratio must lie in (0, 1)");
    std::vector<double> grid(count, top);
    for (std::size_t i = 1; i < count; ++i) {
        grid[i] = top * std::pow(min_ratio, static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return grid;
}

}  // namespace detail

/// K-fold cross-validation over a descending lambda grid with contiguous
/// (time-ordered) folds. Picks the lambda with the smallest pooled out-of-fold
/// squared error, the larger lambda on ties, and refits on all rows.
[[nodiscard]] inline LassoCvResult lasso_path_cv(const DesignMatrix& X, const Eigen::VectorXd& y,
                                                 std::size_t folds, const std::vector<double>& lambdas,
                                                 const LassoOptions& opt = {}) {
    detail::check_inputs(X, y);
    const auto fm = detail::fold_moments(X.matrix(), y, folds);
    return detail::cross_validate(X.matrix(), y, fm, lambdas, opt);
}

/// Same, on the grid lambda_grid(X, y, count, min_ratio) derived from the data.
[[nodiscard]] inline LassoCvResult lasso_path_cv(const DesignMatrix& X, const Eigen::VectorXd& y,
                                                 std::size_t folds, std::size_t count, double min_ratio,
                                                 const LassoOptions& opt = {}) {
    detail::check_inputs(X, y);
    const auto fm = detail::fold_moments(X.matrix(), y, folds);
    const double top = detail::standardize(fm.total).corr.cwiseAbs().maxCoeff();
    return detail::cross_validate(X.matrix(), y, fm, detail::geometric_grid(top, count, min_ratio), opt);
}

}  // namespace seaice::regress
