#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seaice/calendar.hpp"
#include "seaice/causality.hpp"
#include "seaice/errors.hpp"
#include "seaice/regress.hpp"

namespace seaice::causality {

struct DlmOptions {
    double prior_variance = 1e6;     ///< C0 = prior_variance * I, m0 = 0
    double prior_obs_variance = 1.0;  ///< S0
};

struct DlmTrace {
    std::vector<CalendarDate> times;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> coefficient_paths;  ///< [regressor][step]
    std::vector<std::vector<double>> state_variances;    ///< [regressor][step]
    std::vector<double> observation_variance;            ///< S_t per step
    double discount = 0.98;
};

/// Time-varying regression y_t = x_t' theta_t + v_t filtered forward with a
/// discount-factor random walk on theta (R_t = C_{t-1} / discount) and an
/// observation variance learned online from one-step forecast errors.
[[nodiscard]] inline DlmTrace dlm_filter(const regress::DesignMatrix& design, const Eigen::VectorXd& y,
                                         std::vector<CalendarDate> times, double discount,
                                         const DlmOptions& opt = {}) {
    if (!(discount > 0.8 && discount < 1.0)) throw ContractError("dlm_filter: discount must lie in (0.8, 1)");
    const auto& X = design.matrix();
    const Eigen::Index T = X.rows(), p = X.cols();
    if (y.size() != T || static_cast<Eigen::Index>(times.size()) != T) {
        throw ContractError("dlm_filter: response, times and design rows must have equal length");
    }

    DlmTrace tr;
    tr.discount = discount;
    tr.times = std::move(times);
    tr.labels = design.labels();
    tr.coefficient_paths.assign(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(T)));
    tr.state_variances.assign(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(T)));
    tr.observation_variance.resize(static_cast<std::size_t>(T));

    Eigen::VectorXd m = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd C = opt.prior_variance * Eigen::MatrixXd::Identity(p, p);
    double S = opt.prior_obs_variance;
    double dof = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        const Eigen::VectorXd x = X.row(t).transpose();
        const Eigen::MatrixXd R = C / discount;
        const Eigen::VectorXd Rx = R * x;
        const double Q = x.dot(Rx) + S;
        if (!(Q > 0.0) || !std::isfinite(Q)) {
            throw FilterError(static_cast<std::size_t>(t), "non-positive forecast variance");
        }
        const double e = y(t) - x.dot(m);
        const Eigen::VectorXd A = Rx / Q;
        dof += 1.0;
        const double S_next = S + (S / dof) * (e * e / Q - 1.0);
        if (!(S_next > 0.0) || !std::isfinite(S_next)) {
            throw FilterError(static_cast<std::size_t>(t), "observation variance estimate broke down");
        }
        m += A * e;
        C = (S_next / S) * (R - A * A.transpose() * Q);
        C = 0.5 * (C + C.transpose());
        S = S_next;
        for (Eigen::Index j = 0; j < p; ++j) {
            tr.coefficient_paths[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)] = m(j);
            tr.state_variances[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)] = std::max(0.0, C(j, j));
        }
        tr.observation_variance[static_cast<std::size_t>(t)] = S;
    }
    return tr;
}

/// Filters the lag design's intercept, own lags and cross lags.
[[nodiscard]] inline DlmTrace dlm_filter(const LagDesign& d, double discount, const DlmOptions& opt = {}) {
    const Eigen::Index m = static_cast<Eigen::Index>(d.m());
    Eigen::MatrixXd X(m, 1 + d.own_lags.cols() + d.cross_lags.cols());
    X.col(0).setOnes();
    X.middleCols(1, d.own_lags.cols()) = d.own_lags;
    X.rightCols(d.cross_lags.cols()) = d.cross_lags;
    std::vector<std::string> labels{"(intercept)"};
    labels.insert(labels.end(), d.own_labels.begin(), d.own_labels.end());
    labels.insert(labels.end(), d.cross_labels.begin(), d.cross_labels.end());
    std::vector<CalendarDate> times;
    for (std::size_t i = 0; i < d.m(); ++i) times.push_back(d.row_date(i));
    return dlm_filter(regress::DesignMatrix(std::move(X), std::move(labels)), d.response, std::move(times), discount,
                      opt);
}

}  // namespace seaice::causality
