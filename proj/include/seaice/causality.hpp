#pragma once

// Pairwise Granger causality between SIE dynamics and the NAO index:
// lag designs, nested F-tests with optional LASSO lag selection, and a
// moving-block residual bootstrap of the post-selection F statistic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "seaice/calendar.hpp"
#include "seaice/errors.hpp"
#include "seaice/harmonic.hpp"
#include "seaice/ingest.hpp"
#include "seaice/lasso.hpp"
#include "seaice/regress.hpp"
#include "seaice/series.hpp"

namespace seaice::causality {

struct NamedSeries {
    std::string name;
    DailySeries series;
};

/// Response vector with its own lags and the lags of each cross series.
///
/// Row i is calendar day `rows[i]` of the (shared) source calendar; own lag j
/// is column j-1 of `own_lags`, and cross series c occupies columns
/// c*k .. c*k+k-1 of `cross_lags`.
struct LagDesign {
    std::size_t k = 0;
    Eigen::VectorXd response;
    Eigen::MatrixXd own_lags;
    Eigen::MatrixXd cross_lags;
    std::vector<std::string> own_labels;
    std::vector<std::string> cross_labels;
    std::vector<std::size_t> rows;

    NamedSeries response_source;
    NamedSeries own_source;
    std::vector<NamedSeries> cross_sources;
    bool own_is_response = false;

    [[nodiscard]] std::size_t m() const noexcept { return rows.size(); }
    [[nodiscard]] CalendarDate row_date(std::size_t i) const { return response_source.series.date_at(rows[i]); }
};

struct LassoSelection {
    std::size_t folds = 5;
    std::size_t grid_count = 20;
    double min_ratio = 1e-3;
    std::vector<double> lambdas;  ///< explicit grid; empty means derive from the data
};

struct BootstrapConfig {
    std::size_t reps = 199;
    std::size_t block_len = 30;
    std::uint64_t seed = 20191001;
    unsigned threads = 1;  ///< 0 = hardware concurrency
};

struct FitSummary {
    std::size_t n = 0;
    std::size_t p = 0;
    double rss = 0.0;
    double sigma2 = 0.0;
};

struct GrangerReport {
    int hypothesis = 0;
    std::size_t k = 0;
    std::size_t rows = 0;
    std::size_t cross_candidates = 0;
    std::vector<std::string> selected_lags;
    std::vector<std::string> aliased_lags;
    std::optional<double> lambda;
    bool f_defined = false;
    regress::FTestResult f;
    double bootstrap_p = 1.0;
    std::size_t bootstrap_reps = 0;
    std::size_t block_len = 0;
    std::uint64_t seed = 0;
    FitSummary null_fit;
    FitSummary alt_fit;
    std::vector<std::string> notes;
    // Alternative model's in-sample predictions next to the actual response.
    std::vector<CalendarDate> dates;
    std::vector<double> actual;
    std::vector<double> predicted;
};

inline constexpr std::size_t kMinBootstrapReps = 199;
/// Cross columns whose normalized residual after projecting out the kept
/// columns falls below this are dropped as aliased.
inline constexpr double kAliasTolerance = 1e-8;

[[nodiscard]] inline std::string lag_label(const std::string& name, std::size_t lag) {
    return name + "(t-" + std::to_string(lag) + ")";
}

/// Regresses `response` on `own` lags 1..k and on lags 1..k of every cross
/// series. Rows whose response or any lagged constituent is masked are dropped.
[[nodiscard]] inline LagDesign build_lag_design(const NamedSeries& response, const NamedSeries& own,
                                                const std::vector<NamedSeries>& cross, std::size_t k) {
    if (k < 1) throw ContractError("build_lag_design: k must be >= 1");
    const auto& ys = response.series;
    auto same_calendar = [&](const DailySeries& s) { return s.start() == ys.start() && s.size() == ys.size(); };
    if (!same_calendar(own.series)) throw ContractError("build_lag_design: own series is not aligned with the response");
    for (const auto& c : cross)
        if (!same_calendar(c.series)) throw ContractError("build_lag_design: cross series '" + c.name + "' is not aligned");

    LagDesign d;
    d.k = k;
    d.response_source = response;
    d.own_source = own;
    d.cross_sources = cross;
    d.own_is_response = response.series == own.series;
    for (std::size_t j = 1; j <= k; ++j) d.own_labels.push_back(lag_label(own.name, j));
    for (const auto& c : cross)
        for (std::size_t j = 1; j <= k; ++j) d.cross_labels.push_back(lag_label(c.name, j));

    for (std::size_t t = k; t < ys.size(); ++t) {
        if (!ys.is_observed(t)) continue;
        bool ok = true;
        for (std::size_t j = 1; j <= k && ok; ++j) {
            ok = own.series.is_observed(t - j);
            for (const auto& c : cross) ok = ok && c.series.is_observed(t - j);
        }
        if (ok) d.rows.push_back(t);
    }
    const std::size_t columns = 1 + k + k * cross.size();
    if (d.rows.size() <= columns) {
        throw InsufficientDataError("build_lag_design: " + std::to_string(d.rows.size()) + " complete rows for " +
                                    std::to_string(columns) + " columns");
    }

    const auto m = static_cast<Eigen::Index>(d.rows.size());
    const auto kk = static_cast<Eigen::Index>(k);
    d.response.resize(m);
    d.own_lags.resize(m, kk);
    d.cross_lags.resize(m, kk * static_cast<Eigen::Index>(cross.size()));
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t t = d.rows[static_cast<std::size_t>(i)];
        d.response(i) = ys.value(t);
        for (std::size_t j = 1; j <= k; ++j) {
            d.own_lags(i, static_cast<Eigen::Index>(j - 1)) = own.series.value(t - j);
            for (std::size_t c = 0; c < cross.size(); ++c) {
                d.cross_lags(i, static_cast<Eigen::Index>(c * k + j - 1)) = cross[c].series.value(t - j);
            }
        }
    }
    return d;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Intercept followed by own lags.
inline regress::DesignMatrix null_design(const LagDesign& d) {
    const Eigen::Index m = static_cast<Eigen::Index>(d.m());
    Eigen::MatrixXd X(m, d.own_lags.cols() + 1);
    X.col(0).setOnes();
    X.rightCols(d.own_lags.cols()) = d.own_lags;
    std::vector<std::string> labels{"(intercept)"};
    labels.insert(labels.end(), d.own_labels.begin(), d.own_labels.end());
    return regress::DesignMatrix(std::move(X), std::move(labels));
}

/// Greedily keeps the candidate cross columns that are not (numerically)
/// spanned by the null design and the cross columns kept before them.
inline std::vector<std::size_t> drop_aliased(const regress::DesignMatrix& null_x, const LagDesign& d,
                                             const std::vector<std::size_t>& candidates) {
    if (candidates.empty()) return {};
    const auto& N = null_x.matrix();
    const Eigen::Index m = N.rows(), r = N.cols();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(N);
    Eigen::MatrixXd C(m, static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto col = d.cross_lags.col(static_cast<Eigen::Index>(candidates[i]));
        const double norm = col.norm();
        C.col(static_cast<Eigen::Index>(i)) = norm > 0.0 ? Eigen::VectorXd(col / norm) : Eigen::VectorXd(col);
    }
    // Components orthogonal to the null columns live in rows r..m of Q' C.
    const Eigen::MatrixXd QtC = qr.householderQ().adjoint() * C;
    const Eigen::MatrixXd resid = QtC.bottomRows(m - r);
    std::vector<Eigen::VectorXd> basis;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        Eigen::VectorXd v = resid.col(static_cast<Eigen::Index>(i));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) v -= q.dot(v) * q;
        const double norm = v.norm();
        if (norm > kAliasTolerance) {
            basis.push_back(v / norm);
            kept.push_back(candidates[i]);
        }
    }
    return kept;
}

struct Statistic {
    bool defined = false;
    regress::FTestResult f;
    regress::OlsFit null_fit;
    regress::OlsFit alt_fit;
    std::vector<std::size_t> selected;  ///< cross columns entering the alternative
    std::vector<std::size_t> aliased;
    std::optional<double> lambda;
    std::vector<std::string> notes;
};

inline Statistic compute_statistic(const LagDesign& d, const std::optional<LassoSelection>& selection) {
    Statistic s;
    const auto null_x = null_design(d);
    s.null_fit = regress::ols(null_x, d.response);

    std::vector<std::size_t> candidates;
    const auto ncross = static_cast<std::size_t>(d.cross_lags.cols());
    if (selection) {
        const Eigen::Index m = static_cast<Eigen::Index>(d.m());
        Eigen::MatrixXd X(m, d.own_lags.cols() + d.cross_lags.cols());
        X << d.own_lags, d.cross_lags;
        std::vector<std::string> labels = d.own_labels;
        labels.insert(labels.end(), d.cross_labels.begin(), d.cross_labels.end());
        const regress::DesignMatrix full(std::move(X), std::move(labels));
        const auto cv = selection->lambdas.empty()
                            ? regress::lasso_path_cv(full, d.response, selection->folds, selection->grid_count,
                                                     selection->min_ratio)
                            : regress::lasso_path_cv(full, d.response, selection->folds, selection->lambdas);
        s.lambda = cv.lambda;
        if (!cv.fit.converged) s.notes.push_back("lasso did not converge at the chosen lambda");
        const auto own = static_cast<std::size_t>(d.own_lags.cols());
        for (auto j : cv.fit.active_set)
            if (j >= own) candidates.push_back(j - own);
        if (candidates.empty()) {
            s.notes.push_back("lasso selected no cross lags; p = 1");
            return s;
        }
    } else {
        for (std::size_t j = 0; j < ncross; ++j) candidates.push_back(j);
    }

    s.selected = drop_aliased(null_x, d, candidates);
    std::set_difference(candidates.begin(), candidates.end(), s.selected.begin(), s.selected.end(),
                        std::back_inserter(s.aliased));
    if (!s.aliased.empty()) {
        s.notes.push_back(std::to_string(s.aliased.size()) + " cross lag column(s) dropped as aliased");
    }
    if (s.selected.empty()) {
        s.notes.push_back("no informative cross columns; rss unchanged, p = 1");
        return s;
    }

    const auto& N = null_x.matrix();
    Eigen::MatrixXd A(N.rows(), N.cols() + static_cast<Eigen::Index>(s.selected.size()));
    A.leftCols(N.cols()) = N;
    std::vector<std::string> labels = null_x.labels();
    for (std::size_t i = 0; i < s.selected.size(); ++i) {
        A.col(N.cols() + static_cast<Eigen::Index>(i)) = d.cross_lags.col(static_cast<Eigen::Index>(s.selected[i]));
        labels.push_back(d.cross_labels[s.selected[i]]);
    }
    s.alt_fit = regress::ols(regress::DesignMatrix(std::move(A), std::move(labels)), d.response);
    s.f = regress::f_test_nested(s.null_fit, s.alt_fit, d.m());
    s.defined = true;
    return s;
}

/// Rebuilds the response (and own lags, when they are the response's lags)
/// from a replicate calendar series, keeping the row set fixed.
inline LagDesign with_response(const LagDesign& d, const std::vector<double>& y) {
    LagDesign r = d;
    for (std::size_t i = 0; i < d.m(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const std::size_t t = d.rows[i];
        r.response(row) = y[t];
        if (d.own_is_response)
            for (std::size_t j = 1; j <= d.k; ++j) r.own_lags(row, static_cast<Eigen::Index>(j - 1)) = y[t - j];
    }
    return r;
}

}  // namespace detail

/// Per-replicate seed; independent of evaluation order.
[[nodiscard]] inline std::uint64_t replicate_seed(std::uint64_t master, std::size_t rep) {
    return detail::splitmix64(master ^ detail::splitmix64(static_cast<std::uint64_t>(rep) + 1));
}

/// Moving-block resample: concatenates blocks of `block_len` consecutive
/// values starting at uniformly drawn offsets, truncated to the input length.
template <typename Rng>
[[nodiscard]] std::vector<double> moving_block_resample(const std::vector<double>& x, std::size_t block_len, Rng& rng) {
    if (x.empty()) return {};
    const std::size_t L = std::clamp<std::size_t>(block_len, 1, x.size());
    std::uniform_int_distribution<std::size_t> start(0, x.size() - L);
    std::vector<double> out;
    out.reserve(x.size());
    while (out.size() < x.size()) {
        const std::size_t s = start(rng);
        for (std::size_t i = 0; i < L && out.size() < x.size(); ++i) out.push_back(x[s + i]);
    }
    return out;
}

/// Granger F-test of the cross lags, with optional LASSO pre-selection and a
/// moving-block residual bootstrap of the whole selection + F pipeline.
///
/// Bootstrap responses are regenerated recursively from the null fit
/// (y* = b0 + sum b_j y*(t-j) + e*) when the own lags are the response's lags;
/// otherwise as null fitted values plus resampled residuals.
[[nodiscard]] inline GrangerReport granger_test(const LagDesign& d, const std::optional<LassoSelection>& selection,
                                                const BootstrapConfig& boot) {
    if (boot.reps < kMinBootstrapReps) {
        throw ContractError("granger_test: bootstrap needs at least " + std::to_string(kMinBootstrapReps) +
                            " replicates, got " + std::to_string(boot.reps));
    }
    if (boot.block_len < 1) throw ContractError("granger_test: block_len must be >= 1");

    const auto observed = detail::compute_statistic(d, selection);

    GrangerReport rep;
    rep.k = d.k;
    rep.rows = d.m();
    rep.cross_candidates = static_cast<std::size_t>(d.cross_lags.cols());
    rep.lambda = observed.lambda;
    rep.notes = observed.notes;
    rep.bootstrap_reps = boot.reps;
    rep.block_len = boot.block_len;
    rep.seed = boot.seed;
    for (auto j : observed.selected) rep.selected_lags.push_back(d.cross_labels[j]);
    for (auto j : observed.aliased) rep.aliased_lags.push_back(d.cross_labels[j]);
    rep.null_fit = {observed.null_fit.n, observed.null_fit.p, observed.null_fit.rss, observed.null_fit.sigma2};
    const auto& best = observed.defined ? observed.alt_fit : observed.null_fit;
    rep.alt_fit = {best.n, best.p, best.rss, best.sigma2};
    for (std::size_t i = 0; i < d.m(); ++i) {
        rep.dates.push_back(d.row_date(i));
        rep.actual.push_back(d.response(static_cast<Eigen::Index>(i)));
        rep.predicted.push_back(best.fitted(static_cast<Eigen::Index>(i)));
    }

    if (!observed.defined) {
        rep.f_defined = false;
        rep.f = {};
        rep.bootstrap_p = 1.0;
        return rep;
    }
    rep.f_defined = true;
    rep.f = observed.f;

    const auto& nf = observed.null_fit;
    const std::vector<double> resid(nf.residuals.data(), nf.residuals.data() + nf.residuals.size());
    const auto& base = d.response_source.series.values();

    auto replicate = [&](std::size_t b) -> double {
        std::mt19937_64 rng(replicate_seed(boot.seed, b));
        const auto e = moving_block_resample(resid, boot.block_len, rng);
        std::vector<double> y = base;
        for (std::size_t i = 0; i < d.m(); ++i) {
            const std::size_t t = d.rows[i];
            if (d.own_is_response) {
                double pred = nf.coefficients(0);
                for (std::size_t j = 1; j <= d.k; ++j) pred += nf.coefficients(static_cast<Eigen::Index>(j)) * y[t - j];
                y[t] = pred + e[i];
            } else {
                y[t] = nf.fitted(static_cast<Eigen::Index>(i)) + e[i];
            }
        }
        try {
            const auto s = detail::compute_statistic(detail::with_response(d, y), selection);
            return s.defined ? s.f.f_stat : 0.0;
        } catch (const SingularDesignError&) {
            return 0.0;
        }
    };

    std::vector<double> stats(boot.reps, 0.0);
    unsigned workers = boot.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : boot.threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, boot.reps));
    if (workers <= 1) {
        for (std::size_t b = 0; b < boot.reps; ++b) stats[b] = replicate(b);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t b = w; b < boot.reps; b += workers) stats[b] = replicate(b);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    std::size_t exceed = 0;
    for (double s : stats) exceed += s >= observed.f.f_stat ? 1 : 0;
    rep.bootstrap_p = static_cast<double>(1 + exceed) / static_cast<double>(1 + boot.reps);
    return rep;
}

/// Daily velocity and acceleration of SIE on a shared calendar.
struct SieDynamics {
    DailySeries velocity;
    DailySeries acceleration;
};

/// Derivatives of the fitted harmonic model over [from, to].
[[nodiscard]] inline SieDynamics model_dynamics(const harmonic::HarmonicFit& fit, const CalendarDate& from,
                                                const CalendarDate& to) {
    auto [v, a] = harmonic::derivative_series(fit, from, to);
    return {std::move(v), std::move(a)};
}

/// Central differences of the observed SIE series.
[[nodiscard]] inline SieDynamics raw_dynamics(const DailySeries& sie) {
    auto [v, a] = harmonic::difference_series(sie);
    return {std::move(v), std::move(a)};
}

/// Wires the three hypotheses onto granger_test:
///   1: NAO on its own lags plus lags of x' and x''
///   2: x' on its own lags plus NAO lags
///   3: x'' on its own lags plus NAO lags
[[nodiscard]] inline GrangerReport run_hypothesis(int h, const DailySeries& nao, const SieDynamics& dyn, std::size_t k,
                                                  const std::optional<LassoSelection>& selection,
                                                  const BootstrapConfig& boot) {
    if (h < 1 || h > 3) throw ContractError("run_hypothesis: hypothesis must be 1, 2 or 3");
    if (dyn.velocity.start() != dyn.acceleration.start() || dyn.velocity.size() != dyn.acceleration.size()) {
        throw ContractError("run_hypothesis: velocity and acceleration must share a calendar");
    }
    const CalendarDate from = std::max(nao.start(), dyn.velocity.start());
    const CalendarDate to = std::min(nao.end(), dyn.velocity.end());
    if (from > to) throw RangeError("run_hypothesis: NAO and SIE dynamics do not overlap");
    const NamedSeries y{"NAO", ingest::restrict_to(nao, from, to)};
    const NamedSeries v{"x'", ingest::restrict_to(dyn.velocity, from, to)};
    const NamedSeries a{"x''", ingest::restrict_to(dyn.acceleration, from, to)};

    LagDesign d;
    switch (h) {
        case 1: d = build_lag_design(y, y, {v, a}, k); break;
        case 2: d = build_lag_design(v, v, {y}, k); break;
        default: d = build_lag_design(a, a, {y}, k); break;
    }
    auto rep = granger_test(d, selection, boot);
    rep.hypothesis = h;
    return rep;
}

/// Hypotheses driven by the fitted model's analytic derivatives over the
/// overlap of the NAO series and the fitted domain.
[[nodiscard]] inline GrangerReport run_hypothesis(int h, const DailySeries& nao, const harmonic::HarmonicFit& fit,
                                                  std::size_t k, const std::optional<LassoSelection>& selection,
                                                  const BootstrapConfig& boot) {
    const CalendarDate from = std::max(nao.start(), fit.t0.plus_days(static_cast<std::int64_t>(fit.t_first)));
    const CalendarDate to = std::min(nao.end(), fit.last_date());
    if (from > to) throw RangeError("run_hypothesis: NAO does not overlap the fitted SIE domain");
    return run_hypothesis(h, nao, model_dynamics(fit, from, to), k, selection, boot);
}

/// `key: value` lines.
[[nodiscard]] inline std::string to_text(const GrangerReport& r) {
    std::ostringstream os;
    os.precision(10);
    os << "hypothesis: " << r.hypothesis << '\n'
       << "k: " << r.k << '\n'
       << "rows: " << r.rows << '\n'
       << "cross_candidates: " << r.cross_candidates << '\n'
       << "lambda: " << (r.lambda ? std::to_string(*r.lambda) : std::string("none")) << '\n'
       << "selected_lags: " << r.selected_lags.size() << '\n';
    if (r.f_defined) {
        os << "f_stat: " << r.f.f_stat << '\n'
           << "df_num: " << r.f.df_num << '\n'
           << "df_den: " << r.f.df_den << '\n'
           << "p_value: " << r.f.p_value << '\n';
    } else {
        os << "f_stat: undefined\np_value: 1\n";
    }
    os << "bootstrap_p: " << r.bootstrap_p << '\n'
       << "bootstrap_reps: " << r.bootstrap_reps << '\n'
       << "block_len: " << r.block_len << '\n'
       << "null_rss: " << r.null_fit.rss << '\n'
       << "alt_rss: " << r.alt_fit.rss << '\n';
    for (const auto& n : r.notes) os << "note: " << n << '\n';
    return os.str();
}

}  // namespace seaice::causality
