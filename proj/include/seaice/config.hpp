#pragma once

// Pipeline configuration: a plain `key = value` file ('#' starts a comment)
// whose keys can also be overridden one at a time from the command line.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "seaice/calendar.hpp"
#include "seaice/errors.hpp"
#include "seaice/harmonic.hpp"
#include "seaice/ingest.hpp"

namespace seaice::pipeline {

enum class DerivativeSource { Model, Raw };

[[nodiscard]] inline std::string to_string(DerivativeSource s) { return s == DerivativeSource::Model ? "model" : "raw"; }

struct PipelineConfig {
    std::string sie_path;
    std::string nao_path;
    std::optional<CalendarDate> from;  ///< default: start of the NAO/SIE overlap
    std::optional<CalendarDate> to;    ///< default: end of the overlap
    CalendarDate fill_until{1987, 8, 20};

    harmonic::HarmonicSpec harmonic;

    std::size_t k_h1 = 365;
    std::size_t k_h2 = 30;
    std::size_t k_h3 = 30;
    std::vector<int> hypotheses{1, 2, 3};
    DerivativeSource derivative_source_h1 = DerivativeSource::Model;
    DerivativeSource derivative_source_h23 = DerivativeSource::Raw;

    bool lasso = true;
    std::size_t lasso_folds = 5;
    std::size_t lasso_grid_count = 20;
    double lasso_min_ratio = 1e-3;

    std::size_t bootstrap_reps = 199;
    std::size_t block_len = 30;
    std::uint64_t seed = 20191001;
    unsigned threads = 1;

    std::size_t acf_max_lag = 400;
    std::size_t ccf_max_lag = 400;
    std::optional<std::size_t> adf_max_lag;  ///< default: 12 (n/100)^(1/4)

    double dlm_discount = 0.98;
    std::size_t dlm_lags = 3;

    std::vector<int> phase_years;  ///< empty: every year touching the fitted range

    std::string output_dir = "seaice_out";

    /// Assigns one key from its textual value.
    void set(std::string_view key, std::string_view value);
    void validate() const;
    /// Canonical `key = value` rendering that parses back to the same config.
    [[nodiscard]] std::string to_text() const;
};

namespace detail {

inline std::string_view trim(std::string_view s) { return ingest::detail::trim(s); }

[[noreturn]] inline void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw ContractError("config: " + std::string(key) + " = '" + std::string(value) + "' (expected " +
                        std::string(expected) + ")");
}

inline std::size_t to_count(std::string_view key, std::string_view v) {
    const auto i = ingest::detail::to_int(v);
    if (!i || *i < 0) bad_value(key, v, "a nonnegative integer");
    return static_cast<std::size_t>(*i);
}

inline double to_real(std::string_view key, std::string_view v) {
    const auto d = ingest::detail::to_double(v);
    if (!d) bad_value(key, v, "a number");
    return *d;
}

inline std::uint64_t to_u64(std::string_view key, std::string_view v) {
    v = trim(v);
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v, "an unsigned 64-bit integer");
    return out;
}

inline bool to_bool(std::string_view key, std::string_view v) {
    v = trim(v);
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v, "on/off");
}

inline CalendarDate to_date(std::string_view key, std::string_view v) {
    try {
        return CalendarDate::parse_iso(trim(v));
    } catch (const ContractError&) {
        bad_value(key, v, "YYYY-MM-DD");
    }
}

inline std::vector<std::string_view> list_items(std::string_view v) {
    std::vector<std::string_view> out;
    for (auto item : ingest::detail::split_on(v, ','))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

inline DerivativeSource to_source(std::string_view key, std::string_view v) {
    v = trim(v);
    if (v == "model") return DerivativeSource::Model;
    if (v == "raw") return DerivativeSource::Raw;
    bad_value(key, v, "model or raw");
}

template <typename T>
std::string join(const std::vector<T>& xs) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
    return os.str();
}

}  // namespace detail

inline void PipelineConfig::set(std::string_view key, std::string_view raw) {
    using namespace detail;
    const auto v = trim(raw);
    if (key == "sie_path") sie_path = std::string(v);
    else if (key == "nao_path") nao_path = std::string(v);
    else if (key == "from") from = to_date(key, v);
    else if (key == "to") to = to_date(key, v);
    else if (key == "fill_until") fill_until = to_date(key, v);
    else if (key == "periods") {
        harmonic.periods.clear();
        for (auto item : list_items(v)) harmonic.periods.push_back(to_real(key, item));
    } else if (key == "harmonics") harmonic.harmonics = to_count(key, v);
    else if (key == "k_h1") k_h1 = to_count(key, v);
    else if (key == "k_h2") k_h2 = to_count(key, v);
    else if (key == "k_h3") k_h3 = to_count(key, v);
    else if (key == "hypotheses") {
        hypotheses.clear();
        for (auto item : list_items(v)) hypotheses.push_back(static_cast<int>(to_count(key, item)));
    } else if (key == "derivative_source_h1") derivative_source_h1 = to_source(key, v);
    else if (key == "derivative_source_h23") derivative_source_h23 = to_source(key, v);
    else if (key == "lasso") lasso = to_bool(key, v);
    else if (key == "lasso_folds") lasso_folds = to_count(key, v);
    else if (key == "lasso_grid_count") lasso_grid_count = to_count(key, v);
    else if (key == "lasso_min_ratio") lasso_min_ratio = to_real(key, v);
    else if (key == "bootstrap_reps") bootstrap_reps = to_count(key, v);
    else if (key == "block_len") block_len = to_count(key, v);
    else if (key == "seed") seed = to_u64(key, v);
    else if (key == "threads") threads = static_cast<unsigned>(to_count(key, v));
    else if (key == "acf_max_lag") acf_max_lag = to_count(key, v);
    else if (key == "ccf_max_lag") ccf_max_lag = to_count(key, v);
    else if (key == "adf_max_lag") {
        if (v == "auto") adf_max_lag.reset();
        else adf_max_lag = to_count(key, v);
    } else if (key == "dlm_discount") dlm_discount = to_real(key, v);
    else if (key == "dlm_lags") dlm_lags = to_count(key, v);
    else if (key == "phase_years") {
        phase_years.clear();
        for (auto item : list_items(v)) phase_years.push_back(static_cast<int>(to_count(key, item)));
    } else if (key == "output_dir") output_dir = std::string(v);
    else throw ContractError("config: unknown key '" + std::string(key) + "'");
}

inline void PipelineConfig::validate() const {
    if (sie_path.empty()) throw ContractError("config: sie_path is required");
    if (nao_path.empty()) throw ContractError("config: nao_path is required");
    if (output_dir.empty()) throw ContractError("config: output_dir is required");
    if (from && to && *from > *to) throw ContractError("config: from is after to");
    harmonic.validate();
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw ContractError(std::string("config: ") + name + " must be positive");
    };
    positive(k_h1, "k_h1");
    positive(k_h2, "k_h2");
    positive(k_h3, "k_h3");
    positive(lasso_folds, "lasso_folds");
    positive(lasso_grid_count, "lasso_grid_count");
    positive(bootstrap_reps, "bootstrap_reps");
    positive(block_len, "block_len");
    positive(acf_max_lag, "acf_max_lag");
    positive(ccf_max_lag, "ccf_max_lag");
    positive(dlm_lags, "dlm_lags");
    if (!(lasso_min_ratio > 0.0 && lasso_min_ratio < 1.0)) throw ContractError("config: lasso_min_ratio must lie in (0, 1)");
    for (int h : hypotheses)
        if (h < 1 || h > 3) throw ContractError("config: hypotheses may only list 1, 2, 3");
}

inline std::string PipelineConfig::to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "sie_path = " << sie_path << '\n'
       << "nao_path = " << nao_path << '\n';
    if (from) os << "from = " << from->iso() << '\n';
    if (to) os << "to = " << to->iso() << '\n';
    os << "fill_until = " << fill_until.iso() << '\n'
       << "periods = " << detail::join(harmonic.periods) << '\n'
       << "harmonics = " << harmonic.harmonics << '\n'
       << "k_h1 = " << k_h1 << '\n'
       << "k_h2 = " << k_h2 << '\n'
       << "k_h3 = " << k_h3 << '\n'
       << "hypotheses = " << detail::join(hypotheses) << '\n'
       << "derivative_source_h1 = " << to_string(derivative_source_h1) << '\n'
       << "derivative_source_h23 = " << to_string(derivative_source_h23) << '\n'
       << "lasso = " << (lasso ? "on" : "off") << '\n'
       << "lasso_folds = " << lasso_folds << '\n'
       << "lasso_grid_count = " << lasso_grid_count << '\n'
       << "lasso_min_ratio = " << lasso_min_ratio << '\n'
       << "bootstrap_reps = " << bootstrap_reps << '\n'
       << "block_len = " << block_len << '\n'
       << "seed = " << seed << '\n'
       << "threads = " << threads << '\n'
       << "acf_max_lag = " << acf_max_lag << '\n'
       << "ccf_max_lag = " << ccf_max_lag << '\n'
       << "adf_max_lag = " << (adf_max_lag ? std::to_string(*adf_max_lag) : std::string("auto")) << '\n'
       << "dlm_discount = " << dlm_discount << '\n'
       << "dlm_lags = " << dlm_lags << '\n';
    if (!phase_years.empty()) os << "phase_years = " << detail::join(phase_years) << '\n';
    os << "output_dir = " << output_dir << '\n';
    return os.str();
}

/// Parses `key = value` text. Later keys override earlier ones.
[[nodiscard]] inline PipelineConfig parse_config(std::string_view text, PipelineConfig base = {}) {
    const auto lines = ingest::detail::split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        auto line = lines[ln];
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(ln + 1, "config line has no '='");
        const auto key = detail::trim(line.substr(0, eq));
        try {
            base.set(key, line.substr(eq + 1));
        } catch (const ContractError& e) {
            throw ParseError(ln + 1, e.what());
        }
    }
    return base;
}

[[nodiscard]] inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) throw IoError("failed reading '" + path + "'");
    return os.str();
}

[[nodiscard]] inline PipelineConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

}  // namespace seaice::pipeline
