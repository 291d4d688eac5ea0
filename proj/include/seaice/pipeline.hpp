#pragma once

// End-to-end run: ingest -> harmonic -> memory -> causality, followed by the
// text/JSON reports and the plot exports.
//
// Files written to output_dir (names are stable):
//   report.txt, report.json
//   sie_fit.csv/.svg                   observed SIE and the fitted model
//   phase_areas.csv/.svg               loop area per year, both phase planes
//   phase_pv_<year>.csv/.svg           position-velocity loop
//   phase_va_<year>.csv/.svg           velocity-acceleration loop
//   acf_nao.csv/.svg                   NAO autocorrelation
//   ccf_nao_velocity.csv/.svg          NAO vs SIE velocity cross-correlation
//   skew_yearly.csv/.svg, skew_monthly.csv/.svg
//   granger_h<N>.csv/.svg              actual vs predicted response
//   dlm_paths.csv/.svg                 filtered coefficient paths
//
// report.json carries no wall-clock data, so it is byte-identical for
// identical configurations; timings are only in report.txt.

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "seaice/adf.hpp"
#include "seaice/calendar.hpp"
#include "seaice/causality.hpp"
#include "seaice/config.hpp"
#include "seaice/correlogram.hpp"
#include "seaice/dlm.hpp"
#include "seaice/errors.hpp"
#include "seaice/harmonic.hpp"
#include "seaice/hurst.hpp"
#include "seaice/ingest.hpp"
#include "seaice/plots.hpp"
#include "seaice/series.hpp"
#include "seaice/summary.hpp"

namespace seaice::pipeline {

/// Failure inside one pipeline stage; what() reads "<stage>: <cause>".
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what, std::exception_ptr cause)
        : Error(stage + ": " + what), stage_(std::move(stage)), cause_(std::move(cause)) {}
    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }
    /// The original exception, for callers that dispatch on its type.
    [[nodiscard]] std::exception_ptr cause() const noexcept { return cause_; }

private:
    std::string stage_;
    std::exception_ptr cause_;
};

struct StageSelection {
    bool harmonic = true;
    bool memory = true;
    bool causality = true;

    [[nodiscard]] static StageSelection for_verb(const std::string& verb) {
        if (verb == "ingest") return {false, false, false};
        if (verb == "fit") return {true, false, false};
        if (verb == "diagnose") return {true, true, false};
        if (verb == "granger") return {true, false, true};
        if (verb == "all") return {};
        throw ContractError("unknown verb '" + verb + "'");
    }
};

struct StageStatus {
    std::string name;
    bool done = false;
    std::string skipped_reason;
    double seconds = 0.0;
};

struct SeriesSummary {
    std::string name;
    std::string units;
    CalendarDate first{};
    CalendarDate last{};
    std::size_t days = 0;
    std::size_t observed = 0;
    ingest::IngestReport report;
};

struct PhaseArea {
    int year = 0;
    std::size_t days = 0;
    double position_velocity = 0.0;
    double velocity_acceleration = 0.0;
};

struct HypothesisResult {
    causality::GrangerReport report;
    DerivativeSource source = DerivativeSource::Model;
};

struct PipelineReport {
    PipelineConfig config;
    std::vector<StageStatus> stages;

    std::optional<SeriesSummary> sie_summary;
    std::optional<SeriesSummary> nao_summary;
    CalendarDate from{};
    CalendarDate to{};
    std::optional<DailySeries> sie;  ///< aligned to [from, to], gaps repaired
    std::optional<DailySeries> nao;  ///< aligned to [from, to]

    std::optional<harmonic::HarmonicFit> fit;
    std::vector<harmonic::PhaseTrajectory> position_velocity;
    std::vector<harmonic::PhaseTrajectory> velocity_acceleration;
    std::vector<PhaseArea> phase_areas;

    std::optional<memory::HurstReport> hurst;
    std::optional<memory::AdfResult> adf;
    std::optional<memory::Correlogram> acf;
    std::optional<memory::Correlogram> ccf;
    std::optional<memory::SkewSummary> skew_yearly;
    std::optional<memory::SkewSummary> skew_monthly;

    std::vector<HypothesisResult> hypotheses;
    std::optional<causality::DlmTrace> dlm;

    std::vector<std::string> files;  ///< relative to config.output_dir

    [[nodiscard]] const StageStatus& stage(const std::string& name) const {
        for (const auto& s : stages)
            if (s.name == name) return s;
        throw RangeError("no stage named '" + name + "'");
    }
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline SeriesSummary summarize(const std::string& name, const DailySeries& s, const ingest::IngestReport& r) {
    return {name, s.units(), s.start(), s.end(), s.size(), s.observed_count(), r};
}

inline double decimal_year(const CalendarDate& d) {
    return static_cast<double>(d.year) + static_cast<double>(days_between({d.year, 1, 1}, d)) / 365.25;
}

/// Velocity and acceleration on the analysis calendar [from, to].
inline causality::SieDynamics dynamics(const PipelineReport& r, DerivativeSource source) {
    if (source == DerivativeSource::Raw) return causality::raw_dynamics(*r.sie);
    if (!r.fit) throw ContractError("model derivatives need the harmonic stage");
    const auto& f = *r.fit;
    const CalendarDate lo = f.t0.plus_days(static_cast<std::int64_t>(f.t_first));
    auto dyn = causality::model_dynamics(f, lo, f.last_date());
    return {ingest::restrict_to(dyn.velocity, r.from, r.to), ingest::restrict_to(dyn.acceleration, r.from, r.to)};
}

inline std::vector<int> auto_phase_years(const harmonic::HarmonicFit& f) {
    const CalendarDate lo = f.t0.plus_days(static_cast<std::int64_t>(f.t_first));
    const CalendarDate hi = f.last_date();
    std::vector<int> years;
    for (int y = lo.year; y <= hi.year; ++y)
        if (CalendarDate{y, 1, 1} >= lo && CalendarDate{y, 12, 31} <= hi) years.push_back(y);
    return years;
}

template <typename Body>
void run_stage(PipelineReport& report, const std::string& name, bool enabled, const std::string& skip_reason,
               Body&& body) {
    StageStatus st;
    st.name = name;
    if (!enabled) {
        st.skipped_reason = skip_reason;
        report.stages.push_back(std::move(st));
        return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what(), std::current_exception());
    }
    st.done = true;
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.stages.push_back(std::move(st));
}

}  // namespace detail

inline void stage_ingest(PipelineReport& r) {
    const auto& c = r.config;
    auto sie = ingest::parse_sie(read_file(c.sie_path));
    auto nao = ingest::parse_nao(read_file(c.nao_path));
    auto filled = ingest::fill_alternate_days(sie.series, c.fill_until);
    sie.report.gaps_filled = filled.report.gaps_filled;
    r.sie_summary = detail::summarize("SIE", filled.series, sie.report);
    r.nao_summary = detail::summarize("NAO", nao.series, nao.report);

    r.from = c.from.value_or(std::max(filled.series.start(), nao.series.start()));
    r.to = c.to.value_or(std::min(filled.series.end(), nao.series.end()));
    auto [a, b] = ingest::align(filled.series, nao.series, r.from, r.to);
    if (a.observed_count() == 0 || b.observed_count() == 0) {
        throw RangeError("no observed data in [" + r.from.iso() + ", " + r.to.iso() + "]");
    }
    r.sie = std::move(a);
    r.nao = std::move(b);
}

inline void stage_harmonic(PipelineReport& r) {
    r.fit = harmonic::fit_harmonic(*r.sie, r.config.harmonic);
    const auto years = r.config.phase_years.empty() ? detail::auto_phase_years(*r.fit) : r.config.phase_years;
    for (int y : years) {
        auto pv = harmonic::phase_trajectory(*r.fit, y, harmonic::PhaseKind::PositionVelocity);
        auto va = harmonic::phase_trajectory(*r.fit, y, harmonic::PhaseKind::VelocityAcceleration);
        r.phase_areas.push_back({y, pv.points.size(), pv.area, va.area});
        r.position_velocity.push_back(std::move(pv));
        r.velocity_acceleration.push_back(std::move(va));
    }
}

inline void stage_memory(PipelineReport& r) {
    const auto& c = r.config;
    const auto& nao = *r.nao;
    r.hurst = memory::hurst(nao);
    const std::size_t stretch = nao.longest_observed_run().second;
    r.adf = memory::adf_test(nao, c.adf_max_lag.value_or(memory::adf_lag_cap(stretch)));
    r.acf = memory::acf(nao, c.acf_max_lag);
    const auto dyn = detail::dynamics(r, c.derivative_source_h23);
    r.ccf = memory::ccf(nao, dyn.velocity, c.ccf_max_lag);
    r.skew_yearly = memory::skew_summary(nao, memory::Bucket::Yearly);
    r.skew_monthly = memory::skew_summary(nao, memory::Bucket::Monthly);
}

inline void stage_causality(PipelineReport& r) {
    const auto& c = r.config;
    std::optional<causality::LassoSelection> sel;
    if (c.lasso) sel = causality::LassoSelection{c.lasso_folds, c.lasso_grid_count, c.lasso_min_ratio, {}};
    const causality::BootstrapConfig boot{c.bootstrap_reps, c.block_len, c.seed, c.threads};
    for (int h : c.hypotheses) {
        const auto source = h == 1 ? c.derivative_source_h1 : c.derivative_source_h23;
        const std::size_t k = h == 1 ? c.k_h1 : (h == 2 ? c.k_h2 : c.k_h3);
        auto rep = causality::run_hypothesis(h, *r.nao, detail::dynamics(r, source), k, sel, boot);
        r.hypotheses.push_back({std::move(rep), source});
    }
    // Coefficient paths of the velocity model (x' on its own lags and NAO lags).
    const auto dyn = detail::dynamics(r, c.derivative_source_h23);
    const causality::NamedSeries v{"x'", dyn.velocity};
    const causality::NamedSeries y{"NAO", *r.nao};
    r.dlm = causality::dlm_filter(causality::build_lag_design(v, v, {y}, c.dlm_lags), c.dlm_discount);
}

// ---- reports ------------------------------------------------------------

[[nodiscard]] inline nlohmann::ordered_json to_json(const causality::GrangerReport& g, DerivativeSource source) {
    nlohmann::ordered_json j;
    j["hypothesis"] = g.hypothesis;
    j["derivative_source"] = to_string(source);
    j["k"] = g.k;
    j["rows"] = g.rows;
    j["cross_candidates"] = g.cross_candidates;
    j["selected_lags"] = g.selected_lags;
    j["aliased_lags"] = g.aliased_lags;
    j["lambda"] = g.lambda ? nlohmann::ordered_json(*g.lambda) : nlohmann::ordered_json(nullptr);
    j["f_defined"] = g.f_defined;
    j["f_stat"] = g.f_defined ? nlohmann::ordered_json(g.f.f_stat) : nlohmann::ordered_json(nullptr);
    j["df_num"] = g.f.df_num;
    j["df_den"] = g.f.df_den;
    j["p_value"] = g.f_defined ? g.f.p_value : 1.0;
    j["bootstrap_p"] = g.bootstrap_p;
    j["bootstrap_reps"] = g.bootstrap_reps;
    j["block_len"] = g.block_len;
    j["seed"] = g.seed;
    j["null_fit"] = {{"n", g.null_fit.n}, {"p", g.null_fit.p}, {"rss", g.null_fit.rss}, {"sigma2", g.null_fit.sigma2}};
    j["alt_fit"] = {{"n", g.alt_fit.n}, {"p", g.alt_fit.p}, {"rss", g.alt_fit.rss}, {"sigma2", g.alt_fit.sigma2}};
    j["notes"] = g.notes;
    return j;
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const PipelineReport& r) {
    using nlohmann::ordered_json;
    const auto& c = r.config;
    ordered_json j;

    // Thread count is deliberately absent: results do not depend on it.
    ordered_json cfg;
    cfg["sie_path"] = c.sie_path;
    cfg["nao_path"] = c.nao_path;
    cfg["fill_until"] = c.fill_until.iso();
    cfg["periods"] = c.harmonic.periods;
    cfg["harmonics"] = c.harmonic.harmonics;
    cfg["k"] = {c.k_h1, c.k_h2, c.k_h3};
    cfg["hypotheses"] = c.hypotheses;
    cfg["lasso"] = c.lasso;
    cfg["lasso_folds"] = c.lasso_folds;
    cfg["lasso_grid_count"] = c.lasso_grid_count;
    cfg["lasso_min_ratio"] = c.lasso_min_ratio;
    cfg["bootstrap_reps"] = c.bootstrap_reps;
    cfg["block_len"] = c.block_len;
    cfg["seed"] = c.seed;
    cfg["dlm_discount"] = c.dlm_discount;
    cfg["dlm_lags"] = c.dlm_lags;
    j["config"] = cfg;

    ordered_json stages = ordered_json::array();
    for (const auto& s : r.stages) {
        ordered_json e{{"name", s.name}, {"status", s.done ? "done" : "skipped"}};
        if (!s.done) e["reason"] = s.skipped_reason;
        stages.push_back(e);
    }
    j["stages"] = stages;

    if (r.sie_summary) {
        j["window"] = {{"from", r.from.iso()}, {"to", r.to.iso()}};
        ordered_json ing;
        for (const auto* s : {&*r.sie_summary, &*r.nao_summary}) {
            ing[s->name] = {{"units", s->units},         {"first", s->first.iso()},
                            {"last", s->last.iso()},     {"days", s->days},
                            {"observed", s->observed},   {"rows_read", s->report.rows_read},
                            {"rows_rejected", s->report.rows_rejected}, {"gaps_filled", s->report.gaps_filled}};
        }
        j["ingest"] = ing;
    }

    if (r.fit) {
        const auto& f = *r.fit;
        ordered_json h;
        h["t0"] = f.t0.iso();
        h["observations"] = f.observations;
        h["rss"] = f.rss;
        h["sigma2"] = f.sigma2;
        h["trend"] = {f.beta0, f.beta1, f.beta2};
        ordered_json per = ordered_json::array();
        for (std::size_t p = 0; p < f.spec.periods.size(); ++p) {
            ordered_json s = ordered_json::array(), co = ordered_json::array();
            for (Eigen::Index i = 0; i < f.sine.rows(); ++i) {
                s.push_back(f.sine(i, static_cast<Eigen::Index>(p)));
                co.push_back(f.cosine(i, static_cast<Eigen::Index>(p)));
            }
            per.push_back({{"period", f.spec.periods[p]}, {"sine", s}, {"cosine", co}});
        }
        h["seasonal"] = per;
        ordered_json areas = ordered_json::array();
        for (const auto& a : r.phase_areas) {
            areas.push_back({{"year", a.year},
                             {"days", a.days},
                             {"position_velocity_area", a.position_velocity},
                             {"velocity_acceleration_area", a.velocity_acceleration}});
        }
        h["phase_areas"] = areas;
        j["harmonic"] = h;
    }

    if (r.hurst) {
        ordered_json m;
        const auto& hu = *r.hurst;
        m["hurst"] = {{"simple_rs", hu.simple_rs},
                      {"corrected_rs", hu.corrected_rs},
                      {"empirical", hu.empirical},
                      {"corrected_empirical", hu.corrected_empirical},
                      {"theoretical", hu.theoretical},
                      {"length", hu.length},
                      {"unreliable", hu.unreliable}};
        const auto& a = *r.adf;
        m["adf"] = {{"statistic", a.statistic},
                    {"lag_order", a.lag_order},
                    {"observations", a.observations},
                    {"critical_values", a.critical_values},
                    {"p_value_bracket", {a.p_value_bracket.first, a.p_value_bracket.second}},
                    {"reject_unit_root_5pct", a.reject_unit_root_5pct}};
        auto corr = [](const memory::Correlogram& cg) {
            double lo = 0.0, hi = 0.0;
            for (const auto& p : cg.points) {
                lo = std::min(lo, p.value);
                hi = std::max(hi, p.value);
            }
            return ordered_json{{"points", cg.points.size()}, {"n", cg.n}, {"band", cg.band}, {"min", lo}, {"max", hi}};
        };
        m["acf"] = corr(*r.acf);
        m["ccf"] = corr(*r.ccf);
        auto skew = [](const memory::SkewSummary& s) {
            return ordered_json{{"buckets", s.rows.size()},
                                {"median_above_mean", s.median_above_mean},
                                {"mean_above_median", s.mean_above_median},
                                {"notes", s.notes}};
        };
        m["skew_yearly"] = skew(*r.skew_yearly);
        m["skew_monthly"] = skew(*r.skew_monthly);
        j["memory"] = m;
    }

    if (!r.hypotheses.empty() || r.dlm) {
        ordered_json cz;
        ordered_json hs = ordered_json::array();
        for (const auto& h : r.hypotheses) hs.push_back(to_json(h.report, h.source));
        cz["hypotheses"] = hs;
        if (r.dlm) {
            ordered_json fin;
            for (std::size_t i = 0; i < r.dlm->labels.size(); ++i) fin[r.dlm->labels[i]] = r.dlm->coefficient_paths[i].back();
            cz["dlm"] = {{"discount", r.dlm->discount}, {"steps", r.dlm->times.size()}, {"final_coefficients", fin}};
        }
        j["causality"] = cz;
    }
    j["files"] = r.files;
    return j;
}

[[nodiscard]] inline std::string to_text(const PipelineReport& r) {
    std::ostringstream os;
    os.precision(8);
    os << "# seaice pipeline report\n\n[stages]\n";
    for (const auto& s : r.stages) {
        os << s.name << ": " << (s.done ? "done" : "skipped");
        if (s.done) os << " (" << s.seconds << " s)";
        else os << " (" << s.skipped_reason << ")";
        os << '\n';
    }
    if (r.sie_summary) {
        os << "\n[ingest]\nwindow: " << r.from.iso() << " .. " << r.to.iso() << '\n';
        for (const auto* s : {&*r.sie_summary, &*r.nao_summary}) {
            os << s->name << ": " << s->first.iso() << " .. " << s->last.iso() << ", " << s->observed << "/" << s->days
               << " days observed, " << s->report.rows_read << " rows read, " << s->report.rows_rejected
               << " rejected, " << s->report.gaps_filled << " gaps filled\n";
        }
    }
    if (r.fit) {
        const auto& f = *r.fit;
        os << "\n[harmonic]\nt0: " << f.t0.iso() << "\nobservations: " << f.observations << "\nsigma2: " << f.sigma2
           << "\ntrend: " << f.beta0 << ", " << f.beta1 << ", " << f.beta2 << '\n';
        for (std::size_t p = 0; p < f.spec.periods.size(); ++p) {
            for (Eigen::Index i = 0; i < f.sine.rows(); ++i) {
                os << "period " << f.spec.periods[p] << " harmonic " << i + 1
                   << ": sin " << f.sine(i, static_cast<Eigen::Index>(p)) << ", cos "
                   << f.cosine(i, static_cast<Eigen::Index>(p)) << '\n';
            }
        }
        for (const auto& a : r.phase_areas) {
            os << "phase area " << a.year << ": position-velocity " << a.position_velocity
               << ", velocity-acceleration " << a.velocity_acceleration << '\n';
        }
    }
    if (r.hurst) {
        const auto& h = *r.hurst;
        os << "\n[memory]\nhurst simple R/S: " << h.simple_rs << "\nhurst corrected R/S: " << h.corrected_rs
           << "\nhurst empirical: " << h.empirical << "\nhurst corrected empirical: " << h.corrected_empirical
           << "\nhurst theoretical: " << h.theoretical << "\nhurst length: " << h.length
           << (h.unreliable ? " (unreliable)" : "") << '\n';
        const auto& a = *r.adf;
        os << "adf statistic: " << a.statistic << " (lag " << a.lag_order << ", n " << a.observations
           << ")\nadf critical 1/5/10%: " << a.critical_values[0] << ", " << a.critical_values[1] << ", "
           << a.critical_values[2] << "\nadf p in [" << a.p_value_bracket.first << ", " << a.p_value_bracket.second
           << "]\nadf rejects unit root at 5%: " << (a.reject_unit_root_5pct ? "yes" : "no") << '\n';
        os << "acf band: " << r.acf->band << "\nccf band: " << r.ccf->band << '\n';
        os << "yearly buckets with median > mean: " << r.skew_yearly->median_above_mean << " of "
           << r.skew_yearly->rows.size() << '\n';
        os << "monthly buckets with median > mean: " << r.skew_monthly->median_above_mean << " of "
           << r.skew_monthly->rows.size() << '\n';
    }
    for (const auto& h : r.hypotheses) {
        os << "\n[hypothesis " << h.report.hypothesis << "]\nderivative_source: " << to_string(h.source) << '\n'
           << causality::to_text(h.report);
    }
    if (r.dlm) {
        os << "\n[dlm]\ndiscount: " << r.dlm->discount << "\nsteps: " << r.dlm->times.size() << '\n';
        for (std::size_t i = 0; i < r.dlm->labels.size(); ++i)
            os << "final " << r.dlm->labels[i] << ": " << r.dlm->coefficient_paths[i].back() << '\n';
    }
    os << "\n[files]\n";
    for (const auto& f : r.files) os << f << '\n';
    return os.str();
}

// ---- plot exports ---------------------------------------------------------

/// Writes every plot CSV and its SVG rendering into `dir` and returns the file
/// names (relative to `dir`) in writing order.
[[nodiscard]] inline std::vector<std::string> emit_plots(const PipelineReport& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");

    std::vector<std::string> files;
    auto emit = [&](const std::string& stem, const std::string& csv, const plots::Chart& chart) {
        detail::write_file(dir / (stem + ".csv"), csv);
        detail::write_file(dir / (stem + ".svg"), plots::render_svg(chart));
        files.push_back(stem + ".csv");
        files.push_back(stem + ".svg");
    };
    auto fmt = [] {
        std::ostringstream os;
        os.precision(17);
        return os;
    };

    if (r.fit) {
        const auto& f = *r.fit;
        auto os = fmt();
        os << "date,t,observed,fitted\n";
        plots::Line obs{"observed", {}, {}, false}, fit{"fitted", {}, {}, false};
        const auto& s = *r.sie;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto d = s.date_at(i);
            const double t = f.days_since_t0(d);
            if (t < f.t_first || t > f.t_last) continue;
            const double fv = harmonic::eval_fit(f, t);
            os << d.iso() << ',' << t << ',';
            if (s.is_observed(i)) {
                os << s.value(i);
                obs.x.push_back(detail::decimal_year(d));
                obs.y.push_back(s.value(i));
            }
            os << ',' << fv << '\n';
            fit.x.push_back(detail::decimal_year(d));
            fit.y.push_back(fv);
        }
        emit("sie_fit", os.str(), {"SIE and fitted model", "year", s.units(), {obs, fit}});

        auto oa = fmt();
        oa << "year,days,position_velocity_area,velocity_acceleration_area\n";
        plots::Line pv{"position-velocity", {}, {}, false}, va{"velocity-acceleration", {}, {}, false};
        for (const auto& a : r.phase_areas) {
            oa << a.year << ',' << a.days << ',' << a.position_velocity << ',' << a.velocity_acceleration << '\n';
            pv.x.push_back(a.year);
            pv.y.push_back(a.position_velocity);
            va.x.push_back(a.year);
            va.y.push_back(a.velocity_acceleration);
        }
        emit("phase_areas", oa.str(), {"Phase-plane loop area", "year", "area", {pv, va}});

        auto loops = [&](const std::vector<harmonic::PhaseTrajectory>& trs, const char* tag, const char* ul,
                         const char* vl) {
            for (const auto& tr : trs) {
                plots::Line l{std::to_string(tr.year), {}, {}, true};
                for (const auto& p : tr.points) {
                    l.x.push_back(p.u);
                    l.y.push_back(p.v);
                }
                emit(std::string("phase_") + tag + "_" + std::to_string(tr.year), harmonic::trajectory_csv(tr),
                     {harmonic::to_string(tr.kind) + " " + std::to_string(tr.year), ul, vl, {l}});
            }
        };
        loops(r.position_velocity, "pv", "x", "x'");
        loops(r.velocity_acceleration, "va", "x'", "x''");
    }

    auto correlogram = [&](const std::string& stem, const memory::Correlogram& c, const std::string& title) {
        plots::Line l{"r", {}, {}, false}, up{"+band", {}, {}, false}, lo{"-band", {}, {}, false};
        for (const auto& p : c.points) {
            l.x.push_back(p.lag);
            l.y.push_back(p.value);
        }
        const double x0 = c.points.front().lag, x1 = c.points.back().lag;
        up.x = lo.x = {x0, x1};
        up.y = {c.band, c.band};
        lo.y = {-c.band, -c.band};
        emit(stem, memory::correlogram_csv(c), {title, "lag (days)", "correlation", {l, up, lo}});
    };
    if (r.acf) correlogram("acf_nao", *r.acf, "NAO autocorrelation");
    if (r.ccf) correlogram("ccf_nao_velocity", *r.ccf, "NAO vs SIE velocity cross-correlation");

    auto skew = [&](const std::string& stem, const memory::SkewSummary& s, const std::string& title) {
        plots::Line l{"mean - median", {}, {}, false};
        for (std::size_t i = 0; i < s.rows.size(); ++i) {
            l.x.push_back(static_cast<double>(i));
            l.y.push_back(s.rows[i].diff);
        }
        emit(stem, memory::skew_csv(s), {title, "bucket index", "mean - median", {l}});
    };
    if (r.skew_yearly) skew("skew_yearly", *r.skew_yearly, "NAO yearly mean - median");
    if (r.skew_monthly) skew("skew_monthly", *r.skew_monthly, "NAO monthly mean - median");

    for (const auto& h : r.hypotheses) {
        const auto& g = h.report;
        auto os = fmt();
        os << "date,actual,predicted\n";
        plots::Line act{"actual", {}, {}, false}, pred{"predicted", {}, {}, false};
        for (std::size_t i = 0; i < g.dates.size(); ++i) {
            os << g.dates[i].iso() << ',' << g.actual[i] << ',' << g.predicted[i] << '\n';
            act.x.push_back(detail::decimal_year(g.dates[i]));
            act.y.push_back(g.actual[i]);
            pred.x.push_back(act.x.back());
            pred.y.push_back(g.predicted[i]);
        }
        const auto stem = "granger_h" + std::to_string(g.hypothesis);
        emit(stem, os.str(), {"Hypothesis " + std::to_string(g.hypothesis) + ": actual vs predicted", "year",
                              "response", {act, pred}});
    }

    if (r.dlm) {
        const auto& d = *r.dlm;
        auto os = fmt();
        os << "date";
        for (const auto& l : d.labels) os << ',' << l;
        os << '\n';
        std::vector<plots::Line> lines;
        for (const auto& l : d.labels) lines.push_back({l, {}, {}, false});
        for (std::size_t t = 0; t < d.times.size(); ++t) {
            os << d.times[t].iso();
            for (std::size_t i = 0; i < d.labels.size(); ++i) {
                os << ',' << d.coefficient_paths[i][t];
                lines[i].x.push_back(detail::decimal_year(d.times[t]));
                lines[i].y.push_back(d.coefficient_paths[i][t]);
            }
            os << '\n';
        }
        emit("dlm_paths", os.str(), {"DLM filtered coefficients", "year", "coefficient", lines});
    }
    return files;
}

// ---- driver -----------------------------------------------------------------

/// Runs the selected stages and writes all outputs under config.output_dir.
///
/// Outputs are first written to a staging directory and moved into place only
/// after everything succeeded; on failure the staging directory is removed and
/// nothing from this run is left behind.
[[nodiscard]] inline PipelineReport run_pipeline(const PipelineConfig& config, const StageSelection& which = {}) {
    PipelineReport r;
    r.config = config;
    try {
        config.validate();
    } catch (const std::exception& e) {
        throw StageError("config", e.what(), std::current_exception());
    }

    detail::run_stage(r, "ingest", true, "", [&] { stage_ingest(r); });
    detail::run_stage(r, "harmonic", which.harmonic, "not requested", [&] { stage_harmonic(r); });
    const bool memory_ok = which.memory && (r.fit || config.derivative_source_h23 == DerivativeSource::Raw);
    detail::run_stage(r, "memory", memory_ok, which.memory ? "needs the harmonic stage" : "not requested",
                      [&] { stage_memory(r); });
    bool model_needed = false;
    for (int h : config.hypotheses) {
        model_needed = model_needed ||
                       (h == 1 ? config.derivative_source_h1 : config.derivative_source_h23) == DerivativeSource::Model;
    }
    const bool causality_ok = which.causality && (r.fit || !model_needed) && !config.hypotheses.empty();
    detail::run_stage(r, "causality", causality_ok,
                      !which.causality ? "not requested"
                                       : (config.hypotheses.empty() ? "no hypotheses configured" : "needs the harmonic stage"),
                      [&] { stage_causality(r); });

    namespace fs = std::filesystem;
    const fs::path out = config.output_dir;
    const fs::path staging = out / ".staging";
    try {
        fs::create_directories(out);
        fs::remove_all(staging);
        r.files = emit_plots(r, staging);
        r.files.push_back("report.txt");
        r.files.push_back("report.json");
        detail::write_file(staging / "report.txt", to_text(r));
        detail::write_file(staging / "report.json", to_json(r).dump(2) + "\n");
        for (const auto& f : r.files) fs::rename(staging / f, out / f);
        fs::remove_all(staging);
    } catch (const std::exception& e) {
        std::error_code ignored;
        fs::remove_all(staging, ignored);
        throw StageError("output", e.what(), std::current_exception());
    }
    return r;
}

}  // namespace seaice::pipeline
