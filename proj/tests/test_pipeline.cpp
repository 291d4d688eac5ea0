#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "seaice/pipeline.hpp"
#include "support/fixture.hpp"

using namespace seaice;
using namespace seaice::pipeline;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) { return read_file(p.string()); }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Config, ParsesKeysCommentsAndLists) {
    const auto c = parse_config(
        "# comment\n"
        "sie_path = a.csv   # trailing comment\n"
        "nao_path=b.txt\n"
        "periods = 365.25, 182.625\n"
        "harmonics = 3\n"
        "from = 1979-01-01\n"
        "lasso = off\n"
        "seed = 18446744073709551615\n"
        "adf_max_lag = 12\n"
        "derivative_source_h1 = raw\n"
        "hypotheses = 2,3\n");
    EXPECT_EQ(c.sie_path, "a.csv");
    EXPECT_EQ(c.nao_path, "b.txt");
    EXPECT_EQ(c.harmonic.periods, (std::vector<double>{365.25, 182.625}));
    EXPECT_EQ(c.harmonic.harmonics, 3u);
    EXPECT_EQ(c.from, (CalendarDate{1979, 1, 1}));
    EXPECT_FALSE(c.lasso);
    EXPECT_EQ(c.seed, 18446744073709551615ULL);
    EXPECT_EQ(c.adf_max_lag, 12u);
    EXPECT_EQ(c.derivative_source_h1, DerivativeSource::Raw);
    EXPECT_EQ(c.hypotheses, (std::vector<int>{2, 3}));
    EXPECT_EQ(c.k_h1, 365u);
}

TEST(Config, TextFormRoundTrips) {
    auto c = parse_config("sie_path = s\nnao_path = n\nk_h2 = 7\nphase_years = 1988, 2018\nlasso_min_ratio = 0.002\n");
    const auto again = parse_config(c.to_text());
    EXPECT_EQ(again.to_text(), c.to_text());
    EXPECT_EQ(again.k_h2, 7u);
    EXPECT_EQ(again.phase_years, (std::vector<int>{1988, 2018}));
}

TEST(Config, BadLinesNameTheLine) {
    try {
        (void)parse_config("sie_path = x\nbogus_key = 1\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW((void)parse_config("no equals sign\n"), ParseError);
    EXPECT_THROW((void)parse_config("bootstrap_reps = many\n"), ParseError);
    EXPECT_THROW((void)parse_config("from = 2019-02-30\n"), ParseError);
}

TEST(Config, ValidationRequiresPathsAndPositiveCounts) {
    PipelineConfig c;
    EXPECT_THROW(c.validate(), ContractError);
    c.sie_path = "a";
    c.nao_path = "b";
    c.validate();
    c.block_len = 0;
    EXPECT_THROW(c.validate(), ContractError);
}

TEST(Pipeline, FixtureRunRecoversHarmonicCoefficients) {
    const auto cfg = seaice::testing::fixture_config("fixture_run");
    const auto r = run_pipeline(cfg);
    for (const auto& s : r.stages) EXPECT_TRUE(s.done) << s.name;
    ASSERT_TRUE(r.fit);
    EXPECT_EQ(r.fit->t0, (CalendarDate{2015, 1, 1}));
    EXPECT_NEAR(r.fit->beta0, seaice::testing::kFixtureTrend[0], 1e-3);
    EXPECT_NEAR(r.fit->beta1, seaice::testing::kFixtureTrend[1], 1e-3);
    EXPECT_NEAR(r.fit->beta2, seaice::testing::kFixtureTrend[2], 1e-3);
    for (Eigen::Index i = 0; i < 4; ++i) {
        EXPECT_NEAR(r.fit->sine(i, 0), seaice::testing::kFixtureSine[i], 1e-3);
        EXPECT_NEAR(r.fit->cosine(i, 0), seaice::testing::kFixtureCosine[i], 1e-3);
    }
    EXPECT_EQ(r.hypotheses.size(), 3u);
    EXPECT_EQ(r.phase_areas.size(), 3u);
    ASSERT_TRUE(r.dlm);
    for (const auto& f : r.files) EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / f)) << f;
    EXPECT_FALSE(fs::exists(fs::path(cfg.output_dir) / ".staging"));

    const auto json = nlohmann::json::parse(slurp(fs::path(cfg.output_dir) / "report.json"));
    EXPECT_EQ(json["stages"].size(), 4u);
    EXPECT_EQ(json["causality"]["hypotheses"].size(), 3u);
    EXPECT_EQ(json["ingest"]["SIE"]["observed"], 1096 - 5);
}

TEST(Pipeline, ByteIdenticalAcrossRunsAndThreadCounts) {
    auto a = seaice::testing::fixture_config("det_a");
    auto b = seaice::testing::fixture_config("det_b");
    b.threads = 2;
    const auto ra = run_pipeline(a);
    const auto rb = run_pipeline(b);
    ASSERT_EQ(ra.files, rb.files);
    for (const auto& f : ra.files) {
        if (f == "report.txt") continue;  // carries wall-clock timings
        EXPECT_EQ(slurp(fs::path(a.output_dir) / f), slurp(fs::path(b.output_dir) / f)) << f;
    }
}

TEST(Pipeline, TooFewReplicatesFailsInCausalityAndLeavesNoOutput) {
    auto c = seaice::testing::fixture_config("few_reps");
    c.bootstrap_reps = 50;
    try {
        (void)run_pipeline(c);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "causality");
        EXPECT_THROW(std::rethrow_exception(e.cause()), ContractError);
    }
    EXPECT_FALSE(fs::exists(fs::path(c.output_dir) / "report.json"));
    EXPECT_FALSE(fs::exists(fs::path(c.output_dir) / ".staging"));
}

TEST(Pipeline, MissingInputFailsInIngest) {
    auto c = seaice::testing::fixture_config("missing");
    c.sie_path = "/nonexistent/sie.csv";
    try {
        (void)run_pipeline(c);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "ingest");
        EXPECT_NE(std::string(e.what()).find("ingest: "), std::string::npos);
    }
}

TEST(Pipeline, VerbSelectionMarksSkippedStages) {
    const auto c = seaice::testing::fixture_config("verb_fit");
    const auto r = run_pipeline(c, StageSelection::for_verb("fit"));
    EXPECT_TRUE(r.stage("harmonic").done);
    EXPECT_FALSE(r.stage("memory").done);
    EXPECT_EQ(r.stage("causality").skipped_reason, "not requested");
    EXPECT_THROW((void)StageSelection::for_verb("plot"), ContractError);
}

TEST(EmitPlots, FileFormats) {
    const auto c = seaice::testing::fixture_config("formats");
    const auto r = run_pipeline(c, StageSelection::for_verb("diagnose"));
    const fs::path out = c.output_dir;
    const auto phase = slurp(out / "phase_va_2016.csv");
    EXPECT_EQ(phase.rfind("year,t,u,v\n", 0), 0u);
    EXPECT_NE(phase.find("\narea,"), std::string::npos);
    EXPECT_EQ(count_lines(phase), 1u + 366u + 1u);
    const auto ccf = slurp(out / "ccf_nao_velocity.csv");
    EXPECT_EQ(count_lines(ccf) - 1, 2 * c.ccf_max_lag + 1);
    EXPECT_EQ(count_lines(slurp(out / "acf_nao.csv")) - 1, c.acf_max_lag + 1);
    EXPECT_EQ(slurp(out / "skew_yearly.csv").rfind("bucket,count,mean,median,diff\n", 0), 0u);
    EXPECT_TRUE(fs::exists(out / "phase_pv_2015.svg"));
}

TEST(EmitPlots, UnwritableDirectoryIsAnIoError) {
    const auto file = fs::temp_directory_path() / "seaice_not_a_dir";
    { std::ofstream(file) << "x"; }
    PipelineReport r;
    EXPECT_THROW((void)emit_plots(r, file / "sub"), IoError);
}

TEST(Svg, UnitCircleRendersAsClosedLoopWithinOnePercent) {
    plots::Line circle{"circle", {}, {}, true};
    for (int i = 0; i < 365; ++i) {
        const double a = 2 * std::numbers::pi * i / 365.0;
        circle.x.push_back(std::cos(a));
        circle.y.push_back(std::sin(a));
    }
    const auto svg = plots::render_svg({"unit circle", "u", "v", {circle}});

    auto attr = [&](const std::string& name) {
        std::smatch m;
        EXPECT_TRUE(std::regex_search(svg, m, std::regex(name + "=\"([^\"]+)\"")));
        return std::stod(m[1]);
    };
    plots::Viewport vp;
    vp.x_min = attr("data-x-min");
    vp.x_max = attr("data-x-max");
    vp.y_min = attr("data-y-min");
    vp.y_max = attr("data-y-max");
    vp.margin = attr("data-margin");
    vp.width = attr("width");
    vp.height = attr("height");

    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, std::regex("<polygon[^>]*points=\"([^\"]+)\"")));
    std::istringstream pts(m[1]);
    std::string pair;
    double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
    std::size_t count = 0;
    while (pts >> pair) {
        const auto comma = pair.find(',');
        const double x = vp.data_x(std::stod(pair.substr(0, comma)));
        const double y = vp.data_y(std::stod(pair.substr(comma + 1)));
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
        ++count;
    }
    EXPECT_EQ(count, 365u);
    for (double v : {x0, y0}) EXPECT_NEAR(v, -1.0, 0.01);
    for (double v : {x1, y1}) EXPECT_NEAR(v, 1.0, 0.01);
}

TEST(Cli, StageTaggedFailure) {
    const auto err = fs::temp_directory_path() / "seaice_cli_err.txt";
    const std::string cmd = std::string(SEAICE_CLI_PATH) + " granger -q --config " + seaice::testing::data_path("fixture.conf") +
                            " --sie-path " + seaice::testing::data_path("sie_fixture.csv") + " --nao-path " +
                            seaice::testing::data_path("nao_fixture.txt") + " --bootstrap-reps 50 --output-dir " +
                            (fs::temp_directory_path() / "seaice_cli_out").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    EXPECT_NE(status, 0);
    EXPECT_NE(slurp(err).find("causality: "), std::string::npos) << slurp(err);
}

TEST(Cli, IngestSucceeds) {
    const auto out = fs::temp_directory_path() / "seaice_cli_ingest";
    const std::string cmd = std::string(SEAICE_CLI_PATH) + " ingest -q --sie-path " +
                            seaice::testing::data_path("sie_fixture.csv") + " --nao-path " +
                            seaice::testing::data_path("nao_fixture.txt") + " --output-dir " + out.string() + " 2>/dev/null";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(out / "report.json"));
}
