#pragma once

#include <filesystem>
#include <string>

#include "seaice/config.hpp"

namespace seaice::testing {

inline std::string data_path(const std::string& name) { return std::string(SEAICE_TEST_DATA_DIR) + "/" + name; }

/// Fixture config with inputs filled in and a fresh output directory.
inline pipeline::PipelineConfig fixture_config(const std::string& out_name) {
    auto c = pipeline::load_config(data_path("fixture.conf"));
    c.sie_path = data_path("sie_fixture.csv");
    c.nao_path = data_path("nao_fixture.txt");
    const auto out = std::filesystem::temp_directory_path() / ("seaice_" + out_name);
    std::filesystem::remove_all(out);
    c.output_dir = out.string();
    return c;
}

// Ground truth of tests/data/make_fixture.py.
inline constexpr double kFixtureTrend[3] = {11.5, -1.5e-4, 2e-8};
inline constexpr double kFixtureSine[4] = {1.8, -0.3, 0.12, 0.05};
inline constexpr double kFixtureCosine[4] = {-4.2, 0.9, -0.2, 0.03};

}  // namespace seaice::testing
