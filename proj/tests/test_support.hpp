#pragma once

#include "therapycert/config.hpp"
#include "therapycert/dynamics.hpp"

#include <filesystem>
#include <string>

namespace therapycert::testing {

inline const NominalParameterSet& nominal() {
    static const NominalParameterSet set =
        NominalParameterSet::load(default_data_dir() / "nominal_parameters.json");
    return set;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("therapycert_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace therapycert::testing
