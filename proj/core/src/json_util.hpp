#pragma once

// Private JSON helpers shared by the library sources.

#include <json.hpp>

#include <filesystem>
#include <string>

namespace therapycert::json_util {

using json = nlohmann::ordered_json;

/// Parses text, reporting syntax errors as ConfigError with line and column.
json parse_with_lines(const std::string& text, const std::string& source);

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, const std::string& text);

} // namespace therapycert::json_util
