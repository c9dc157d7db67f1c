#pragma once

// Hashing and run manifests. A manifest records everything needed to reproduce one command
// invocation; wall-clock timings live in a separate file so manifests stay byte-stable.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace therapycert {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
/// Throws MissingInputError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& file);

std::string software_version();

struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::string config_json; ///< resolved configuration, serialized JSON object
    std::string nominal_sha256;
    std::vector<std::pair<std::string, std::string>> inputs;  ///< (name, sha256)
    std::vector<std::pair<std::string, std::string>> outputs; ///< (name, sha256)
    std::size_t excluded_rows = 0;
    std::vector<std::string> assumptions;

    /// Hashes `file` and records it under `name` (a path relative to the output directory).
    void add_output(const std::string& name, const std::filesystem::path& file);
    void add_input(const std::string& name, const std::filesystem::path& file);
};

std::string to_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& file);

struct Timings {
    std::string command;
    std::vector<std::pair<std::string, double>> seconds;
};

void write_timings(const Timings& timings, const std::filesystem::path& file);

} // namespace therapycert
