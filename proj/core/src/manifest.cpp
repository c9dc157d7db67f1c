#include "therapycert/manifest.hpp"

#include "therapycert/errors.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

namespace therapycert {

namespace {

std::string to_hex(const unsigned char* data, unsigned int len) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kDigits[data[i] >> 4]);
        out.push_back(kDigits[data[i] & 0x0f]);
    }
    return out;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw MissingInputError("cannot write " + file.string());
    }
    out << text;
}

} // namespace

std::string sha256_hex(std::string_view bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    return to_hex(digest.data(), len);
}

std::string sha256_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw MissingInputError("cannot read " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

std::string software_version() { return THERAPYCERT_VERSION_STRING; }

void RunManifest::add_output(const std::string& name, const std::filesystem::path& file) {
    outputs.emplace_back(name, sha256_file(file));
}

void RunManifest::add_input(const std::string& name, const std::filesystem::path& file) {
    inputs.emplace_back(name, sha256_file(file));
}

std::string to_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["software_version"] = software_version();
    j["seed"] = m.seed;
    j["nominal_parameters_sha256"] = m.nominal_sha256;
    j["config"] = m.config_json.empty() ? nlohmann::ordered_json::object()
                                        : nlohmann::ordered_json::parse(m.config_json);
    auto files = [](const auto& list) {
        nlohmann::ordered_json o = nlohmann::ordered_json::object();
        for (const auto& [name, hash] : list) {
            o[name] = hash;
        }
        return o;
    };
    j["inputs"] = files(m.inputs);
    j["outputs"] = files(m.outputs);
    j["excluded_rows"] = m.excluded_rows;
    j["assumptions"] = m.assumptions;
    return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& file) {
    write_text(file, to_json(manifest));
}

void write_timings(const Timings& timings, const std::filesystem::path& file) {
    nlohmann::ordered_json j;
    j["command"] = timings.command;
    nlohmann::ordered_json s = nlohmann::ordered_json::object();
    for (const auto& [phase, secs] : timings.seconds) {
        s[phase] = secs;
    }
    j["seconds"] = s;
    write_text(file, j.dump(2) + "\n");
}

} // namespace therapycert
