#pragma once

#include "stockpile/grid.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace stockpile {

/// Build version, `git describe` style when available.
const char* version_string();

struct OutputFile {
    std::string path;  ///< relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

/// Provenance record written next to every command's outputs.
struct RunManifest {
    std::string command;
    std::string version = version_string();
    std::string config_text;
    nlohmann::json grid;
    nlohmann::json settings = nlohmann::json::object();
    std::vector<std::uint64_t> seeds;
    nlohmann::json timings = nlohmann::json::object();  ///< phase -> seconds
    std::vector<OutputFile> outputs;
    nlohmann::json results = nlohmann::json::object();

    void set_grid(const Grid2D& g);
    /// Hashes `out_dir/rel` and records it.
    void add_output(const std::string& out_dir, const std::string& rel);
    nlohmann::json to_json() const;
    /// Writes out_dir/manifest.json.
    void write(const std::string& out_dir) const;
};

/// Checks that every listed output exists with the recorded checksum.
bool verify_manifest(const std::string& out_dir, std::string* problem = nullptr);

/// Wall-clock stopwatch for manifest timings.
class PhaseTimer {
public:
    PhaseTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace stockpile
