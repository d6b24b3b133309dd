#include "stockpile/manifest.hpp"

#include "stockpile/io.hpp"

#include <filesystem>
#include <fstream>

#ifndef STOCKPILE_VERSION
#define STOCKPILE_VERSION "0.1.0"
#endif

namespace stockpile {

namespace fs = std::filesystem;

const char* version_string() { return STOCKPILE_VERSION; }

void RunManifest::set_grid(const Grid2D& g) {
    grid = {{"N", g.N}, {"M", g.M}, {"k_min", g.k_min}, {"k_max", g.k_max}, {"z_min", g.z_min}, {"z_max", g.z_max}};
}

void RunManifest::add_output(const std::string& out_dir, const std::string& rel) {
    const fs::path p = fs::path(out_dir) / rel;
    outputs.push_back({rel, sha256_file(p.string()), fs::file_size(p)});
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json files = nlohmann::json::array();
    for (const OutputFile& f : outputs) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return {{"command", command}, {"version", version}, {"config", config_text}, {"grid", grid},
            {"settings", settings}, {"seeds", seeds}, {"timings", timings}, {"outputs", files},
            {"results", results}};
}

void RunManifest::write(const std::string& out_dir) const {
    const fs::path p = fs::path(out_dir) / "manifest.json";
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    out << to_json().dump(2) << "\n";
    if (!out) throw IoError("write failed for " + p.string());
}

bool verify_manifest(const std::string& out_dir, std::string* problem) {
    auto fail = [problem](const std::string& why) {
        if (problem) *problem = why;
        return false;
    };
    std::ifstream in(fs::path(out_dir) / "manifest.json");
    if (!in) return fail("manifest.json missing");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        return fail(std::string("manifest.json unreadable: ") + e.what());
    }
    for (const auto& f : j.at("outputs")) {
        const fs::path p = fs::path(out_dir) / f.at("path").get<std::string>();
        if (!fs::exists(p)) return fail("missing output " + p.string());
        if (sha256_file(p.string()) != f.at("sha256").get<std::string>()) return fail("checksum mismatch " + p.string());
    }
    return true;
}

}  // namespace stockpile
