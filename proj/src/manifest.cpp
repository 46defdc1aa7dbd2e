#include "latgeo/manifest.hpp"

#include <chrono>
#include <ctime>

namespace latgeo {

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest) {
    Json inputs = Json::array();
    for (const auto& p : manifest.inputs)
        inputs.push_back({{"path", p.string()}, {"digest", file_digest(p)}});
    Json j = {{"command", manifest.command},
              {"config", manifest.config},
              {"seed", manifest.seed},
              {"inputs", inputs},
              {"outputs", manifest.outputs},
              {"tool_version", kToolVersion},
              {"started_at", manifest.started_at},
              {"finished_at", manifest.finished_at}};
    write_text_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

} // namespace latgeo
