#pragma once

// Run records: every invocation writes its datasets plus run.json, which holds the resolved
// config, tool version, wall time and a SHA-256 digest per file. The embedded config is a
// complete config document, so `pjj run --config run.json` repeats the run.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "pjj/harness/config.hpp"
#include "pjj/harness/figures.hpp"
#include "pjj/harness/format.hpp"
#include "pjj/version.hpp"

namespace pjj::harness {

inline constexpr const char* output_dir_env = "PJJ_OUTPUT_DIR";
inline constexpr const char* default_output_dir = "pjj-output";

inline std::filesystem::path default_output_path() {
  if (const char* env = std::getenv(output_dir_env); env && *env) return env;
  return default_output_dir;
}

struct RunRecord {
  json config;
  std::string version;
  double wall_time_s = 0.0;
  json files = json::array();
  json summary;
  std::vector<std::string> warnings;
  int exit_code = 0;

  json to_json() const {
    return {{"tool", "pjj"},          {"version", version},   {"deterministic", true},
            {"config", config},       {"wall_time_s", wall_time_s}, {"files", files},
            {"summary", summary},     {"warnings", warnings}, {"exit_code", exit_code}};
  }
};

/// Write every output file and run.json into `dir`; returns the record.
inline RunRecord persist(const RunConfig& rc, const RunOutput& out, const std::filesystem::path& dir, double wall_time_s) {
  RunRecord rec;
  rec.config = rc.to_json();
  rec.version = std::string(version);
  rec.wall_time_s = wall_time_s;
  rec.summary = out.summary;
  rec.warnings = out.warnings;
  rec.exit_code = out.exit_code;
  for (const auto& f : out.files) {
    write_atomic(dir / f.name, f.content);
    rec.files.push_back({{"name", f.name}, {"bytes", f.content.size()}, {"sha256", sha256_hex(f.content)}});
  }
  write_atomic(dir / "run.json", rec.to_json().dump(2) + "\n");
  return rec;
}

/// Run and persist, timing the computation only.
inline RunRecord execute(const RunConfig& rc, const std::filesystem::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunOutput out = run_any(rc);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return persist(rc, out, dir, wall);
}

/// A run record is accepted wherever a config is: its "config" member is the document.
inline ConfigDocument unwrap_record(const ConfigDocument& doc) {
  if (!doc.data.contains("config") || doc.data.contains("command")) return doc;
  ConfigDocument inner;
  inner.origin = doc.origin;
  inner.data = doc.data.at("config");
  for (const auto& [path, line] : doc.lines) {
    if (path.rfind("config.", 0) == 0) inner.lines[path.substr(7)] = line;
  }
  return inner;
}

} // namespace pjj::harness
