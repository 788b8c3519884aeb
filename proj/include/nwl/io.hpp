#pragma once

// Run manifests, report envelopes and atomic file output.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "nwl/errors.hpp"

namespace nwl {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunManifest {
  std::string command;
  nlohmann::json symbol = nlohmann::json::object();
  int n = 0;
  long M = 0;
  double solve_tol = 1e-10;
  double cm_tol = 1e-12;
  double mono_tol = 1e-8;
  double audit_tol = 1e-8;
  unsigned long seed = 0;
  int threads = 1;
  nlohmann::json parameters = nlohmann::json::object();
};

inline nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"symbol", m.symbol},
          {"n", m.n},
          {"M", m.M},
          {"tolerances", {{"solve", m.solve_tol}, {"cm", m.cm_tol}, {"mono", m.mono_tol}, {"audit", m.audit_tol}}},
          {"seed", m.seed},
          {"threads", m.threads},
          {"tool_version", kToolVersion},
          {"conventions",
           {{"fourier", "c(k) = (1/2pi) int f e^{-ikx} dx"},
            {"b_h", "mean(phi^2) for homogeneous symbols; the (1/2pi) * hat(phi^2)(0) reading would carry an extra 1/2pi"},
            {"kernel", "K * f = int K(x-y) f(y) dy = 2pi L f"}}},
          {"parameters", m.parameters}};
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Report envelope. Timestamps live under their own key so that reports can
/// be compared with it removed.
inline nlohmann::json make_report(const std::string& schema, const RunManifest& m, nlohmann::json result,
                                  const std::string& started) {
  return {{"schema", schema},
          {"manifest", to_json(m)},
          {"result", std::move(result)},
          {"timestamps", {{"started", started}, {"finished", utc_now()}}}};
}

inline nlohmann::json strip_timestamps(nlohmann::json report) {
  report.erase("timestamps");
  return report;
}

/// Writes to a temporary sibling and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace nwl
