#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dirate {

inline constexpr const char* kToolVersion = "0.1.0";

/// 9 significant digits; fixed notation for |v| in [1e-3, 1e6), scientific
/// otherwise. Stable across runs for golden-file diffs.
std::string format_g9(double v);

/// The double that format_g9's output parses back to.
double round9(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);
std::string hash_file(const std::filesystem::path& path);

/// Reproducibility sidecar written next to every CLI output file.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, hash
  std::vector<std::pair<std::string, std::string>> outputs;  // path, hash
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  double wall_ms = 0.0;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace dirate
