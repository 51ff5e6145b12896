#include "dirate/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dirate/error.hpp"

namespace dirate {

std::string format_g9(double v) {
  if (v == 0.0) return "0";
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  double a = std::abs(v);
  char buf[64];
  if (a >= 1e-3 && a < 1e6) {
    int exponent = static_cast<int>(std::floor(std::log10(a)));
    // rounding can carry across a power of ten (0.99999... -> 1.0);
    // reformat once so the digit count stays at nine
    for (int pass = 0; pass < 2; ++pass) {
      int decimals = std::max(0, 8 - exponent);
      std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
      double back = std::abs(std::strtod(buf, nullptr));
      int seen = back == 0.0 ? exponent
                             : static_cast<int>(std::floor(std::log10(back)));
      if (seen == exponent) break;
      exponent = seen;
    }
  } else {
    std::snprintf(buf, sizeof buf, "%.8e", v);
  }
  return buf;
}

double round9(double v) {
  std::string s = format_g9(v);
  if (s == "nan" || s == "inf" || s == "-inf") return v;
  return std::strtod(s.c_str(), nullptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for hashing");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fnv1a64_hex(buffer.str());
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["command"] = manifest.command;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const auto& [p, h] : manifest.inputs) inputs[p] = h;
  doc["inputs"] = std::move(inputs);
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  for (const auto& [p, h] : manifest.outputs) outputs[p] = h;
  doc["outputs"] = std::move(outputs);
  if (manifest.has_seed) doc["seed"] = manifest.seed;
  doc["tool_version"] = manifest.tool_version;
  doc["wall_ms"] = manifest.wall_ms;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write manifest '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace dirate
