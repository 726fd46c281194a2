#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rankinfer/cli.hpp"
#include "rankinfer/errors.hpp"

namespace rankinfer::cli {

nlohmann::json OutputEnvelope::to_json() const {
  nlohmann::json j;
  j["procedure"] = procedure;
  j["input_digest"] = input_digest;
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  j["coverage"] = coverage ? nlohmann::json(*coverage) : nlohmann::json(nullptr);
  j["results"] = results;
  j["warnings"] = warnings;
  return j;
}

std::string OutputEnvelope::serialize() const { return to_json().dump(2) + "\n"; }

OutputEnvelope OutputEnvelope::from_json(const nlohmann::json& j) {
  OutputEnvelope e;
  e.procedure = j.at("procedure").get<std::string>();
  e.input_digest = j.at("input_digest").get<std::string>();
  if (!j.at("seed").is_null()) e.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("coverage").is_null()) e.coverage = j.at("coverage").get<double>();
  e.results = j.at("results");
  e.warnings = j.at("warnings").get<std::vector<std::string>>();
  return e;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_atomically(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot open '" + tmp + "' for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw InputError("failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move output into place at '" + path + "'");
  }
}

}  // namespace rankinfer::cli
