#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rankinfer/rankcs.hpp"

namespace rankinfer::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitInternal = 4;

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

// Machine-readable result of one command. Keys serialize in sorted order, so
// equal envelopes produce identical bytes.
struct OutputEnvelope {
  std::string procedure;
  std::string input_digest;
  std::optional<std::uint64_t> seed;
  std::optional<double> coverage;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  std::string serialize() const;  // pretty-printed JSON with trailing newline
  static OutputEnvelope from_json(const nlohmann::json& j);
};

// 64-bit FNV-1a digest, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

// Shortest round-trip decimal representation.
std::string format_number(double value);

// Horizontal interval chart: one bar from L to U and one marker at the
// estimated rank per population, rows ordered by estimated rank (ties by
// index). Bars carry class="interval" and markers class="estimate".
std::string render_interval_chart(const RankConfidenceSet& cs,
                                  const std::vector<std::string>& labels, std::string_view title);

// Writes to `path + ".tmp"` and renames over `path`.
void write_atomically(const std::string& path, std::string_view contents);

}  // namespace rankinfer::cli
