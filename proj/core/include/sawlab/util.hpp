#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sawlab {

/// Shortest round-trip decimal form of a double (std::to_chars). Every file
/// format in the project (CSV, report JSON via nlohmann) must reproduce the
/// exact bit pattern on read-back, so all double formatting funnels through
/// here.
std::string format_double(double v);

/// FNV-1a 64-bit over a byte string; used for config/model/checkpoint hashes.
std::uint64_t fnv1a(std::string_view bytes);

/// Hash rendered as fixed-width hex.
std::string hash_hex(std::string_view bytes);

/// Minimal CSV assembly: fields are joined with commas; strings containing
/// commas/quotes/newlines are quoted.
std::string csv_row(const std::vector<std::string>& fields);

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace sawlab
