#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace medxplain::util {

std::string base64_encode(std::string_view bytes);
/// Throws InvalidInput on characters outside the standard alphabet.
std::string base64_decode(std::string_view text);

/// 64-bit FNV-1a; stable across platforms, used for mock keys and fixture hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Replaces every `{name}` in `tmpl` by the matching value; unknown
/// placeholders are left untouched.
std::string fill_template(std::string tmpl,
                          const std::vector<std::pair<std::string, std::string>>& values);

/// Fixed-precision decimal formatting independent of the global locale.
std::string format_fixed(double v, int decimals);

}  // namespace medxplain::util
