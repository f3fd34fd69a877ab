#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace loadgan::config {

using KeyValues = std::map<std::string, std::string>;

/// `key = value` or `key: value` per line; `#` starts a comment.
KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::filesystem::path& path);

std::string get_string(const KeyValues& values, const std::string& key, const std::string& fallback);
double get_double(const KeyValues& values, const std::string& key, double fallback);
std::size_t get_size(const KeyValues& values, const std::string& key, std::size_t fallback);
std::uint64_t get_u64(const KeyValues& values, const std::string& key, std::uint64_t fallback);

}  // namespace loadgan::config
