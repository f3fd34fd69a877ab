#include "loadgan/kv_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "loadgan/error.hpp"

namespace loadgan::config {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto sep = line.find_first_of("=:");
    if (sep == std::string_view::npos) {
      fail(ErrorCode::BadConfig, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, sep));
    if (key.empty()) {
      fail(ErrorCode::BadConfig, "line " + std::to_string(line_no) + ": empty key");
    }
    out[std::string(key)] = std::string(trim(line.substr(sep + 1)));
  }
  return out;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_key_values(buffer.str());
}

std::string get_string(const KeyValues& values, const std::string& key, const std::string& fallback) {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double get_double(const KeyValues& values, const std::string& key, double fallback) {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  double v = 0.0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(ErrorCode::BadConfig, "key '" + key + "' expects a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t get_u64(const KeyValues& values, const std::string& key, std::uint64_t fallback) {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorCode::BadConfig, "key '" + key + "' expects a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::size_t get_size(const KeyValues& values, const std::string& key, std::size_t fallback) {
  return static_cast<std::size_t>(get_u64(values, key, fallback));
}

}  // namespace loadgan::config
