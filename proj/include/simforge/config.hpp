#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "simforge/lexnorm.hpp"
#include "simforge/process.hpp"

namespace simforge {

/// `key = value` lines; `#` starts a comment. Later keys replace earlier ones.
inline std::map<std::string, std::string> parse_config(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string_view key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
    out[std::string(key)] = std::string(detail::trim(line.substr(eq + 1)));
  }
  return out;
}

inline std::map<std::string, std::string> load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

/// SIMFORGE_ followed by the key upper-cased with dashes as underscores.
inline std::string env_name(std::string_view key) {
  std::string name = "SIMFORGE_";
  for (char c : key) name.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return name;
}

/// Layered settings: environment over command line over config file.
class Settings {
 public:
  explicit Settings(std::map<std::string, std::string> file = {}) : file_(std::move(file)) {}

  void set_cli(const std::string& key, std::string value) { cli_[key] = std::move(value); }

  std::optional<std::string> get(const std::string& key) const {
    if (const char* env = std::getenv(env_name(key).c_str()); env != nullptr && *env != '\0') return env;
    if (auto it = cli_.find(key); it != cli_.end()) return it->second;
    if (auto it = file_.find(key); it != file_.end()) return it->second;
    return std::nullopt;
  }

  std::string get_or(const std::string& key, std::string fallback) const { return get(key).value_or(fallback); }

  double number(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::size_t used = 0;
    double out = 0;
    try {
      out = std::stod(*v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v->size()) throw std::invalid_argument(key + ": expected a number, got '" + *v + "'");
    return out;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
      if (!v->empty() && v->front() != '-') out = std::stoull(*v, &used, 0);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v->size())
      throw std::invalid_argument(key + ": expected a non-negative integer, got '" + *v + "'");
    return out;
  }

 private:
  std::map<std::string, std::string> file_;
  std::map<std::string, std::string> cli_;
};

}  // namespace simforge
