#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "simforge/process.hpp"
#include "simforge/token.hpp"

namespace testing_support {

inline std::filesystem::path fixture_dir() { return std::filesystem::path(SIMFORGE_FIXTURE_DIR) / "corpus"; }

inline std::string fixture(const std::string& name) { return simforge::read_file(fixture_dir() / name); }

inline std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(fixture_dir()))
    if (e.path().extension() == ".c") out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

/// The five fixtures between 40 and 120 lines used for end-to-end attacks.
inline const std::vector<std::string>& attack_fixtures() {
  static const std::vector<std::string> names = {"sort.c", "matrix.c", "stack.c", "strings.c", "primes.c"};
  return names;
}

inline std::vector<simforge::TokenKind> kinds(const simforge::NormalizedDocument& doc) {
  std::vector<simforge::TokenKind> out;
  for (const simforge::Token& t : doc.tokens) out.push_back(t.kind);
  return out;
}

inline std::vector<std::string> entropy_lines() {
  std::vector<std::string> out;
  std::string text = simforge::read_file(std::filesystem::path(SIMFORGE_DATA_DIR) / "entropy.txt");
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (eol > pos) out.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return out;
}

}  // namespace testing_support

namespace testing_support {

/// Splits `src` into a prelude and top-level brace blocks (with the lines
/// leading up to each block), then reassembles the blocks in reverse order.
inline std::string reverse_functions(const std::string& src) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < src.size()) {
    std::size_t eol = src.find('\n', pos);
    if (eol == std::string::npos) eol = src.size();
    lines.push_back(src.substr(pos, eol - pos));
    pos = eol + 1;
  }
  std::vector<std::string> chunks;
  std::string pending;
  int depth = 0;
  bool opened = false;
  for (const std::string& l : lines) {
    pending += l + "\n";
    for (char c : l) {
      if (c == '{') {
        ++depth;
        opened = true;
      } else if (c == '}') {
        --depth;
      }
    }
    if (opened && depth == 0) {
      chunks.push_back(pending);
      pending.clear();
      opened = false;
    }
  }
  // everything before the first function stays in front
  std::string prelude;
  std::vector<std::string> funcs;
  for (const std::string& c : chunks) {
    if (funcs.empty() && c.find('(') == std::string::npos) prelude += c;
    else funcs.push_back(c);
  }
  std::string out = prelude;
  for (auto it = funcs.rbegin(); it != funcs.rend(); ++it) out += *it;
  return out + pending;
}

}  // namespace testing_support
