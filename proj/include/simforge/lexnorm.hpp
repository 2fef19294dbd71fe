#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "simforge/token.hpp"

namespace simforge {

/// A lexeme with its position, before normalization. `text` views into the
/// source passed to lex_c, so the source must outlive the result.
struct RawToken {
  TokenKind kind = TokenKind::PUNCT;
  std::string_view text;
  std::uint32_t line = 1;
  std::uint32_t col = 1;
  std::size_t offset = 0;
};

struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

struct LexResult {
  std::vector<RawToken> tokens;
  std::vector<ByteRange> comments;
  std::vector<std::string> diagnostics;
};

namespace detail {

inline const std::unordered_map<std::string_view, TokenKind>& c_keywords() {
  static const std::unordered_map<std::string_view, TokenKind> table = {
      {"int", TokenKind::TYP_INT},
      {"char", TokenKind::TYP_CHAR},
      {"short", TokenKind::TYP_SHORT},
      {"long", TokenKind::TYP_LONG},
      {"float", TokenKind::TYP_FLOAT},
      {"double", TokenKind::TYP_DOUBLE},
      {"void", TokenKind::TYP_VOID},
      {"bool", TokenKind::TYP_BOOL},
      {"_Bool", TokenKind::TYP_BOOL},
      {"signed", TokenKind::TYP_SIGNED},
      {"unsigned", TokenKind::TYP_UNSIGNED},
      {"_Complex", TokenKind::TYP_COMPLEX},
      {"_Imaginary", TokenKind::TYP_IMAGINARY},
      {"true", TokenKind::BOOL},
      {"false", TokenKind::BOOL},
      {"return", TokenKind::RET},
      {"if", TokenKind::IF},
      {"else", TokenKind::ELSE},
      {"for", TokenKind::FOR},
      {"while", TokenKind::WHILE},
      {"do", TokenKind::DO},
      {"switch", TokenKind::SWITCH},
      {"case", TokenKind::CASE},
      {"default", TokenKind::DEFAULT},
      {"break", TokenKind::BREAK},
      {"continue", TokenKind::CONTINUE},
      {"goto", TokenKind::GOTO},
      {"sizeof", TokenKind::SIZEOF},
      {"struct", TokenKind::STRUCT},
      {"union", TokenKind::UNION},
      {"enum", TokenKind::ENUM},
      {"typedef", TokenKind::TYPEDEF},
      {"const", TokenKind::CONST},
      {"volatile", TokenKind::VOLATILE},
      {"static", TokenKind::STATIC},
      {"extern", TokenKind::EXTERN},
      {"auto", TokenKind::AUTO},
      {"register", TokenKind::REGISTER},
      {"inline", TokenKind::INLINE},
      {"restrict", TokenKind::RESTRICT},
  };
  return table;
}

// Longest first within each leading character.
inline constexpr std::array<std::string_view, 47> c_operators = {
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##", "{",
    "}",   "[",   "]",   "(",  ")",  ";",  ":",  ",",  ".",  "?",  "~",  "!",
    "+",   "-",   "*",   "/",  "%",  "<",  ">",  "^",  "|",  "&",  "="};

inline TokenKind punct_kind(std::string_view lexeme) {
  if (lexeme.size() == 1) {
    switch (lexeme[0]) {
      case '=': return TokenKind::EQ;
      case ';': return TokenKind::SEMI;
      case ',': return TokenKind::COMMA;
      case '(': return TokenKind::LPAREN;
      case ')': return TokenKind::RPAREN;
      case '{': return TokenKind::LBRACE;
      case '}': return TokenKind::RBRACE;
      case '[': return TokenKind::LBRACKET;
      case ']': return TokenKind::RBRACKET;
      default: break;
    }
  }
  return TokenKind::PUNCT;
}

inline bool ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}
inline bool ident_char(unsigned char c) { return ident_start(c) || std::isdigit(c); }

}  // namespace detail

/// Lexes C-family source into raw tokens. Never fails: unterminated strings,
/// character constants and block comments produce a diagnostic and lexing
/// resumes on the next line.
inline LexResult lex_c(std::string_view src) {
  LexResult out;
  std::size_t i = 0;
  std::uint32_t line = 1;
  std::size_t line_start = 0;
  const std::size_t n = src.size();

  auto col_of = [&](std::size_t pos) { return static_cast<std::uint32_t>(pos - line_start + 1); };
  auto newline_at = [&](std::size_t pos) {
    ++line;
    line_start = pos + 1;
  };
  auto skip_to_eol = [&](std::size_t pos) {
    while (pos < n && src[pos] != '\n') ++pos;
    return pos;
  };
  auto push = [&](TokenKind kind, std::size_t begin, std::size_t end) {
    out.tokens.push_back({kind, src.substr(begin, end - begin), line, col_of(begin), begin});
  };

  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(src[i]);
    if (c == '\n') {
      newline_at(i);
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
      ++i;
      continue;
    }
    if (c == '\\' && i + 1 < n && (src[i + 1] == '\n' || src[i + 1] == '\r')) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      const std::size_t end = skip_to_eol(i);
      out.comments.push_back({i, end});
      i = end;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      const std::size_t close = src.find("*/", i + 2);
      if (close == std::string_view::npos) {
        out.diagnostics.push_back("line " + std::to_string(line) + ": unterminated block comment");
        const std::size_t end = skip_to_eol(i);
        out.comments.push_back({i, end});
        i = end;
        continue;
      }
      for (std::size_t p = i; p < close; ++p)
        if (src[p] == '\n') newline_at(p);
      out.comments.push_back({i, close + 2});
      i = close + 2;
      continue;
    }

    std::size_t quote_at = std::string_view::npos;
    std::size_t j = i;
    if (detail::ident_start(c)) {
      while (j < n && detail::ident_char(static_cast<unsigned char>(src[j]))) ++j;
      const std::string_view word = src.substr(i, j - i);
      if (j < n && (src[j] == '"' || src[j] == '\'') &&
          (word == "L" || word == "u" || word == "U" || word == "u8")) {
        quote_at = j;
      } else {
        const auto& kw = detail::c_keywords();
        const auto it = kw.find(word);
        push(it == kw.end() ? TokenKind::ID : it->second, i, j);
        i = j;
        continue;
      }
    }
    if (c == '"' || c == '\'' || quote_at != std::string_view::npos) {
      const std::size_t q = quote_at == std::string_view::npos ? i : quote_at;
      const char delim = src[q];
      std::size_t p = q + 1;
      bool closed = false;
      while (p < n && src[p] != '\n') {
        if (src[p] == '\\' && p + 1 < n) {
          if (src[p + 1] == '\n') newline_at(p + 1);
          p += 2;
          continue;
        }
        if (src[p] == delim) {
          closed = true;
          ++p;
          break;
        }
        ++p;
      }
      if (!closed)
        out.diagnostics.push_back("line " + std::to_string(line) + ": unterminated " +
                                  (delim == '"' ? "string literal" : "character constant"));
      push(delim == '"' ? TokenKind::STR : TokenKind::CHAR, i, p);
      i = p;
      continue;
    }
    if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      j = i + 1;
      while (j < n) {
        const unsigned char d = static_cast<unsigned char>(src[j]);
        if ((d == '+' || d == '-') && (src[j - 1] == 'e' || src[j - 1] == 'E' || src[j - 1] == 'p' ||
                                       src[j - 1] == 'P')) {
          ++j;
          continue;
        }
        if (std::isalnum(d) || d == '.' || d == '_' || d == '\'') {
          ++j;
          continue;
        }
        break;
      }
      push(TokenKind::NUM, i, j);
      i = j;
      continue;
    }
    bool matched = false;
    for (std::string_view op : detail::c_operators) {
      if (src.substr(i, op.size()) == op) {
        push(detail::punct_kind(op), i, i + op.size());
        i += op.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      // '#', '@', stray bytes
      push(TokenKind::PUNCT, i, i + 1);
      ++i;
    }
  }
  return out;
}

/// Number of lines containing at least one non-whitespace byte.
inline std::size_t count_nonblank_lines(std::string_view src) {
  std::size_t count = 0;
  bool seen = false;
  for (char ch : src) {
    if (ch == '\n') {
      count += seen;
      seen = false;
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      seen = true;
    }
  }
  return count + seen;
}

inline Token normalize_token(const RawToken& raw) {
  Token tok{raw.kind, 0, raw.line, raw.col};
  if (raw.kind == TokenKind::PUNCT) tok.code = fnv1a32(raw.text);
  return tok;
}

/// Tokenizes C source into a whitespace-, comment- and identifier-insensitive
/// stream.
inline NormalizedDocument tokenize_c(std::string_view source, std::string doc_id = {}) {
  NormalizedDocument doc;
  doc.doc_id = std::move(doc_id);
  doc.source_digest = content_digest(source);
  doc.line_count = count_nonblank_lines(source);
  LexResult lexed = lex_c(source);
  doc.tokens.reserve(lexed.tokens.size());
  for (const RawToken& raw : lexed.tokens) doc.tokens.push_back(normalize_token(raw));
  doc.diagnostics = std::move(lexed.diagnostics);
  return doc;
}

namespace detail {

inline bool is_register_name(std::string_view name) {
  static const std::vector<std::string_view> exact = {
      "rax", "rbx", "rcx", "rdx", "rsi", "rdi", "rbp", "rsp", "eax", "ebx", "ecx", "edx",
      "esi", "edi", "ebp", "esp", "ax",  "bx",  "cx",  "dx",  "si",  "di",  "bp",  "sp",
      "al",  "bl",  "cl",  "dl",  "ah",  "bh",  "ch",  "dh",  "sil", "dil", "bpl", "spl",
      "rip", "eip", "cs",  "ds",  "es",  "fs",  "gs",  "ss",  "sp",  "lr",  "pc",  "fp",
      "xzr", "wzr"};
  if (std::find(exact.begin(), exact.end(), name) != exact.end()) return true;
  auto digits_after = [&](std::size_t from) {
    if (from >= name.size()) return false;
    std::size_t p = from;
    while (p < name.size() && std::isdigit(static_cast<unsigned char>(name[p]))) ++p;
    if (p == from) return false;
    // r8d, r10w, r11b
    return p == name.size() || (p + 1 == name.size() && (name[p] == 'd' || name[p] == 'w' || name[p] == 'b'));
  };
  if (name.size() >= 2 && (name[0] == 'r' || name[0] == 'x' || name[0] == 'w' || name[0] == 'v' ||
                           name[0] == 'q' || name[0] == 'd' || name[0] == 's'))
    if (digits_after(1)) return true;
  for (std::string_view prefix : {"xmm", "ymm", "zmm", "st"})
    if (name.substr(0, prefix.size()) == prefix && digits_after(prefix.size())) return true;
  return false;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string_view strip_asm_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (in_string) continue;
    if (c == '#' || c == ';') return line.substr(0, i);
    if (c == '/' && i + 1 < line.size() && line[i + 1] == '/') return line.substr(0, i);
  }
  return line;
}

}  // namespace detail

/// True for assembler lines that carry build metadata rather than code.
inline bool is_build_metadata_directive(std::string_view line) {
  const std::string_view t = detail::trim(line);
  for (std::string_view d : {".file", ".ident", ".loc"}) {
    if (t.substr(0, d.size()) == d &&
        (t.size() == d.size() || std::isspace(static_cast<unsigned char>(t[d.size()]))))
      return true;
  }
  return false;
}

/// Tokenizes compiler-emitted assembly. Comment lines and `.file`/`.ident`/
/// `.loc` directives are dropped; commas are separators and produce no token.
inline NormalizedDocument tokenize_asm(std::string_view source, std::string doc_id = {}) {
  NormalizedDocument doc;
  doc.doc_id = std::move(doc_id);
  doc.source_digest = content_digest(source);

  std::uint32_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t eol = source.find('\n', pos);
    if (eol == std::string_view::npos) eol = source.size();
    const std::string_view raw_line = source.substr(pos, eol - pos);
    ++line_no;
    const std::size_t line_begin = pos;
    pos = eol + 1;

    if (is_build_metadata_directive(raw_line)) continue;
    const std::string_view body = detail::strip_asm_comment(raw_line);
    if (detail::trim(body).empty()) {
      if (eol == source.size()) break;
      continue;
    }
    ++doc.line_count;

    bool expect_mnemonic = true;
    std::size_t i = 0;
    auto emit = [&](TokenKind kind, std::string_view text, std::size_t at, bool keep_spelling) {
      Token tok{kind, keep_spelling ? fnv1a32(text) : 0u, line_no,
                static_cast<std::uint32_t>(at - line_begin + 1)};
      doc.tokens.push_back(tok);
    };
    while (i < body.size()) {
      const unsigned char c = static_cast<unsigned char>(body[i]);
      if (std::isspace(c) || c == ',') {
        ++i;
        continue;
      }
      const std::size_t at = line_begin + i;
      if (c == '"') {
        std::size_t j = i + 1;
        while (j < body.size() && body[j] != '"') j += (body[j] == '\\') ? 2 : 1;
        j = std::min(j + 1, body.size());
        emit(TokenKind::STR, body.substr(i, j - i), at, false);
        i = j;
        continue;
      }
      if (c == '%') {
        std::size_t j = i + 1;
        while (j < body.size() && detail::ident_char(static_cast<unsigned char>(body[j]))) ++j;
        emit(TokenKind::REG, body.substr(i + 1, j - i - 1), at, true);
        i = j;
        continue;
      }
      if (c == '$' || std::isdigit(c) ||
          (c == '-' && i + 1 < body.size() && std::isdigit(static_cast<unsigned char>(body[i + 1])))) {
        std::size_t j = i + 1;
        while (j < body.size() && (std::isalnum(static_cast<unsigned char>(body[j])) || body[j] == '_' ||
                                   body[j] == '.' || body[j] == '$'))
          ++j;
        const std::string_view text = body.substr(i, j - i);
        // `$sym` is a symbolic immediate, not a number
        if (c == '$' && text.size() > 1 && !std::isdigit(static_cast<unsigned char>(text[1])) && text[1] != '-')
          emit(text.size() > 2 && text[1] == '.' && text[2] == 'L' ? TokenKind::LABEL : TokenKind::SYMBOL, text,
               at, false);
        else
          emit(TokenKind::NUM, text, at, false);
        i = j;
        continue;
      }
      if (detail::ident_start(c) || c == '.') {
        std::size_t j = i + 1;
        while (j < body.size() &&
               (detail::ident_char(static_cast<unsigned char>(body[j])) || body[j] == '.' || body[j] == '@'))
          ++j;
        const std::string_view word = body.substr(i, j - i);
        const bool is_def = j < body.size() && body[j] == ':';
        if (is_def) {
          emit(TokenKind::LABEL_DEF, word, at, false);
          i = j + 1;
          continue;
        }
        if (expect_mnemonic) {
          emit(word.front() == '.' ? TokenKind::DIRECTIVE : TokenKind::MNEMONIC, word, at, true);
          expect_mnemonic = false;
        } else if (detail::is_register_name(word)) {
          emit(TokenKind::REG, word, at, true);
        } else if (word.size() > 1 && word[0] == '.' && word[1] == 'L') {
          emit(TokenKind::LABEL, word, at, false);
        } else {
          emit(TokenKind::SYMBOL, word, at, false);
        }
        i = j;
        continue;
      }
      emit(TokenKind::PUNCT, body.substr(i, 1), at, true);
      ++i;
    }
    if (eol == source.size()) break;
  }
  return doc;
}

}  // namespace simforge
