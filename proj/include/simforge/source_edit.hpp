#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "simforge/lexnorm.hpp"

namespace simforge {

/// Source text as a list of lines, preserving whether it ended in a newline.
struct SourceLines {
  std::vector<std::string> lines;
  bool trailing_newline = true;

  static SourceLines split(std::string_view text) {
    SourceLines s;
    s.trailing_newline = text.empty() || text.back() == '\n';
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      s.lines.emplace_back(text.substr(pos, eol - pos));
      pos = eol + 1;
    }
    return s;
  }

  std::string join() const {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      out += lines[i];
      if (i + 1 < lines.size() || trailing_newline) out += '\n';
    }
    return out;
  }

  std::size_t size() const { return lines.size(); }
};

inline std::size_t line_count(std::string_view text) { return SourceLines::split(text).size(); }

/// Line boundaries where a new statement may go: after line `n` (1-based),
/// inside a function body, at brace depth >= 1, between complete
/// statements, never inside a comment, a parenthesized header, an aggregate
/// initializer or a struct body, and never in front of `else` or the
/// `while` of a do-loop.
inline std::vector<std::size_t> insertion_sites(std::string_view text) {
  enum class Brace { Function, Block, Aggregate };
  struct Open {
    Brace kind;
    bool after_do;
  };
  const LexResult lexed = lex_c(text);

  std::vector<std::size_t> line_end;  // byte offset of each line's '\n'
  for (std::size_t i = 0; i < text.size(); ++i)
    if (text[i] == '\n') line_end.push_back(i);
  if (text.empty() || text.back() != '\n') line_end.push_back(text.size());

  // Drop preprocessor lines; they neither open statements nor end them.
  std::vector<const RawToken*> toks;
  std::unordered_set<std::uint32_t> directive_lines;
  for (std::size_t i = 0; i < lexed.tokens.size(); ++i) {
    const RawToken& t = lexed.tokens[i];
    const bool first_on_line = i == 0 || lexed.tokens[i - 1].line != t.line;
    if (first_on_line && t.text == "#") directive_lines.insert(t.line);
    if (directive_lines.contains(t.line)) continue;
    toks.push_back(&t);
  }

  auto in_comment = [&](std::size_t offset) {
    return std::any_of(lexed.comments.begin(), lexed.comments.end(),
                       [&](const ByteRange& c) { return c.begin < offset && offset < c.end; });
  };

  std::vector<std::size_t> sites;
  std::vector<Open> stack;
  int paren = 0;
  const RawToken* prev = nullptr;
  bool last_closed_do = false;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const RawToken& t = *toks[i];
    switch (t.kind) {
      case TokenKind::LPAREN:
      case TokenKind::LBRACKET: ++paren; break;
      case TokenKind::RPAREN:
      case TokenKind::RBRACKET: paren = std::max(0, paren - 1); break;
      case TokenKind::LBRACE: {
        Brace kind = Brace::Aggregate;
        const TokenKind pk = prev ? prev->kind : TokenKind::SEMI;
        const bool in_aggregate = std::any_of(stack.begin(), stack.end(), [](const Open& o) { return o.kind == Brace::Aggregate; });
        if (paren == 0 && !in_aggregate) {
          if (stack.empty()) {
            if (pk == TokenKind::RPAREN) kind = Brace::Function;
          } else if (pk == TokenKind::RPAREN || pk == TokenKind::ELSE || pk == TokenKind::DO ||
                     pk == TokenKind::LBRACE || pk == TokenKind::RBRACE || pk == TokenKind::SEMI ||
                     (prev && prev->text == ":")) {
            kind = Brace::Block;
          }
        }
        stack.push_back({kind, pk == TokenKind::DO});
        break;
      }
      case TokenKind::RBRACE:
        last_closed_do = !stack.empty() && stack.back().after_do;
        if (!stack.empty()) stack.pop_back();
        break;
      default: break;
    }
    prev = &t;
    const bool line_ends = i + 1 == toks.size() || toks[i + 1]->line != t.line;
    if (!line_ends) continue;
    if (stack.empty() || paren != 0) continue;
    if (std::any_of(stack.begin(), stack.end(), [](const Open& o) { return o.kind == Brace::Aggregate; })) continue;
    if (stack.front().kind != Brace::Function) continue;
    if (t.kind != TokenKind::SEMI && t.kind != TokenKind::LBRACE && t.kind != TokenKind::RBRACE) continue;
    if (i + 1 < toks.size()) {
      const TokenKind next = toks[i + 1]->kind;
      if (next == TokenKind::ELSE) continue;
      if (next == TokenKind::WHILE && t.kind == TokenKind::RBRACE && last_closed_do) continue;
    }
    // the boundary must not be swallowed by a comment or a line splice
    const std::size_t line = t.line;
    const std::size_t end = line_end[line - 1];
    const bool blocked = in_comment(end) || (end > 0 && text[end - 1] == '\\');
    if (!blocked) sites.push_back(line);
  }
  return sites;
}

inline const std::unordered_set<std::string_view>& side_effect_calls() {
  static const std::unordered_set<std::string_view> names = {
      "printf", "fprintf", "sprintf", "snprintf", "vprintf", "vfprintf", "dprintf", "puts",   "fputs",
      "putchar", "fputc",  "putc",    "perror",   "fwrite",  "write",    "scanf",   "fscanf", "sscanf",
      "getchar", "getc",   "fgetc",   "gets",     "fgets",   "fread",    "read",    "exit",   "abort",
      "_exit",   "free",   "system",  "fflush",   "fclose",  "fopen",    "remove",  "rename", "assert"};
  return names;
}

/// Syntactic pre-filter for mutation candidates: a complete statement (ends
/// in `;`, or is a balanced `{ ... }` unit), not a print/IO/exit call, not
/// control flow and not a preprocessor line.
inline bool is_selectable(std::string_view line) {
  const LexResult lexed = lex_c(line);
  const auto& toks = lexed.tokens;
  if (toks.empty() || !lexed.diagnostics.empty()) return false;
  switch (toks.front().kind) {
    case TokenKind::RET:
    case TokenKind::BREAK:
    case TokenKind::CONTINUE:
    case TokenKind::GOTO:
    case TokenKind::CASE:
    case TokenKind::DEFAULT:
    case TokenKind::IF:
    case TokenKind::ELSE:
    case TokenKind::FOR:
    case TokenKind::WHILE:
    case TokenKind::DO:
    case TokenKind::SWITCH:
    case TokenKind::RBRACE:
      return false;
    default: break;
  }
  if (toks.front().text == "#") return false;
  int depth = 0;
  for (const RawToken& t : toks) {
    if (t.kind == TokenKind::LPAREN || t.kind == TokenKind::LBRACKET || t.kind == TokenKind::LBRACE) ++depth;
    if (t.kind == TokenKind::RPAREN || t.kind == TokenKind::RBRACKET || t.kind == TokenKind::RBRACE)
      if (--depth < 0) return false;
    if (t.kind == TokenKind::ID && side_effect_calls().contains(t.text)) return false;
    // control flow anywhere in the line, e.g. `x = 1; return x;`
    if (t.kind == TokenKind::RET || t.kind == TokenKind::GOTO || t.kind == TokenKind::BREAK ||
        t.kind == TokenKind::CONTINUE)
      return false;
  }
  if (depth != 0) return false;
  const bool statement = toks.back().kind == TokenKind::SEMI;
  const bool unit = toks.front().kind == TokenKind::LBRACE && toks.back().kind == TokenKind::RBRACE;
  return statement || unit;
}

namespace detail {

inline bool is_decl_specifier(TokenKind k) {
  switch (k) {
    case TokenKind::TYP_INT:
    case TokenKind::TYP_CHAR:
    case TokenKind::TYP_SHORT:
    case TokenKind::TYP_LONG:
    case TokenKind::TYP_FLOAT:
    case TokenKind::TYP_DOUBLE:
    case TokenKind::TYP_VOID:
    case TokenKind::TYP_BOOL:
    case TokenKind::TYP_SIGNED:
    case TokenKind::TYP_UNSIGNED:
    case TokenKind::TYP_COMPLEX:
    case TokenKind::TYP_IMAGINARY:
    case TokenKind::CONST:
    case TokenKind::VOLATILE:
    case TokenKind::STATIC:
    case TokenKind::EXTERN:
    case TokenKind::AUTO:
    case TokenKind::REGISTER:
    case TokenKind::INLINE:
    case TokenKind::RESTRICT:
    case TokenKind::TYPEDEF:
      return true;
    default: return false;
  }
}

}  // namespace detail

/// Names introduced by a declaration line, e.g. {"a", "b"} for
/// `int a = 0, *b;`. Empty for anything that is not a declaration. A leading
/// identifier counts as a typedef name when another identifier or `*`
/// follows it.
inline std::vector<std::string> declared_names(std::string_view line) {
  const LexResult lexed = lex_c(line);
  const auto& toks = lexed.tokens;
  std::vector<std::string> names;
  std::size_t i = 0;
  bool has_type = false;
  while (i < toks.size()) {
    const TokenKind k = toks[i].kind;
    if (detail::is_decl_specifier(k)) {
      has_type = true;
      ++i;
    } else if (k == TokenKind::STRUCT || k == TokenKind::UNION || k == TokenKind::ENUM) {
      has_type = true;
      ++i;
      if (i < toks.size() && toks[i].kind == TokenKind::ID) ++i;
    } else {
      break;
    }
  }
  if (!has_type) {
    if (toks.size() >= 3 && toks[0].kind == TokenKind::ID &&
        (toks[1].kind == TokenKind::ID || toks[1].text == "*")) {
      has_type = true;
      i = 1;
    } else {
      return names;
    }
  }
  // declarators, split on top-level commas
  int depth = 0;
  bool want_name = true;
  for (; i < toks.size(); ++i) {
    const RawToken& t = toks[i];
    if (t.kind == TokenKind::SEMI && depth == 0) break;
    if (t.kind == TokenKind::LPAREN || t.kind == TokenKind::LBRACKET || t.kind == TokenKind::LBRACE) {
      ++depth;
      continue;
    }
    if (t.kind == TokenKind::RPAREN || t.kind == TokenKind::RBRACKET || t.kind == TokenKind::RBRACE) {
      --depth;
      continue;
    }
    if (t.kind == TokenKind::COMMA && depth == 0) {
      want_name = true;
      continue;
    }
    if (t.kind == TokenKind::EQ && depth == 0) want_name = false;
    if (want_name && t.kind == TokenKind::ID) {
      names.emplace_back(t.text);
      want_name = false;
    }
  }
  return names;
}

/// Every identifier spelled in `text`.
inline std::unordered_set<std::string> identifiers_in(std::string_view text) {
  std::unordered_set<std::string> ids;
  for (const RawToken& t : lex_c(text).tokens)
    if (t.kind == TokenKind::ID) ids.emplace(t.text);
  return ids;
}

/// Renames declared names that already appear in the target program by
/// appending `_N`. Member accesses (`.name`, `->name`) are left alone.
class FreshNamer {
 public:
  std::string prepare(std::string_view line, const std::unordered_set<std::string>& taken) {
    const std::vector<std::string> declared = declared_names(line);
    std::vector<std::pair<std::string, std::string>> renames;
    const std::unordered_set<std::string> local = identifiers_in(line);
    for (const std::string& name : declared) {
      if (!taken.contains(name)) continue;
      std::string base = name;
      const std::size_t us = base.rfind('_');
      if (us != std::string::npos && us + 1 < base.size() && us > 0 &&
          std::all_of(base.begin() + static_cast<std::ptrdiff_t>(us + 1), base.end(),
                      [](char c) { return c >= '0' && c <= '9'; }))
        base.resize(us);
      std::string fresh;
      do {
        fresh = base + "_" + std::to_string(++counter_);
      } while (taken.contains(fresh) || local.contains(fresh));
      renames.emplace_back(name, fresh);
    }
    if (renames.empty()) return std::string(line);

    const LexResult lexed = lex_c(line);
    std::string out;
    std::size_t copied = 0;
    for (std::size_t i = 0; i < lexed.tokens.size(); ++i) {
      const RawToken& t = lexed.tokens[i];
      if (t.kind != TokenKind::ID) continue;
      if (i > 0 && (lexed.tokens[i - 1].text == "." || lexed.tokens[i - 1].text == "->")) continue;
      const auto it = std::find_if(renames.begin(), renames.end(), [&](const auto& r) { return r.first == t.text; });
      if (it == renames.end()) continue;
      out.append(line.substr(copied, t.offset - copied));
      out.append(it->second);
      copied = t.offset + t.text.size();
    }
    out.append(line.substr(copied));
    return out;
  }

  std::size_t counter() const { return counter_; }

 private:
  std::size_t counter_ = 0;
};

inline std::string_view leading_whitespace(std::string_view line) {
  std::size_t n = 0;
  while (n < line.size() && (line[n] == ' ' || line[n] == '\t')) ++n;
  return line.substr(0, n);
}

/// Inserts `stmt` as a new line after line `after` (1-based; 0 = top),
/// indented like its surroundings. Returns the 1-based number of the new line.
inline std::size_t insert_line(SourceLines& src, std::size_t after, std::string_view stmt) {
  after = std::min(after, src.size());
  std::string indent;
  if (after > 0) {
    const std::string& prev = src.lines[after - 1];
    indent = std::string(leading_whitespace(prev));
    const std::string_view trimmed = detail::trim(prev);
    if (!trimmed.empty() && trimmed.back() == '{') indent += "    ";
  }
  src.lines.insert(src.lines.begin() + static_cast<std::ptrdiff_t>(after), indent + std::string(detail::trim(stmt)));
  return after + 1;
}

/// Trimmed lines of `text` that carry at least one token (comment-only and
/// blank lines are skipped).
inline std::vector<std::string> candidate_lines(std::string_view text) {
  std::unordered_set<std::uint32_t> with_tokens;
  for (const RawToken& t : lex_c(text).tokens) with_tokens.insert(t.line);
  std::vector<std::string> out;
  const SourceLines src = SourceLines::split(text);
  for (std::size_t i = 0; i < src.size(); ++i)
    if (with_tokens.contains(static_cast<std::uint32_t>(i + 1))) out.emplace_back(detail::trim(src.lines[i]));
  return out;
}

}  // namespace simforge
