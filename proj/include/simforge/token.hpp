#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace simforge {

/// Token classes produced by the C and assembly lexers.
///
/// Keywords keep their own class, identifiers all collapse into `ID`, and
/// literals collapse into `NUM`/`STR`/`CHAR`. Operators without a named class
/// are `PUNCT`; their lexeme is folded into `Token::code` so that `+` and `-`
/// still hash differently.
enum class TokenKind : std::uint16_t {
  ID,
  NUM,
  STR,
  CHAR,
  PUNCT,
  // type keywords
  TYP_INT,
  TYP_CHAR,
  TYP_SHORT,
  TYP_LONG,
  TYP_FLOAT,
  TYP_DOUBLE,
  TYP_VOID,
  TYP_BOOL,
  TYP_SIGNED,
  TYP_UNSIGNED,
  TYP_COMPLEX,
  TYP_IMAGINARY,
  // other keywords
  BOOL,
  RET,
  IF,
  ELSE,
  FOR,
  WHILE,
  DO,
  SWITCH,
  CASE,
  DEFAULT,
  BREAK,
  CONTINUE,
  GOTO,
  SIZEOF,
  STRUCT,
  UNION,
  ENUM,
  TYPEDEF,
  CONST,
  VOLATILE,
  STATIC,
  EXTERN,
  AUTO,
  REGISTER,
  INLINE,
  RESTRICT,
  // named punctuation
  EQ,
  SEMI,
  COMMA,
  LPAREN,
  RPAREN,
  LBRACE,
  RBRACE,
  LBRACKET,
  RBRACKET,
  // assembly
  MNEMONIC,
  REG,
  LABEL,
  LABEL_DEF,
  SYMBOL,
  DIRECTIVE,
};

inline std::string_view kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::ID: return "ID";
    case TokenKind::NUM: return "NUM";
    case TokenKind::STR: return "STR";
    case TokenKind::CHAR: return "CHAR";
    case TokenKind::PUNCT: return "PUNCT";
    case TokenKind::TYP_INT: return "TYP_INT";
    case TokenKind::TYP_CHAR: return "TYP_CHAR";
    case TokenKind::TYP_SHORT: return "TYP_SHORT";
    case TokenKind::TYP_LONG: return "TYP_LONG";
    case TokenKind::TYP_FLOAT: return "TYP_FLOAT";
    case TokenKind::TYP_DOUBLE: return "TYP_DOUBLE";
    case TokenKind::TYP_VOID: return "TYP_VOID";
    case TokenKind::TYP_BOOL: return "TYP_BOOL";
    case TokenKind::TYP_SIGNED: return "TYP_SIGNED";
    case TokenKind::TYP_UNSIGNED: return "TYP_UNSIGNED";
    case TokenKind::TYP_COMPLEX: return "TYP_COMPLEX";
    case TokenKind::TYP_IMAGINARY: return "TYP_IMAGINARY";
    case TokenKind::BOOL: return "BOOL";
    case TokenKind::RET: return "RET";
    case TokenKind::IF: return "IF";
    case TokenKind::ELSE: return "ELSE";
    case TokenKind::FOR: return "FOR";
    case TokenKind::WHILE: return "WHILE";
    case TokenKind::DO: return "DO";
    case TokenKind::SWITCH: return "SWITCH";
    case TokenKind::CASE: return "CASE";
    case TokenKind::DEFAULT: return "DEFAULT";
    case TokenKind::BREAK: return "BREAK";
    case TokenKind::CONTINUE: return "CONTINUE";
    case TokenKind::GOTO: return "GOTO";
    case TokenKind::SIZEOF: return "SIZEOF";
    case TokenKind::STRUCT: return "STRUCT";
    case TokenKind::UNION: return "UNION";
    case TokenKind::ENUM: return "ENUM";
    case TokenKind::TYPEDEF: return "TYPEDEF";
    case TokenKind::CONST: return "CONST";
    case TokenKind::VOLATILE: return "VOLATILE";
    case TokenKind::STATIC: return "STATIC";
    case TokenKind::EXTERN: return "EXTERN";
    case TokenKind::AUTO: return "AUTO";
    case TokenKind::REGISTER: return "REGISTER";
    case TokenKind::INLINE: return "INLINE";
    case TokenKind::RESTRICT: return "RESTRICT";
    case TokenKind::EQ: return "EQ";
    case TokenKind::SEMI: return "SEMI";
    case TokenKind::COMMA: return "COMMA";
    case TokenKind::LPAREN: return "LPAREN";
    case TokenKind::RPAREN: return "RPAREN";
    case TokenKind::LBRACE: return "LBRACE";
    case TokenKind::RBRACE: return "RBRACE";
    case TokenKind::LBRACKET: return "LBRACKET";
    case TokenKind::RBRACKET: return "RBRACKET";
    case TokenKind::MNEMONIC: return "MNEMONIC";
    case TokenKind::REG: return "REG";
    case TokenKind::LABEL: return "LABEL";
    case TokenKind::LABEL_DEF: return "LABEL_DEF";
    case TokenKind::SYMBOL: return "SYMBOL";
    case TokenKind::DIRECTIVE: return "DIRECTIVE";
  }
  return "?";
}

/// One normalized token. `code` refines the class where the class alone is
/// too coarse (PUNCT lexemes, assembly mnemonics and registers); it is zero
/// for everything else, in particular for every identifier.
struct Token {
  TokenKind kind = TokenKind::PUNCT;
  std::uint32_t code = 0;
  std::uint32_t line = 1;
  std::uint32_t col = 1;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Integer the fingerprint hash is computed over. Position is not part of it.
inline std::uint64_t class_code(const Token& tok) {
  return ((static_cast<std::uint64_t>(tok.kind) << 32) | tok.code) + 1;
}

/// A document reduced to its canonical token stream.
struct NormalizedDocument {
  std::string doc_id;
  std::vector<Token> tokens;
  std::size_t line_count = 0;  // non-blank source lines
  std::string source_digest;
  std::vector<std::string> diagnostics;
};

inline bool same_stream(const NormalizedDocument& a, const NormalizedDocument& b) {
  if (a.tokens.size() != b.tokens.size()) return false;
  for (std::size_t i = 0; i < a.tokens.size(); ++i)
    if (class_code(a.tokens[i]) != class_code(b.tokens[i])) return false;
  return true;
}

/// 32-bit FNV-1a, used to fold lexemes into `Token::code`.
inline std::uint32_t fnv1a32(std::string_view text) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : text) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string content_digest(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

}  // namespace simforge
