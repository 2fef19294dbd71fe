#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <istream>
#include <iterator>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "simforge/token.hpp"

namespace simforge {

/// Noise threshold `k` and guarantee threshold `t`, both in tokens. Any
/// shared run of at least `t` tokens yields a shared fingerprint; runs
/// shorter than `k` never do.
struct FingerprintParams {
  std::size_t k = 16;
  std::size_t t = 30;

  std::size_t window() const { return t - k + 1; }

  void validate() const {
    if (k < 1) throw std::invalid_argument("fingerprint params: k must be >= 1");
    if (k > t) throw std::invalid_argument("fingerprint params: k must not exceed t");
  }

  friend bool operator==(const FingerprintParams&, const FingerprintParams&) = default;
};

/// Polynomial rolling hash over token class codes, modulo 2^64.
class RollingHash {
 public:
  static constexpr std::uint64_t kBase = 1000003ull;
  static constexpr std::uint64_t kSeed = 0x9e3779b97f4a7c15ull;

  explicit RollingHash(std::size_t width) : width_(width) {
    if (width == 0) throw std::invalid_argument("rolling hash width must be >= 1");
    for (std::size_t i = 1; i < width; ++i) drop_factor_ *= kBase;
  }

  /// Hash of `codes` from scratch; `codes.size()` must equal the width.
  std::uint64_t reset(std::span<const std::uint64_t> codes) {
    value_ = 0;
    for (std::uint64_t c : codes) value_ = value_ * kBase + (c + kSeed);
    return value_;
  }

  std::uint64_t roll(std::uint64_t outgoing, std::uint64_t incoming) {
    value_ -= drop_factor_ * (outgoing + kSeed);
    value_ = value_ * kBase + (incoming + kSeed);
    return value_;
  }

  std::uint64_t value() const { return value_; }
  std::size_t width() const { return width_; }

 private:
  std::size_t width_;
  std::uint64_t drop_factor_ = 1;
  std::uint64_t value_ = 0;
};

/// Hash of the k-gram starting at `index`. Replaceable in tests to inject
/// exact hash values.
using KgramHashFn = std::function<std::uint64_t(std::span<const Token> kgram, std::size_t index)>;

struct KgramHash {
  std::uint64_t hash = 0;
  std::size_t token_index = 0;
};

inline std::uint64_t kgram_hash(std::span<const Token> kgram) {
  std::vector<std::uint64_t> codes;
  codes.reserve(kgram.size());
  for (const Token& t : kgram) codes.push_back(class_code(t));
  return RollingHash(kgram.size()).reset(codes);
}

/// One hash per k-gram, in token order. Fewer than `k` tokens gives nothing.
inline std::vector<KgramHash> kgram_hashes(std::span<const Token> tokens, std::size_t k,
                                           const KgramHashFn& hasher = {}) {
  if (k == 0) throw std::invalid_argument("kgram_hashes: k must be >= 1");
  std::vector<KgramHash> out;
  if (tokens.size() < k) return out;
  const std::size_t count = tokens.size() - k + 1;
  out.reserve(count);
  if (hasher) {
    for (std::size_t i = 0; i < count; ++i) out.push_back({hasher(tokens.subspan(i, k), i), i});
    return out;
  }
  std::vector<std::uint64_t> codes;
  codes.reserve(tokens.size());
  for (const Token& t : tokens) codes.push_back(class_code(t));
  RollingHash rh(k);
  out.push_back({rh.reset(std::span(codes).first(k)), 0});
  for (std::size_t i = 1; i < count; ++i) out.push_back({rh.roll(codes[i - 1], codes[i + k - 1]), i});
  return out;
}

inline std::vector<KgramHash> kgram_hashes(const NormalizedDocument& doc, std::size_t k,
                                           const KgramHashFn& hasher = {}) {
  return kgram_hashes(std::span<const Token>(doc.tokens), k, hasher);
}

struct Selected {
  std::uint64_t hash = 0;
  std::size_t position = 0;  // index into the hash sequence

  friend bool operator==(const Selected&, const Selected&) = default;
};

/// Winnowing: the minimum of every window of `w` consecutive hashes, rightmost
/// on ties, recording a selection only when it differs from the previous
/// window's. A sequence shorter than `w` is one window.
inline std::vector<Selected> winnow(std::span<const std::uint64_t> hashes, std::size_t w) {
  if (w == 0) throw std::invalid_argument("winnow: window must be >= 1");
  std::vector<Selected> out;
  if (hashes.empty()) return out;
  if (hashes.size() < w) w = hashes.size();

  // Monotone deque of positions; values strictly increase front to back, so
  // equal values keep only the rightmost.
  std::deque<std::size_t> dq;
  std::size_t last = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < hashes.size(); ++i) {
    while (!dq.empty() && hashes[dq.back()] >= hashes[i]) dq.pop_back();
    dq.push_back(i);
    if (i + 1 < w) continue;
    const std::size_t start = i + 1 - w;
    while (dq.front() < start) dq.pop_front();
    if (dq.front() != last) {
      last = dq.front();
      out.push_back({hashes[last], last});
    }
  }
  return out;
}

inline std::vector<Selected> winnow(const std::vector<KgramHash>& hashes, std::size_t w) {
  std::vector<std::uint64_t> values;
  values.reserve(hashes.size());
  for (const KgramHash& h : hashes) values.push_back(h.hash);
  return winnow(std::span<const std::uint64_t>(values), w);
}

struct Fingerprint {
  std::uint64_t hash = 0;
  std::size_t token_index = 0;
  std::uint32_t line_first = 0;
  std::uint32_t line_last = 0;

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

struct FingerprintSet {
  std::string doc_id;
  FingerprintParams params;
  std::size_t line_count = 0;
  std::vector<Fingerprint> prints;
};

inline FingerprintSet fingerprint_document(const NormalizedDocument& doc, const FingerprintParams& params,
                                           const KgramHashFn& hasher = {}) {
  params.validate();
  FingerprintSet set{doc.doc_id, params, doc.line_count, {}};
  const std::vector<KgramHash> hashes = kgram_hashes(doc, params.k, hasher);
  for (const Selected& s : winnow(hashes, params.window())) {
    const std::size_t idx = hashes[s.position].token_index;
    set.prints.push_back(
        {s.hash, idx, doc.tokens[idx].line, doc.tokens[idx + params.k - 1].line});
  }
  return set;
}

/// `doc_id<TAB>hash<TAB>token_index<TAB>line_start<TAB>line_end`, one print per line.
inline void write_fingerprints(std::ostream& os, const FingerprintSet& set) {
  for (const Fingerprint& fp : set.prints)
    os << set.doc_id << '\t' << fp.hash << '\t' << fp.token_index << '\t' << fp.line_first << '\t'
       << fp.line_last << '\n';
}

/// Reads the format written by write_fingerprints. Records are grouped by
/// doc_id in order of first appearance; params and line_count are not part
/// of the format and are left for the caller to fill in.
inline std::vector<FingerprintSet> read_fingerprints(std::istream& is) {
  std::vector<FingerprintSet> sets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string doc_id;
    Fingerprint fp;
    if (!std::getline(fields, doc_id, '\t') || !(fields >> fp.hash >> fp.token_index >> fp.line_first >> fp.line_last))
      throw std::runtime_error("fingerprint index: malformed record at line " + std::to_string(line_no));
    if (sets.empty() || sets.back().doc_id != doc_id) {
      auto it = std::find_if(sets.begin(), sets.end(), [&](const FingerprintSet& s) { return s.doc_id == doc_id; });
      if (it == sets.end()) {
        sets.push_back({doc_id, {}, 0, {}});
        it = std::prev(sets.end());
      }
      it->prints.push_back(fp);
      continue;
    }
    sets.back().prints.push_back(fp);
  }
  return sets;
}

}  // namespace simforge
