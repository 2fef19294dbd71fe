#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "simforge/detector.hpp"
#include "simforge/fingerprint.hpp"
#include "simforge/parallel.hpp"
#include "simforge/token.hpp"

namespace simforge {

struct Tile {
  std::size_t start_a = 0;
  std::size_t start_b = 0;
  std::size_t length = 0;

  friend bool operator==(const Tile&, const Tile&) = default;
};

struct GstResult {
  std::vector<Tile> tiles;  // in the order they were laid
  std::size_t tiled_tokens = 0;
  double similarity = 0.0;  // 2 * tiled / (|a| + |b|), as a percentage
  double pct_a = 0.0;
  double pct_b = 0.0;
};

/// Greedy String Tiling with Karp-Rabin search over token class codes.
///
/// Each round finds the length L of the longest common substring made of
/// unmarked tokens, then lays every length-L match in (start_a, start_b)
/// order that does not overlap a tile laid earlier in the round. Rounds stop
/// when L drops below `mml`.
class GreedyStringTiler {
 public:
  GreedyStringTiler(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::size_t mml)
      : a_(a), b_(b), mml_(mml), marked_a_(a.size(), 0), marked_b_(b.size(), 0) {
    if (mml == 0) throw std::invalid_argument("gst: minimum match length must be >= 1");
  }

  std::vector<Tile> run() {
    std::vector<Tile> tiles;
    std::size_t upper = std::min(a_.size(), b_.size());
    while (upper >= mml_ && !matches(mml_, true).empty()) {
      std::size_t lo = mml_, hi = upper;
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        if (!matches(mid, true).empty()) lo = mid;
        else hi = mid - 1;
      }
      const std::size_t len = lo;
      for (const auto& [i, j] : matches(len, false)) {
        if (occluded(marked_a_, i, len) || occluded(marked_b_, j, len)) continue;
        std::fill_n(marked_a_.begin() + static_cast<std::ptrdiff_t>(i), len, 1);
        std::fill_n(marked_b_.begin() + static_cast<std::ptrdiff_t>(j), len, 1);
        tiles.push_back({i, j, len});
      }
      upper = len;
    }
    return tiles;
  }

 private:
  static bool occluded(const std::vector<char>& marks, std::size_t from, std::size_t len) {
    return std::any_of(marks.begin() + static_cast<std::ptrdiff_t>(from),
                       marks.begin() + static_cast<std::ptrdiff_t>(from + len), [](char m) { return m != 0; });
  }

  // Start positions of windows of width `len` that contain no marked token.
  static std::vector<std::pair<std::size_t, std::uint64_t>> window_hashes(std::span<const std::uint64_t> seq,
                                                                          const std::vector<char>& marks,
                                                                          std::size_t len) {
    std::vector<std::pair<std::size_t, std::uint64_t>> out;
    if (seq.size() < len) return out;
    RollingHash rh(len);
    std::size_t marked_in_window = 0;
    for (std::size_t p = 0; p < len; ++p) marked_in_window += marks[p] != 0;
    std::uint64_t h = rh.reset(seq.first(len));
    for (std::size_t i = 0;; ++i) {
      if (marked_in_window == 0) out.emplace_back(i, h);
      if (i + len >= seq.size()) break;
      marked_in_window -= marks[i] != 0;
      marked_in_window += marks[i + len] != 0;
      h = rh.roll(seq[i], seq[i + len]);
    }
    return out;
  }

  // All unmarked common substrings of exactly `len` tokens, sorted by
  // (start_a, start_b). With `first_only`, stops at the first hit.
  std::vector<std::pair<std::size_t, std::size_t>> matches(std::size_t len, bool first_only) const {
    std::vector<std::pair<std::size_t, std::size_t>> found;
    if (len == 0 || a_.size() < len || b_.size() < len) return found;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> table;
    for (const auto& [j, h] : window_hashes(b_, marked_b_, len)) table[h].push_back(j);
    if (table.empty()) return found;
    for (const auto& [i, h] : window_hashes(a_, marked_a_, len)) {
      const auto it = table.find(h);
      if (it == table.end()) continue;
      for (std::size_t j : it->second) {
        if (!std::equal(a_.begin() + static_cast<std::ptrdiff_t>(i), a_.begin() + static_cast<std::ptrdiff_t>(i + len),
                        b_.begin() + static_cast<std::ptrdiff_t>(j)))
          continue;
        found.emplace_back(i, j);
        if (first_only) return found;
      }
    }
    std::sort(found.begin(), found.end());
    return found;
  }

  std::span<const std::uint64_t> a_;
  std::span<const std::uint64_t> b_;
  std::size_t mml_;
  std::vector<char> marked_a_;
  std::vector<char> marked_b_;
};

inline std::vector<std::uint64_t> class_codes(const NormalizedDocument& doc) {
  std::vector<std::uint64_t> codes;
  codes.reserve(doc.tokens.size());
  for (const Token& t : doc.tokens) codes.push_back(class_code(t));
  return codes;
}

inline GstResult gst_match(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::size_t mml) {
  GstResult r;
  r.tiles = GreedyStringTiler(a, b, mml).run();
  for (const Tile& t : r.tiles) r.tiled_tokens += t.length;
  const double tiled = static_cast<double>(r.tiled_tokens);
  if (!a.empty() || !b.empty()) r.similarity = 200.0 * tiled / static_cast<double>(a.size() + b.size());
  if (!a.empty()) r.pct_a = 100.0 * tiled / static_cast<double>(a.size());
  if (!b.empty()) r.pct_b = 100.0 * tiled / static_cast<double>(b.size());
  return r;
}

inline GstResult gst_match(const NormalizedDocument& a, const NormalizedDocument& b, std::size_t mml = 9) {
  const std::vector<std::uint64_t> ca = class_codes(a), cb = class_codes(b);
  return gst_match(std::span<const std::uint64_t>(ca), std::span<const std::uint64_t>(cb), mml);
}

/// Report row for a GST comparison; regions are the source lines under tiles.
inline PairScore gst_pair_score(const NormalizedDocument& a, const NormalizedDocument& b, std::size_t mml) {
  const GstResult r = gst_match(a, b, mml);
  PairScore ps{a.doc_id, b.doc_id, r.pct_a, r.pct_b, r.similarity, r.tiles.size(), {}, {}};
  std::vector<LineSpan> ra, rb;
  for (const Tile& t : r.tiles) {
    ra.push_back({a.tokens[t.start_a].line, a.tokens[t.start_a + t.length - 1].line});
    rb.push_back({b.tokens[t.start_b].line, b.tokens[t.start_b + t.length - 1].line});
  }
  ps.regions_a = merge_spans(std::move(ra));
  ps.regions_b = merge_spans(std::move(rb));
  return ps;
}

inline SimilarityReport rank_all_gst(const std::vector<NormalizedDocument>& docs, std::size_t mml = 9,
                                     std::size_t limit = 250) {
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < docs.size(); ++i)
    for (std::size_t j = i + 1; j < docs.size(); ++j) jobs.emplace_back(i, j);
  std::vector<PairScore> scored(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t n) {
    scored[n] = gst_pair_score(docs[jobs[n].first], docs[jobs[n].second], mml);
  });
  sort_report(scored);
  if (scored.size() > limit) scored.resize(limit);
  return {"gst", limit, std::move(scored)};
}

}  // namespace simforge
