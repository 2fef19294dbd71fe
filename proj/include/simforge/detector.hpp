#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "simforge/error.hpp"
#include "simforge/fingerprint.hpp"
#include "simforge/parallel.hpp"

namespace simforge {

/// Closed line interval [first, last].
struct LineSpan {
  std::uint32_t first = 0;
  std::uint32_t last = 0;

  friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

/// Sorts and merges overlapping or adjacent spans.
inline std::vector<LineSpan> merge_spans(std::vector<LineSpan> spans) {
  std::sort(spans.begin(), spans.end(),
            [](const LineSpan& a, const LineSpan& b) { return a.first != b.first ? a.first < b.first : a.last < b.last; });
  std::vector<LineSpan> merged;
  for (const LineSpan& s : spans) {
    if (!merged.empty() && s.first <= merged.back().last + 1)
      merged.back().last = std::max(merged.back().last, s.last);
    else
      merged.push_back(s);
  }
  return merged;
}

inline std::size_t span_lines(const std::vector<LineSpan>& merged) {
  std::size_t total = 0;
  for (const LineSpan& s : merged) total += s.last - s.first + 1;
  return total;
}

struct Posting {
  std::string doc_id;
  std::size_t token_index = 0;
  std::uint32_t line_first = 0;
  std::uint32_t line_last = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

struct PairScore {
  std::string doc_a;
  std::string doc_b;
  double pct_a = 0.0;
  double pct_b = 0.0;
  double score = 0.0;
  std::size_t matched = 0;  // distinct shared fingerprint values
  std::vector<LineSpan> regions_a;
  std::vector<LineSpan> regions_b;
};

struct SimilarityReport {
  std::string engine = "winnow";
  std::size_t limit = 250;
  std::vector<PairScore> pairs;
};

namespace detail {

/// Per-document view the scorer works from.
struct ScoredDoc {
  std::vector<Fingerprint> prints;       // boilerplate removed
  std::vector<LineSpan> coverable;       // merged spans of all own prints
  std::unordered_set<std::uint64_t> hashes;
};

inline ScoredDoc make_scored(const FingerprintSet& set, const std::unordered_set<std::uint64_t>& boilerplate) {
  ScoredDoc d;
  std::vector<LineSpan> spans;
  spans.reserve(set.prints.size());
  for (const Fingerprint& fp : set.prints) {
    spans.push_back({fp.line_first, fp.line_last});
    if (boilerplate.contains(fp.hash)) continue;
    d.prints.push_back(fp);
    d.hashes.insert(fp.hash);
  }
  d.coverable = merge_spans(std::move(spans));
  return d;
}

inline double percent(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

inline PairScore score_docs(const std::string& id_a, const ScoredDoc& a, const std::string& id_b, const ScoredDoc& b) {
  PairScore ps{id_a, id_b, 0.0, 0.0, 0.0, 0, {}, {}};
  std::unordered_set<std::uint64_t> shared;
  std::vector<LineSpan> spans_a, spans_b;
  for (const Fingerprint& fp : a.prints) {
    if (!b.hashes.contains(fp.hash)) continue;
    shared.insert(fp.hash);
    spans_a.push_back({fp.line_first, fp.line_last});
  }
  for (const Fingerprint& fp : b.prints)
    if (shared.contains(fp.hash)) spans_b.push_back({fp.line_first, fp.line_last});
  ps.matched = shared.size();
  ps.regions_a = merge_spans(std::move(spans_a));
  ps.regions_b = merge_spans(std::move(spans_b));
  ps.pct_a = percent(span_lines(ps.regions_a), span_lines(a.coverable));
  ps.pct_b = percent(span_lines(ps.regions_b), span_lines(b.coverable));
  ps.score = std::max(ps.pct_a, ps.pct_b);
  return ps;
}

}  // namespace detail

/// Scores two fingerprint sets directly, without an index. Gives the same
/// result as score_pair on an index holding both sets.
inline PairScore score_sets(const FingerprintSet& a, const FingerprintSet& b) {
  if (!(a.params == b.params)) throw ParamMismatch("score_sets: fingerprint parameters differ");
  static const std::unordered_set<std::uint64_t> none;
  return detail::score_docs(a.doc_id, detail::make_scored(a, none), b.doc_id, detail::make_scored(b, none));
}

/// Hash -> postings database over a corpus of fingerprint sets.
class FingerprintIndex {
 public:
  struct DocMeta {
    std::size_t line_count = 0;
    detail::ScoredDoc scored;
  };

  const FingerprintParams& params() const { return params_; }
  const std::vector<std::string>& doc_ids() const { return order_; }
  const std::unordered_map<std::uint64_t, std::vector<Posting>>& postings() const { return postings_; }
  const std::unordered_set<std::uint64_t>& boilerplate() const { return boilerplate_; }
  bool empty() const { return order_.empty(); }

  const DocMeta& doc(const std::string& id) const {
    const auto it = docs_.find(id);
    if (it == docs_.end()) throw DocumentNotFound("fingerprint index: unknown document '" + id + "'");
    return it->second;
  }

  bool contains(const std::string& id) const { return docs_.contains(id); }

  friend FingerprintIndex build_index(const std::vector<FingerprintSet>& sets,
                                      const std::optional<FingerprintSet>& boilerplate);

 private:
  FingerprintParams params_;
  std::unordered_set<std::uint64_t> boilerplate_;
  std::unordered_map<std::uint64_t, std::vector<Posting>> postings_;
  std::map<std::string, DocMeta> docs_;
  std::vector<std::string> order_;
};

/// Indexes every non-boilerplate fingerprint. All sets, including the
/// boilerplate set, must share one parameter choice.
inline FingerprintIndex build_index(const std::vector<FingerprintSet>& sets,
                                    const std::optional<FingerprintSet>& boilerplate = std::nullopt) {
  FingerprintIndex index;
  if (!sets.empty()) index.params_ = sets.front().params;
  else if (boilerplate) index.params_ = boilerplate->params;
  if (boilerplate) {
    if (!(boilerplate->params == index.params_))
      throw ParamMismatch("build_index: boilerplate parameters differ from corpus");
    for (const Fingerprint& fp : boilerplate->prints) index.boilerplate_.insert(fp.hash);
  }
  for (const FingerprintSet& set : sets) {
    if (!(set.params == index.params_))
      throw ParamMismatch("build_index: document '" + set.doc_id + "' has different fingerprint parameters");
    if (index.docs_.contains(set.doc_id))
      throw std::invalid_argument("build_index: duplicate document '" + set.doc_id + "'");
    FingerprintIndex::DocMeta meta{set.line_count, detail::make_scored(set, index.boilerplate_)};
    for (const Fingerprint& fp : meta.scored.prints)
      index.postings_[fp.hash].push_back({set.doc_id, fp.token_index, fp.line_first, fp.line_last});
    index.docs_.emplace(set.doc_id, std::move(meta));
    index.order_.push_back(set.doc_id);
  }
  return index;
}

/// Percentage of each document's fingerprinted lines covered by fingerprints
/// the other document shares; the pair score is the larger of the two.
inline PairScore score_pair(const FingerprintIndex& index, const std::string& doc_a, const std::string& doc_b) {
  return detail::score_docs(doc_a, index.doc(doc_a).scored, doc_b, index.doc(doc_b).scored);
}

/// Descending by score; ties broken by document ids for a stable order.
inline void sort_report(std::vector<PairScore>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const PairScore& x, const PairScore& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.doc_a != y.doc_a) return x.doc_a < y.doc_a;
    return x.doc_b < y.doc_b;
  });
}

/// Scores every unordered pair and keeps the top `limit`.
inline SimilarityReport rank_all(const FingerprintIndex& index, std::size_t limit = 250) {
  const auto& ids = index.doc_ids();
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) jobs.emplace_back(i, j);
  std::vector<PairScore> scored(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t n) {
    scored[n] = score_pair(index, ids[jobs[n].first], ids[jobs[n].second]);
  });
  sort_report(scored);
  if (scored.size() > limit) scored.resize(limit);
  return {"winnow", limit, std::move(scored)};
}

}  // namespace simforge
