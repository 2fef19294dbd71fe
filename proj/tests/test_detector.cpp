#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>
#include <string>

#include "simforge/detector.hpp"
#include "simforge/lexnorm.hpp"
#include "support.hpp"

using namespace simforge;
using testing_support::fixture;
using testing_support::fixture_names;

namespace {

FingerprintSet prints_of(const std::string& src, const std::string& id, FingerprintParams p = {}) {
  return fingerprint_document(tokenize_c(src, id), p);
}

std::vector<FingerprintSet> fixture_sets() {
  std::vector<FingerprintSet> sets;
  for (const std::string& name : fixture_names()) sets.push_back(prints_of(fixture(name), name));
  return sets;
}

/// Scores a pair straight from the definition, with no index or helpers.
PairScore naive_score(const FingerprintSet& a, const FingerprintSet& b) {
  std::set<std::uint64_t> ha, hb;
  for (const Fingerprint& f : a.prints) ha.insert(f.hash);
  for (const Fingerprint& f : b.prints) hb.insert(f.hash);
  auto side = [](const FingerprintSet& s, const std::set<std::uint64_t>& other) {
    std::set<std::uint32_t> own, hit;
    for (const Fingerprint& f : s.prints)
      for (std::uint32_t l = f.line_first; l <= f.line_last; ++l) {
        own.insert(l);
        if (other.contains(f.hash)) hit.insert(l);
      }
    return own.empty() ? 0.0 : 100.0 * static_cast<double>(hit.size()) / static_cast<double>(own.size());
  };
  PairScore ps;
  ps.doc_a = a.doc_id;
  ps.doc_b = b.doc_id;
  ps.pct_a = side(a, hb);
  ps.pct_b = side(b, ha);
  ps.score = std::max(ps.pct_a, ps.pct_b);
  for (std::uint64_t h : ha) ps.matched += hb.contains(h);
  return ps;
}

std::string rename_and_comment(const std::string& src) {
  const LexResult lexed = lex_c(src);
  std::string out;
  std::size_t prev = 0;
  std::map<std::string, std::string> names;
  for (const RawToken& t : lexed.tokens) {
    out += src.substr(prev, t.offset - prev);
    std::string text(t.text);
    if (t.kind == TokenKind::ID && text != "include" && text != "define" && text.find('.') == std::string::npos) {
      auto [it, fresh] = names.emplace(text, "r" + std::to_string(names.size()));
      text = it->second;
    }
    out += text;
    if (t.kind == TokenKind::SEMI) out += " /* edited */";
    prev = t.offset + t.text.size();
  }
  return out + src.substr(prev);
}

}  // namespace

TEST(MergeSpans, MergesOverlapAndAdjacency) {
  EXPECT_EQ(merge_spans({{5, 6}, {1, 2}, {3, 3}, {10, 12}, {11, 11}}),
            (std::vector<LineSpan>{{1, 3}, {5, 6}, {10, 12}}));
  EXPECT_EQ(merge_spans({{1, 2}, {3, 4}}), (std::vector<LineSpan>{{1, 4}}));
  EXPECT_EQ(span_lines({{1, 6}, {10, 12}}), 9u);
  EXPECT_TRUE(merge_spans({}).empty());
}

TEST(BuildIndex, DisjointDocsHaveSingletonPostings) {
  const FingerprintIndex index =
      build_index({prints_of(fixture("hello.c"), "a"), prints_of(fixture("matrix.c"), "b")});
  for (const auto& [hash, posts] : index.postings()) {
    std::set<std::string> docs;
    for (const Posting& p : posts) docs.insert(p.doc_id);
    EXPECT_EQ(docs.size(), 1u);
  }
}

TEST(BuildIndex, PostingsEqualNaiveMap) {
  const std::vector<FingerprintSet> sets = fixture_sets();
  const FingerprintIndex index = build_index(sets);
  std::map<std::uint64_t, std::vector<Posting>> naive;
  for (const FingerprintSet& s : sets)
    for (const Fingerprint& f : s.prints) naive[f.hash].push_back({s.doc_id, f.token_index, f.line_first, f.line_last});
  ASSERT_EQ(index.postings().size(), naive.size());
  for (const auto& [hash, posts] : naive) {
    ASSERT_TRUE(index.postings().contains(hash));
    EXPECT_EQ(index.postings().at(hash), posts);
  }
}

TEST(BuildIndex, RejectsMixedParams) {
  EXPECT_THROW(build_index({prints_of(fixture("sort.c"), "a"), prints_of(fixture("sort.c"), "b", {10, 20})}),
               ParamMismatch);
  EXPECT_THROW(build_index({prints_of(fixture("sort.c"), "a")}, prints_of(fixture("fib.c"), "bp", {10, 20})),
               ParamMismatch);
}

TEST(BuildIndex, RejectsDuplicateIds) {
  EXPECT_THROW(build_index({prints_of(fixture("sort.c"), "a"), prints_of(fixture("fib.c"), "a")}),
               std::invalid_argument);
}

TEST(BuildIndex, BoilerplateCopyExcludesEverything) {
  const FingerprintSet a = prints_of(fixture("sort.c"), "a");
  const FingerprintSet b = prints_of(fixture("sort.c"), "b");
  const FingerprintIndex index = build_index({a, b}, a);
  EXPECT_EQ(score_pair(index, "a", "b").score, 0.0);
  EXPECT_TRUE(index.postings().empty());
}

TEST(ScorePair, IdenticalCopyIsHundred) {
  for (const std::string& name : fixture_names()) {
    const FingerprintSet a = prints_of(fixture(name), "a");
    if (a.prints.empty()) continue;
    const FingerprintIndex index = build_index({a, prints_of(fixture(name), "b")});
    EXPECT_EQ(score_pair(index, "a", "b").score, 100.0) << name;
  }
}

TEST(ScorePair, RenameAndCommentEditMatchesIdenticalCopy) {
  for (const std::string& name : fixture_names()) {
    const std::string src = fixture(name);
    const FingerprintSet a = prints_of(src, "a");
    if (a.prints.empty()) continue;
    const FingerprintIndex index =
        build_index({a, prints_of(src, "copy"), prints_of(rename_and_comment(src), "edit")});
    EXPECT_EQ(score_pair(index, "a", "edit").score, score_pair(index, "a", "copy").score) << name;
  }
}

TEST(ScorePair, FunctionReorderStaysHigh) {
  std::string src = "#include <stdio.h>\n\n";
  for (int f = 0; f < 5; ++f) {
    src += "static int f" + std::to_string(f) + "(int *v, int n)\n{\n    int acc = 0;\n";
    for (int i = 0; i < 10; ++i)
      src += "    acc += v[" + std::to_string(i) + "] * n;\n    if (acc > " + std::to_string(i * 7 + f) + ")\n        acc -= n;\n";
    src += "    return acc;\n}\n\n";
  }
  const std::string moved = testing_support::reverse_functions(src);
  ASSERT_NE(src, moved);
  const FingerprintIndex index = build_index({prints_of(src, "a"), prints_of(moved, "b")});
  EXPECT_GE(score_pair(index, "a", "b").score, 85.0);
}

TEST(ScorePair, FunctionReorderKeepsEveryLongFunction) {
  for (const std::string& name : testing_support::attack_fixtures()) {
    const std::string src = fixture(name);
    const std::string moved = testing_support::reverse_functions(src);
    const FingerprintSet a = prints_of(src, "a");
    const FingerprintSet b = prints_of(moved, "b");
    const PairScore ps = score_sets(a, b);
    EXPECT_GT(ps.score, 50.0) << name;
    // every top-level block of at least t tokens keeps a shared fingerprint
    const NormalizedDocument doc = tokenize_c(src, "a");
    std::set<std::uint64_t> hb;
    for (const Fingerprint& f : b.prints) hb.insert(f.hash);
    std::size_t depth = 0, begin = 0;
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (doc.tokens[i].kind == TokenKind::LBRACE && depth++ == 0) begin = i;
      if (doc.tokens[i].kind != TokenKind::RBRACE || --depth != 0) continue;
      if (i + 1 - begin < FingerprintParams{}.t) continue;
      bool shared = false;
      for (const Fingerprint& f : a.prints)
        shared = shared || (f.token_index >= begin && f.token_index + FingerprintParams{}.k <= i + 1 && hb.contains(f.hash));
      EXPECT_TRUE(shared) << name << " block at token " << begin;
    }
  }
}

TEST(ScorePair, UnknownDocument) {
  const FingerprintIndex index = build_index({prints_of(fixture("sort.c"), "a")});
  EXPECT_THROW(score_pair(index, "a", "missing"), DocumentNotFound);
}

TEST(ScorePair, SymmetricAndEqualToNaive) {
  const std::vector<FingerprintSet> sets = fixture_sets();
  const FingerprintIndex index = build_index(sets);
  for (const FingerprintSet& a : sets)
    for (const FingerprintSet& b : sets) {
      const PairScore ab = score_pair(index, a.doc_id, b.doc_id);
      const PairScore ba = score_pair(index, b.doc_id, a.doc_id);
      const PairScore naive = naive_score(a, b);
      EXPECT_DOUBLE_EQ(ab.score, ba.score);
      EXPECT_DOUBLE_EQ(ab.pct_a, naive.pct_a);
      EXPECT_DOUBLE_EQ(ab.pct_b, naive.pct_b);
      EXPECT_EQ(ab.matched, naive.matched);
      EXPECT_GE(ab.pct_a, 0.0);
      EXPECT_LE(ab.pct_a, 100.0);
      EXPECT_EQ(merge_spans(ab.regions_a), ab.regions_a);
    }
}

TEST(ScorePair, RelocatedBlockKeepsItsMatches) {
  const std::string block = fixture("sort.c");
  const std::string other = fixture("primes.c");
  const FingerprintSet plain = prints_of(block, "plain");
  const FingerprintSet front = prints_of(block + other, "front");
  const FingerprintSet back = prints_of(other + block, "back");
  const FingerprintIndex index = build_index({plain, front, back});
  EXPECT_GE(score_pair(index, "plain", "front").pct_a, 90.0);
  EXPECT_GE(score_pair(index, "plain", "back").pct_a, 90.0);
}

TEST(ScoreSets, AgreesWithIndex) {
  const FingerprintSet a = prints_of(fixture("stack.c"), "a"), b = prints_of(fixture("queue.c"), "b");
  const FingerprintIndex index = build_index({a, b});
  const PairScore x = score_sets(a, b), y = score_pair(index, "a", "b");
  EXPECT_EQ(x.score, y.score);
  EXPECT_EQ(x.regions_a, y.regions_a);
  EXPECT_EQ(x.regions_b, y.regions_b);
}

TEST(RankAll, IdenticalDocs) {
  const std::string src = fixture("sort.c");
  const SimilarityReport r = rank_all(build_index({prints_of(src, "a"), prints_of(src, "b"), prints_of(src, "c")}));
  ASSERT_EQ(r.pairs.size(), 3u);
  for (const PairScore& p : r.pairs) EXPECT_EQ(p.score, 100.0);
}

TEST(RankAll, DisjointDocsAndLimit) {
  std::vector<FingerprintSet> sets;
  for (int i = 0; i < 6; ++i) {
    std::string src;
    for (int j = 0; j < 40; ++j) src += "x" + std::string(static_cast<std::size_t>(i + 1), '+') + "= " + std::to_string(j) + ";\n";
    sets.push_back(prints_of(src, "d" + std::to_string(i)));
  }
  const SimilarityReport all = rank_all(build_index(sets));
  EXPECT_EQ(all.pairs.size(), 15u);
  for (const PairScore& p : all.pairs) EXPECT_EQ(p.score, 0.0);
  EXPECT_EQ(rank_all(build_index(sets), 4).pairs.size(), 4u);
}

TEST(RankAll, EqualsBruteForceOverFixtures) {
  const std::vector<FingerprintSet> sets = fixture_sets();
  const SimilarityReport r = rank_all(build_index(sets));
  std::vector<PairScore> brute;
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = i + 1; j < sets.size(); ++j) brute.push_back(naive_score(sets[i], sets[j]));
  sort_report(brute);
  ASSERT_EQ(r.pairs.size(), brute.size());
  for (std::size_t i = 0; i < brute.size(); ++i) {
    EXPECT_EQ(r.pairs[i].doc_a, brute[i].doc_a);
    EXPECT_EQ(r.pairs[i].doc_b, brute[i].doc_b);
    EXPECT_DOUBLE_EQ(r.pairs[i].score, brute[i].score);
  }
  for (std::size_t i = 1; i < r.pairs.size(); ++i) EXPECT_GE(r.pairs[i - 1].score, r.pairs[i].score);
}
