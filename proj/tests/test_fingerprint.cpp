#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "simforge/fingerprint.hpp"
#include "simforge/lexnorm.hpp"
#include "support.hpp"

using namespace simforge;

namespace {

std::vector<std::uint64_t> values(const std::vector<Selected>& sel) {
  std::vector<std::uint64_t> out;
  for (const Selected& s : sel) out.push_back(s.hash);
  return out;
}

/// Materializes every window, takes its rightmost minimum, and records it
/// unless it is the position the previous window recorded.
std::vector<Selected> winnow_oracle(const std::vector<std::uint64_t>& h, std::size_t w) {
  std::vector<Selected> out;
  if (h.empty()) return out;
  w = std::min(w, h.size());
  std::size_t last = SIZE_MAX;
  for (std::size_t s = 0; s + w <= h.size(); ++s) {
    std::size_t best = s;
    for (std::size_t i = s; i < s + w; ++i)
      if (h[i] <= h[best]) best = i;
    if (best != last) out.push_back({h[best], best});
    last = best;
  }
  return out;
}

std::uint64_t direct_hash(const std::vector<Token>& toks, std::size_t from, std::size_t k) {
  std::uint64_t v = 0;
  for (std::size_t i = from; i < from + k; ++i) v = v * RollingHash::kBase + (class_code(toks[i]) + RollingHash::kSeed);
  return v;
}

std::vector<Token> random_tokens(std::mt19937_64& rng, std::size_t n, std::uint32_t alphabet) {
  std::vector<Token> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({TokenKind::PUNCT, static_cast<std::uint32_t>(rng() % alphabet), static_cast<std::uint32_t>(i / 5 + 1), 1});
  return out;
}

NormalizedDocument doc_of(std::vector<Token> toks, std::string id) {
  NormalizedDocument d;
  d.doc_id = std::move(id);
  d.line_count = toks.empty() ? 0 : toks.back().line;
  d.tokens = std::move(toks);
  return d;
}

std::set<std::uint64_t> print_values(const FingerprintSet& s) {
  std::set<std::uint64_t> out;
  for (const Fingerprint& f : s.prints) out.insert(f.hash);
  return out;
}

bool intersects(const FingerprintSet& a, const FingerprintSet& b) {
  const std::set<std::uint64_t> va = print_values(a);
  for (const Fingerprint& f : b.prints)
    if (va.contains(f.hash)) return true;
  return false;
}

/// Assigns hash values by k-gram content, the way a real hash would.
KgramHashFn table_hasher(std::map<std::vector<TokenKind>, std::uint64_t> table) {
  return [table = std::move(table)](std::span<const Token> kgram, std::size_t) {
    std::vector<TokenKind> key;
    for (const Token& t : kgram) key.push_back(t.kind);
    const auto it = table.find(key);
    return it == table.end() ? std::uint64_t{999} : it->second;
  };
}

KgramHashFn sequence_hasher(std::vector<std::uint64_t> seq) {
  return [seq = std::move(seq)](std::span<const Token>, std::size_t i) { return seq.at(i); };
}

using TK = TokenKind;
const char* const kHello = "int hello = 0;\nreturn hello;";
const char* const kHelloInserted = "int hello = 0;\nbool nothing = true;\nreturn hello;";

}  // namespace

TEST(Params, WindowAndValidation) {
  EXPECT_EQ((FingerprintParams{}.window()), 15u);
  EXPECT_EQ((FingerprintParams{3, 5}.window()), 3u);
  EXPECT_THROW((FingerprintParams{0, 5}.validate()), std::invalid_argument);
  EXPECT_THROW((FingerprintParams{6, 5}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((FingerprintParams{5, 5}.validate()));
}

TEST(KgramHashes, CountOnHelloExample) {
  const NormalizedDocument doc = tokenize_c(kHello);
  ASSERT_EQ(doc.tokens.size(), 8u);
  EXPECT_EQ(kgram_hashes(doc, 3).size(), 6u);
  EXPECT_EQ(kgram_hashes(doc, 8).size(), 1u);
  EXPECT_TRUE(kgram_hashes(doc, 9).empty());
  EXPECT_THROW(kgram_hashes(doc, 0), std::invalid_argument);
}

TEST(KgramHashes, RollingEqualsDirect) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 80;
    const std::size_t k = 1 + rng() % 20;
    const std::vector<Token> toks = random_tokens(rng, n, 1u << 30);
    const std::vector<KgramHash> hs = kgram_hashes(std::span<const Token>(toks), k);
    ASSERT_EQ(hs.size(), n >= k ? n - k + 1 : 0);
    for (const KgramHash& h : hs) {
      ASSERT_EQ(h.hash, direct_hash(toks, h.token_index, k));
      ASSERT_EQ(h.hash, kgram_hash(std::span<const Token>(toks).subspan(h.token_index, k)));
    }
  }
}

TEST(KgramHashes, IdentifierSpellingIrrelevant) {
  const auto a = kgram_hashes(tokenize_c("int alpha = beta + 1;"), 4);
  const auto b = kgram_hashes(tokenize_c("int x = y + 1;"), 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].hash, b[i].hash);
}

TEST(Winnow, SmallSequenceValues) {
  const std::vector<std::uint64_t> h = {30, 15, 56, 83, 71, 10};
  EXPECT_EQ(values(winnow(h, 3)), (std::vector<std::uint64_t>{15, 56, 10}));
}

TEST(Winnow, Singleton) { EXPECT_EQ(values(winnow(std::vector<std::uint64_t>{5}, 1)), (std::vector<std::uint64_t>{5})); }

TEST(Winnow, ShortInputIsOneWindow) {
  EXPECT_EQ(values(winnow(std::vector<std::uint64_t>{9, 4, 7}, 10)), (std::vector<std::uint64_t>{4}));
  EXPECT_TRUE(winnow(std::vector<std::uint64_t>{}, 4).empty());
  EXPECT_THROW(winnow(std::vector<std::uint64_t>{1}, 0), std::invalid_argument);
}

TEST(Winnow, TiesPickRightmost) {
  const std::vector<Selected> sel = winnow(std::vector<std::uint64_t>{3, 1, 1, 1, 9}, 3);
  ASSERT_FALSE(sel.empty());
  EXPECT_EQ(sel.front().position, 2u);
  EXPECT_EQ(sel.back().position, 3u);
}

TEST(Winnow, MatchesBruteForceOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = rng() % 60;
    const std::size_t w = 1 + rng() % 12;
    std::vector<std::uint64_t> h(n);
    const std::uint64_t range = trial % 2 ? 5 : 1000000;  // small ranges force ties
    for (auto& v : h) v = rng() % range;
    ASSERT_EQ(winnow(h, w), winnow_oracle(h, w)) << "trial " << trial;
  }
}

TEST(Winnow, SelectionProperties) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 100;
    const std::size_t w = 1 + rng() % 16;
    std::vector<std::uint64_t> h(n);
    for (auto& v : h) v = rng() % 50;
    const std::vector<Selected> sel = winnow(h, w);
    const std::size_t windows = n >= w ? n - w + 1 : 1;
    EXPECT_LE(sel.size(), windows);
    for (std::size_t i = 1; i < sel.size(); ++i) EXPECT_LT(sel[i - 1].position, sel[i].position);
    for (const Selected& s : sel) {
      // some window containing the position has it as its minimum
      bool ok = false;
      const std::size_t ww = std::min(w, n);
      for (std::size_t st = s.position + 1 >= ww ? s.position + 1 - ww : 0; st <= s.position && st + ww <= n; ++st)
        ok = ok || *std::min_element(h.begin() + st, h.begin() + st + ww) == s.hash;
      EXPECT_TRUE(ok);
    }
  }
}

TEST(Fingerprint, HelloPipelineWithMockHashes) {
  const NormalizedDocument doc = tokenize_c(kHello);
  const FingerprintSet set = fingerprint_document(doc, {3, 5}, sequence_hasher({30, 15, 56, 83, 71, 10}));
  std::vector<std::uint64_t> got;
  for (const Fingerprint& f : set.prints) got.push_back(f.hash);
  EXPECT_EQ(got, (std::vector<std::uint64_t>{15, 56, 10}));
  EXPECT_EQ(set.prints.back().token_index, 5u);
  EXPECT_EQ(set.prints.back().line_first, 2u);
  EXPECT_EQ(set.prints.front().line_first, 1u);
}

TEST(Fingerprint, InsertionDropsHashFromGivenSequence) {
  const NormalizedDocument doc = tokenize_c(kHelloInserted);
  ASSERT_EQ(doc.tokens.size(), 13u);
  const std::vector<std::uint64_t> paper = {30, 15, 56, 12, 45, 39, 97, 62, 80, 71, 9};
  const std::vector<KgramHash> hs = kgram_hashes(doc, 3, sequence_hasher(paper));
  ASSERT_EQ(hs.size(), paper.size());
  for (const KgramHash& h : hs) EXPECT_NE(h.hash, 83u);
}

TEST(Fingerprint, InsertionDropsHashByContent) {
  // hash values follow the k-gram, so only k-grams that survive keep theirs
  const KgramHashFn hasher = table_hasher({{{TK::TYP_INT, TK::ID, TK::EQ}, 30},
                                           {{TK::ID, TK::EQ, TK::NUM}, 15},
                                           {{TK::EQ, TK::NUM, TK::SEMI}, 56},
                                           {{TK::NUM, TK::SEMI, TK::RET}, 83},
                                           {{TK::SEMI, TK::RET, TK::ID}, 71},
                                           {{TK::RET, TK::ID, TK::SEMI}, 10},
                                           {{TK::NUM, TK::SEMI, TK::TYP_BOOL}, 12},
                                           {{TK::SEMI, TK::TYP_BOOL, TK::ID}, 45},
                                           {{TK::TYP_BOOL, TK::ID, TK::EQ}, 39},
                                           {{TK::ID, TK::EQ, TK::BOOL}, 97},
                                           {{TK::EQ, TK::BOOL, TK::SEMI}, 62},
                                           {{TK::BOOL, TK::SEMI, TK::RET}, 80}});
  std::vector<std::uint64_t> before, after;
  for (const KgramHash& h : kgram_hashes(tokenize_c(kHello), 3, hasher)) before.push_back(h.hash);
  for (const KgramHash& h : kgram_hashes(tokenize_c(kHelloInserted), 3, hasher)) after.push_back(h.hash);
  EXPECT_EQ(before, (std::vector<std::uint64_t>{30, 15, 56, 83, 71, 10}));
  EXPECT_EQ(after, (std::vector<std::uint64_t>{30, 15, 56, 12, 45, 39, 97, 62, 80, 71, 10}));
  EXPECT_EQ(std::count(after.begin(), after.end(), 83u), 0);
}

TEST(Fingerprint, ShortDocumentHasNoPrints) {
  EXPECT_TRUE(fingerprint_document(tokenize_c("int x;"), {}).prints.empty());
  EXPECT_TRUE(fingerprint_document(tokenize_c(""), {}).prints.empty());
}

TEST(Fingerprint, PrintsAreASubsequenceOfKgramHashes) {
  for (const std::string& name : testing_support::fixture_names()) {
    const NormalizedDocument doc = tokenize_c(testing_support::fixture(name), name);
    const FingerprintParams p{};
    const std::vector<KgramHash> hs = kgram_hashes(doc, p.k);
    const FingerprintSet set = fingerprint_document(doc, p);
    std::size_t last = 0;
    for (std::size_t i = 0; i < set.prints.size(); ++i) {
      const Fingerprint& f = set.prints[i];
      ASSERT_LT(f.token_index, hs.size());
      EXPECT_EQ(f.hash, hs[f.token_index].hash);
      EXPECT_EQ(f.hash, kgram_hash(std::span<const Token>(doc.tokens).subspan(f.token_index, p.k)));
      EXPECT_EQ(f.line_first, doc.tokens[f.token_index].line);
      EXPECT_EQ(f.line_last, doc.tokens[f.token_index + p.k - 1].line);
      if (i > 0) {
        EXPECT_GT(f.token_index, last);
      }
      last = f.token_index;
    }
  }
}

TEST(FingerprintProperty, GuaranteeThreshold) {
  std::mt19937_64 rng(21);
  const FingerprintParams p{};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Token> shared = random_tokens(rng, p.t, 1u << 30);
    std::vector<Token> a = random_tokens(rng, rng() % 60, 1u << 30), b = random_tokens(rng, rng() % 60, 1u << 30);
    const std::size_t at_a = a.empty() ? 0 : rng() % a.size(), at_b = b.empty() ? 0 : rng() % b.size();
    a.insert(a.begin() + static_cast<std::ptrdiff_t>(at_a), shared.begin(), shared.end());
    b.insert(b.begin() + static_cast<std::ptrdiff_t>(at_b), shared.begin(), shared.end());
    ASSERT_TRUE(intersects(fingerprint_document(doc_of(a, "a"), p), fingerprint_document(doc_of(b, "b"), p)))
        << "trial " << trial;
  }
}

TEST(FingerprintProperty, NoiseThreshold) {
  std::mt19937_64 rng(22);
  const FingerprintParams p{};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t run = 1 + rng() % (p.k - 1);
    std::vector<Token> shared = random_tokens(rng, run, 1u << 30);
    std::vector<Token> a = random_tokens(rng, 20 + rng() % 60, 1u << 30), b = random_tokens(rng, 20 + rng() % 60, 1u << 30);
    a.insert(a.begin() + static_cast<std::ptrdiff_t>(rng() % a.size()), shared.begin(), shared.end());
    b.insert(b.begin() + static_cast<std::ptrdiff_t>(rng() % b.size()), shared.begin(), shared.end());
    ASSERT_FALSE(intersects(fingerprint_document(doc_of(a, "a"), p), fingerprint_document(doc_of(b, "b"), p)))
        << "trial " << trial;
  }
}

TEST(FingerprintProperty, InsertedTokenDisruptsEveryCrossingKgram) {
  std::mt19937_64 rng(23);
  const std::size_t k = 5;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Token> toks = random_tokens(rng, 30, 1u << 30);
    const std::size_t at = k + rng() % (toks.size() - 2 * k);
    std::vector<Token> edited = toks;
    edited.insert(edited.begin() + static_cast<std::ptrdiff_t>(at), Token{TK::TYP_BOOL, 0, 1, 1});
    std::set<std::uint64_t> after;
    for (const KgramHash& h : kgram_hashes(std::span<const Token>(edited), k)) after.insert(h.hash);
    for (const KgramHash& h : kgram_hashes(std::span<const Token>(toks), k)) {
      const bool crosses = h.token_index < at && h.token_index + k > at;
      EXPECT_EQ(after.contains(h.hash), !crosses);
    }
  }
}

TEST(FingerprintIo, RoundTrip) {
  const NormalizedDocument doc = tokenize_c(testing_support::fixture("sort.c"), "sort.c");
  FingerprintSet set = fingerprint_document(doc, {});
  std::stringstream ss;
  write_fingerprints(ss, set);
  std::vector<FingerprintSet> back = read_fingerprints(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].doc_id, "sort.c");
  EXPECT_EQ(back[0].prints, set.prints);
  std::stringstream bad("doc\tnot-a-number\n");
  EXPECT_THROW(read_fingerprints(bad), std::runtime_error);
}
