#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simforge/detector.hpp"
#include "simforge/equivalence.hpp"
#include "simforge/error.hpp"
#include "simforge/fingerprint.hpp"
#include "simforge/gst.hpp"
#include "simforge/lexnorm.hpp"
#include "simforge/parallel.hpp"
#include "simforge/rng.hpp"
#include "simforge/source_edit.hpp"

namespace simforge {

enum class Engine { Winnow, Gst };

inline std::string_view engine_name(Engine e) { return e == Engine::Winnow ? "winnow" : "gst"; }

inline Engine parse_engine(std::string_view s) {
  if (s == "winnow" || s == "moss") return Engine::Winnow;
  if (s == "gst") return Engine::Gst;
  throw std::invalid_argument("unknown engine '" + std::string(s) + "' (expected winnow or gst)");
}

struct AttackConfig {
  double target = 25.0;            // stop once score <= target
  double timeout_seconds = 300.0;  // without an accepted mutation
  double growth_cap = 2.5;         // max variant lines / base lines
  std::uint64_t seed = 0;
  std::vector<std::string> entropy;  // extra pool lines
  Engine engine = Engine::Winnow;
  FingerprintParams params;
  std::size_t mml = 9;

  void validate() const {
    if (!(target >= 0.0 && target <= 100.0)) throw std::invalid_argument("attack: target must be in [0, 100]");
    if (!(growth_cap > 1.0)) throw std::invalid_argument("attack: growth cap must exceed 1");
    if (!(timeout_seconds > 0.0)) throw std::invalid_argument("attack: timeout must be positive");
    params.validate();
    if (mml == 0) throw std::invalid_argument("attack: minimum match length must be >= 1");
  }
};

/// Scores candidate texts against a fixed base with the configured engine.
class VariantScorer {
 public:
  VariantScorer(std::string_view base, Engine engine, FingerprintParams params, std::size_t mml)
      : engine_(engine), params_(params), mml_(mml), base_doc_(tokenize_c(base, "base")) {
    base_prints_ = fingerprint_document(base_doc_, params_);
  }

  double score(std::string_view variant) const {
    const NormalizedDocument doc = tokenize_c(variant, "variant");
    if (engine_ == Engine::Gst) return gst_match(base_doc_, doc, mml_).similarity;
    return score_sets(base_prints_, fingerprint_document(doc, params_)).score;
  }

  Engine engine() const { return engine_; }

 private:
  Engine engine_;
  FingerprintParams params_;
  std::size_t mml_;
  NormalizedDocument base_doc_;
  FingerprintSet base_prints_;
};

enum class Origin { Source, Entropy, Proven };

inline std::string_view origin_name(Origin o) {
  switch (o) {
    case Origin::Source: return "source";
    case Origin::Entropy: return "entropy";
    case Origin::Proven: return "proven";
  }
  return "?";
}

enum class DuplicatePolicy { Keep, Unique };

/// Weighted candidate lines; duplicates raise a line's selection odds unless
/// the policy is Unique.
class MutationPool {
 public:
  struct Entry {
    std::string text;
    Origin origin;
    bool selectable;
  };

  explicit MutationPool(DuplicatePolicy policy = DuplicatePolicy::Keep) : policy_(policy) {}

  void add(std::string text, Origin origin) {
    if (policy_ == DuplicatePolicy::Unique)
      for (const Entry& e : entries_)
        if (e.text == text) return;
    const bool ok = is_selectable(text);
    entries_.push_back({std::move(text), origin, ok});
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  DuplicatePolicy policy() const { return policy_; }

 private:
  DuplicatePolicy policy_;
  std::vector<Entry> entries_;
};

/// Uniform choice among pool lines that pass is_selectable. Throws
/// SelectionExhausted when none do.
inline const MutationPool::Entry& select(const MutationPool& pool, Rng& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (pool.entries()[i].selectable) eligible.push_back(i);
  if (eligible.empty()) throw SelectionExhausted();
  return pool.entries()[eligible[rng.below(eligible.size())]];
}

struct Insertion {
  std::string text;      // as inserted, after renaming
  std::size_t line = 0;  // 1-based line in the variant right after insertion
  Origin origin = Origin::Source;
  double score_after = 0.0;
  double elapsed_seconds = 0.0;  // since the run started
};

struct Variant {
  std::string text;
  std::string base_id;
  std::uint64_t seed = 0;
  std::vector<Insertion> insertions;
  std::size_t attempts = 0;  // mutations tried, accepted or not
  double score = 100.0;      // engine score against the base
  std::string engine = "winnow";

  std::size_t mutation_count() const { return insertions.size(); }
};

enum class FailureReason { Timeout, GrowthCap, SelectionExhausted };

inline std::string_view failure_name(FailureReason r) {
  switch (r) {
    case FailureReason::Timeout: return "timeout";
    case FailureReason::GrowthCap: return "growth-cap";
    case FailureReason::SelectionExhausted: return "selection-exhausted";
  }
  return "?";
}

/// A run that stopped before reaching its target. Carries the best variant
/// found so far.
class AttackFailure : public std::runtime_error {
 public:
  AttackFailure(FailureReason reason, Variant best)
      : std::runtime_error("attack stopped (" + std::string(failure_name(reason)) + ") at score " +
                           std::to_string(best.score)),
        reason_(reason),
        best_(std::move(best)) {}

  FailureReason reason() const { return reason_; }
  const Variant& best() const { return best_; }

 private:
  FailureReason reason_;
  Variant best_;
};

struct AttackState {
  AttackConfig config;
  std::string base_text;
  std::size_t base_lines = 0;
  std::shared_ptr<const EquivalenceOracle> equivalence;
  std::shared_ptr<const VariantScorer> scorer;
  MutationPool pool;
  Variant current;
  Rng rng;
  FreshNamer namer;
  std::vector<bool> inserted;  // per variant line: added by a mutation
};

/// Statement gaps of the current variant: insertion sites whose preceding
/// line belongs to the base program. A gap that already holds inserted lines
/// still counts once, so repeated hits do not make a gap more likely.
inline std::vector<std::size_t> mutation_sites(const AttackState& st) {
  std::vector<std::size_t> out;
  for (std::size_t site : insertion_sites(st.current.text))
    if (site == 0 || site > st.inserted.size() || !st.inserted[site - 1]) out.push_back(site);
  return out;
}

/// Prepares a run over an already-verified base. Shares the compiled base
/// and scorer so that many runs can start from one compile.
inline AttackState init_attack(std::string_view base, const AttackConfig& config,
                               std::shared_ptr<const EquivalenceOracle> equivalence,
                               std::shared_ptr<const VariantScorer> scorer, std::string base_id = "base") {
  config.validate();
  AttackState st{config, std::string(base), line_count(base), std::move(equivalence), std::move(scorer),
                 MutationPool{}, Variant{}, Rng(config.seed), FreshNamer{}, std::vector<bool>(line_count(base), false)};
  for (std::string& line : candidate_lines(base)) st.pool.add(std::move(line), Origin::Source);
  for (const std::string& line : config.entropy)
    if (!detail::trim(line).empty()) st.pool.add(std::string(detail::trim(line)), Origin::Entropy);
  st.current.text = std::string(base);
  st.current.base_id = std::move(base_id);
  st.current.seed = config.seed;
  st.current.engine = std::string(engine_name(config.engine));
  st.current.score = st.scorer->score(base);
  return st;
}

/// Compiles the base once (throws InitializationError if it does not
/// compile), then prepares the run.
inline AttackState init_attack(std::string_view base, const AttackConfig& config, const CompilerAdapter& adapter,
                               std::string base_id = "base") {
  config.validate();
  auto eq = std::make_shared<const EquivalenceOracle>(adapter, base);
  auto scorer = std::make_shared<const VariantScorer>(base, config.engine, config.params, config.mml);
  return init_attack(base, config, std::move(eq), std::move(scorer), std::move(base_id));
}

struct MutationOutcome {
  bool accepted = false;
  std::string inserted;
  std::size_t line = 0;
};

/// Inserts `line` (renamed if it would collide) at a random statement gap
/// inside a function body of the current variant (see mutation_sites). Accepted iff the
/// result is equivalent to the base; accepted lines join the pool.
inline MutationOutcome mutate(AttackState& st, std::string_view line, Origin origin = Origin::Source) {
  SourceLines src = SourceLines::split(st.current.text);
  if (static_cast<double>(src.size() + 1) > st.config.growth_cap * static_cast<double>(st.base_lines))
    throw GrowthCapReached("variant would exceed " + std::to_string(st.config.growth_cap) + "x the base length");
  ++st.current.attempts;
  MutationOutcome out;
  const std::vector<std::size_t> sites = mutation_sites(st);
  if (sites.empty()) return out;
  out.inserted = st.namer.prepare(line, identifiers_in(st.current.text));
  const std::size_t after = sites[st.rng.below(sites.size())];
  out.line = insert_line(src, after, out.inserted);
  std::string candidate = src.join();
  if (!st.equivalence->matches(candidate)) return out;
  out.accepted = true;
  st.current.text = std::move(candidate);
  st.inserted.insert(st.inserted.begin() + static_cast<std::ptrdiff_t>(out.line - 1), true);
  st.current.insertions.push_back({out.inserted, out.line, origin, 0.0, 0.0});
  st.pool.add(out.inserted, Origin::Proven);
  return out;
}

/// Selects and mutates until the variant's score against the base is at or
/// below the target. Throws AttackFailure on timeout (no accepted mutation
/// within the configured window), growth cap, or an empty selectable pool.
inline Variant run_attack(AttackState& st) {
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  auto last_accept = started;
  const auto window = std::chrono::duration<double>(st.config.timeout_seconds);
  Variant best = st.current;
  while (st.current.score > st.config.target) {
    if (clock::now() - last_accept > window) throw AttackFailure(FailureReason::Timeout, best);
    MutationOutcome outcome;
    try {
      const MutationPool::Entry& pick = select(st.pool, st.rng);
      const std::string text = pick.text;
      outcome = mutate(st, text, pick.origin);
    } catch (const SelectionExhausted&) {
      throw AttackFailure(FailureReason::SelectionExhausted, best);
    } catch (const GrowthCapReached&) {
      throw AttackFailure(FailureReason::GrowthCap, best);
    }
    if (!outcome.accepted) {
      best.attempts = st.current.attempts;
      continue;
    }
    last_accept = clock::now();
    st.current.score = st.scorer->score(st.current.text);
    Insertion& ins = st.current.insertions.back();
    ins.score_after = st.current.score;
    ins.elapsed_seconds = std::chrono::duration<double>(last_accept - started).count();
    if (st.current.score <= best.score) best = st.current;
  }
  return st.current;
}

/// Outcome of one run inside mass_plagiarize.
struct VariantOutcome {
  bool ok = false;
  Variant variant;  // the result, or the best effort on failure
  std::string error;
};

/// `n` independent runs with seeds derived from config.seed. The base is
/// compiled once; runs execute in parallel and results keep run order.
inline std::vector<VariantOutcome> mass_plagiarize(std::string_view base, const AttackConfig& config,
                                                   const CompilerAdapter& adapter, std::size_t n,
                                                   const std::string& base_id = "base") {
  config.validate();
  auto eq = std::make_shared<const EquivalenceOracle>(adapter, base);
  auto scorer = std::make_shared<const VariantScorer>(base, config.engine, config.params, config.mml);
  std::vector<VariantOutcome> results(n);
  parallel_for(n, [&](std::size_t i) {
    AttackConfig cfg = config;
    cfg.seed = derive_seed(config.seed, i);
    AttackState st = init_attack(base, cfg, eq, scorer, base_id);
    try {
      results[i] = {true, run_attack(st), {}};
    } catch (const AttackFailure& f) {
      results[i] = {false, f.best(), f.what()};
    } catch (const std::exception& e) {
      results[i] = {false, st.current, e.what()};
    }
  });
  return results;
}

}  // namespace simforge
