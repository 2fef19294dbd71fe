#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "simforge/ablation.hpp"
#include "simforge/attack.hpp"
#include "simforge/detector.hpp"
#include "simforge/equivalence.hpp"
#include "simforge/fingerprint.hpp"
#include "simforge/gst.hpp"
#include "simforge/lexnorm.hpp"
#include "simforge/parallel.hpp"
#include "simforge/process.hpp"
#include "simforge/rng.hpp"

namespace simforge {

struct SourceDoc {
  std::string doc_id;
  std::string text;
};

struct CorpusDocument {
  std::string doc_id;  // path relative to the corpus root, '/' separated
  std::filesystem::path path;
  std::string text;
  std::string digest;
  std::optional<std::string> variant_of;  // from a `<file>.lineage.json` sidecar
};

struct Corpus {
  std::filesystem::path root;
  std::vector<CorpusDocument> documents;
  std::string manifest;
  std::string manifest_digest;
  std::vector<std::string> warnings;

  std::size_t size() const { return documents.size(); }

  const CorpusDocument& at(const std::string& id) const {
    for (const CorpusDocument& d : documents)
      if (d.doc_id == id) return d;
    throw DocumentNotFound("corpus: unknown document '" + id + "'");
  }

  std::vector<SourceDoc> sources() const {
    std::vector<SourceDoc> out;
    for (const CorpusDocument& d : documents) out.push_back({d.doc_id, d.text});
    return out;
  }

  std::set<std::string> variant_ids() const {
    std::set<std::string> out;
    for (const CorpusDocument& d : documents)
      if (d.variant_of) out.insert(d.doc_id);
    return out;
  }
};

inline std::string lineage_sidecar_name(const std::string& file_name) { return file_name + ".lineage.json"; }

/// One line per document: id, content digest, size and, for variants, the base.
inline std::string manifest_text(const std::vector<CorpusDocument>& docs) {
  std::string out;
  for (const CorpusDocument& d : docs) {
    out += d.doc_id + '\t' + d.digest + '\t' + std::to_string(d.text.size()) + '\t' + d.variant_of.value_or("-");
    out += '\n';
  }
  return out;
}

/// Loads every `.c` file under `dir`, ordered by relative path. Unreadable
/// files are skipped with a warning; a directory without any `.c` file is an
/// error.
inline Corpus ingest(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("ingest: not a directory: " + dir.string());
  Corpus corpus;
  corpus.root = dir;
  std::vector<fs::path> files;
  for (const fs::directory_entry& e : fs::recursive_directory_iterator(dir, fs::directory_options::skip_permission_denied))
    if (e.is_regular_file() && e.path().extension() == ".c") files.push_back(e.path());
  std::vector<std::pair<std::string, fs::path>> named;
  for (const fs::path& p : files) named.emplace_back(fs::relative(p, dir).generic_string(), p);
  std::sort(named.begin(), named.end());
  for (auto& [id, path] : named) {
    CorpusDocument doc{id, path, {}, {}, std::nullopt};
    try {
      doc.text = read_file(path);
    } catch (const std::exception& e) {
      corpus.warnings.push_back("skipped " + id + ": " + e.what());
      continue;
    }
    doc.digest = content_digest(doc.text);
    const fs::path sidecar = path.parent_path() / lineage_sidecar_name(path.filename().string());
    if (fs::exists(sidecar)) {
      try {
        const nlohmann::json j = nlohmann::json::parse(read_file(sidecar));
        if (j.contains("base_id") && j["base_id"].is_string()) doc.variant_of = j["base_id"].get<std::string>();
      } catch (const std::exception& e) {
        corpus.warnings.push_back("ignored lineage for " + id + ": " + e.what());
      }
    }
    corpus.documents.push_back(std::move(doc));
  }
  if (corpus.documents.empty()) throw std::runtime_error("ingest: no readable .c files in " + dir.string());
  corpus.manifest = manifest_text(corpus.documents);
  corpus.manifest_digest = content_digest(corpus.manifest);
  return corpus;
}

enum class AttackMode { Mossad, Det, Nondet };

inline std::string_view attack_mode_name(AttackMode m) {
  switch (m) {
    case AttackMode::Mossad: return "mossad";
    case AttackMode::Det: return "det";
    case AttackMode::Nondet: return "nondet";
  }
  return "?";
}

inline AttackMode parse_attack_mode(std::string_view s) {
  if (s == "mossad") return AttackMode::Mossad;
  if (s == "det") return AttackMode::Det;
  if (s == "nondet") return AttackMode::Nondet;
  throw std::invalid_argument("unknown attack mode '" + std::string(s) + "' (expected mossad, det or nondet)");
}

struct ExperimentConfig {
  Engine engine = Engine::Winnow;
  FingerprintParams params;
  std::size_t mml = 9;
  std::size_t limit = 250;
  std::uint64_t seed = 0;
  std::optional<std::string> boilerplate;  // source text whose prints are ignored
  AttackConfig attack;
  AttackMode mode = AttackMode::Mossad;
  WindowParams window;
  CompilerAdapter adapter;
};

/// How one generated document came about.
struct Lineage {
  std::string doc_id;
  std::string base_id;
  std::string mode = "mossad";
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double score = 0.0;  // against the base, engine of the attack
  std::size_t attempts = 0;
  std::size_t base_lines = 0;
  std::size_t lines = 0;
  std::vector<Insertion> insertions;
};

struct HistogramBin {
  int lo = 0;
  int hi = 10;  // exclusive, except the last bin which includes 100
  std::size_t legitimate = 0;
  std::size_t variant = 0;
};

struct ExperimentResult {
  std::string name;
  std::string engine = "winnow";
  FingerprintParams params;
  std::size_t mml = 9;
  std::uint64_t seed = 0;
  std::string manifest_digest;
  SimilarityReport report;
  std::optional<SimilarityReport> baseline;  // source-level report beside an assembly-level one
  std::vector<Lineage> lineage;
  std::vector<SourceDoc> generated;
  std::set<std::string> variants;
  std::vector<HistogramBin> histogram;
  std::vector<std::string> warnings;
  std::size_t failures = 0;
  std::map<std::string, double> timings;
};

/// Ten bins of width 10; a pair is variant-involved iff either side is in
/// `variants`.
inline std::vector<HistogramBin> score_histogram(const SimilarityReport& report, const std::set<std::string>& variants) {
  std::vector<HistogramBin> bins(10);
  for (int i = 0; i < 10; ++i) bins[i] = {i * 10, i * 10 + 10, 0, 0};
  for (const PairScore& p : report.pairs) {
    const int idx = std::clamp(static_cast<int>(p.score / 10.0), 0, 9);
    if (variants.contains(p.doc_a) || variants.contains(p.doc_b)) ++bins[idx].variant;
    else ++bins[idx].legitimate;
  }
  return bins;
}

/// Ranks already tokenized documents with the configured engine.
inline SimilarityReport rank_documents(const std::vector<NormalizedDocument>& docs, const ExperimentConfig& cfg,
                                       const std::optional<NormalizedDocument>& boilerplate = std::nullopt) {
  if (cfg.engine == Engine::Gst) return rank_all_gst(docs, cfg.mml, cfg.limit);
  std::vector<FingerprintSet> sets(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { sets[i] = fingerprint_document(docs[i], cfg.params); });
  std::optional<FingerprintSet> bp;
  if (boilerplate) bp = fingerprint_document(*boilerplate, cfg.params);
  return rank_all(build_index(sets, bp), cfg.limit);
}

inline SimilarityReport rank_sources(const std::vector<SourceDoc>& docs, const ExperimentConfig& cfg) {
  std::vector<NormalizedDocument> toks(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { toks[i] = tokenize_c(docs[i].text, docs[i].doc_id); });
  std::optional<NormalizedDocument> bp;
  if (cfg.boilerplate) bp = tokenize_c(*cfg.boilerplate, "<boilerplate>");
  return rank_documents(toks, cfg, bp);
}

namespace detail {

using clock = std::chrono::steady_clock;

inline double seconds_since(clock::time_point t0) {
  return std::chrono::duration<double>(clock::now() - t0).count();
}

/// `dir/name.c` -> `dir/name.<tag>.c`
inline std::string variant_id(const std::string& base_id, const std::string& tag) {
  const std::string stem = base_id.size() > 2 && base_id.ends_with(".c") ? base_id.substr(0, base_id.size() - 2) : base_id;
  return stem + "." + tag + ".c";
}

inline Lineage lineage_of(const Variant& v, const std::string& doc_id, const std::string& base_id, AttackMode mode,
                          std::size_t base_lines) {
  Lineage l;
  l.doc_id = doc_id;
  l.base_id = base_id;
  l.mode = std::string(attack_mode_name(mode));
  l.seed = v.seed;
  l.score = v.score;
  l.attempts = v.attempts;
  l.base_lines = base_lines;
  l.lines = line_count(v.text);
  l.insertions = v.insertions;
  return l;
}

}  // namespace detail

/// One variant of `base` with the configured attacker. Attack failures are
/// reported through the lineage and carry the best variant found; a base
/// that does not compile yields no text.
inline std::pair<Lineage, std::optional<std::string>> produce_variant(const std::string& base_id,
                                                                       std::string_view base, const std::string& doc_id,
                                                                       const ExperimentConfig& cfg,
                                                                       std::uint64_t seed) {
  const std::size_t base_lines = line_count(base);
  try {
    if (cfg.mode == AttackMode::Det) {
      Variant v = mossad_det(base, cfg.window, cfg.adapter, cfg.attack.params);
      return {detail::lineage_of(v, doc_id, base_id, cfg.mode, base_lines), v.text};
    }
    if (cfg.mode == AttackMode::Nondet) {
      Variant v = mossad_nondet(base, cfg.window, cfg.adapter, seed, cfg.attack.params);
      return {detail::lineage_of(v, doc_id, base_id, cfg.mode, base_lines), v.text};
    }
    AttackConfig ac = cfg.attack;
    ac.seed = seed;
    AttackState st = init_attack(base, ac, cfg.adapter, base_id);
    try {
      Variant v = run_attack(st);
      return {detail::lineage_of(v, doc_id, base_id, cfg.mode, base_lines), v.text};
    } catch (const AttackFailure& f) {
      Lineage l = detail::lineage_of(f.best(), doc_id, base_id, cfg.mode, base_lines);
      l.ok = false;
      l.error = f.what();
      return {std::move(l), f.best().text};
    }
  } catch (const CompilerUnavailable&) {
    throw;
  } catch (const std::exception& e) {
    Lineage l;
    l.doc_id = doc_id;
    l.base_id = base_id;
    l.mode = std::string(attack_mode_name(cfg.mode));
    l.seed = seed;
    l.ok = false;
    l.error = e.what();
    l.base_lines = base_lines;
    return {std::move(l), std::nullopt};
  }
}

inline ExperimentResult make_result(std::string name, const ExperimentConfig& cfg, std::string manifest_digest) {
  ExperimentResult r;
  r.name = std::move(name);
  r.engine = std::string(engine_name(cfg.engine));
  r.params = cfg.params;
  r.mml = cfg.mml;
  r.seed = cfg.seed;
  r.manifest_digest = std::move(manifest_digest);
  return r;
}

/// Ranks every pair of the corpus.
inline ExperimentResult run_detect(const Corpus& corpus, const ExperimentConfig& cfg) {
  ExperimentResult r = make_result("detect", cfg, corpus.manifest_digest);
  r.warnings = corpus.warnings;
  r.variants = corpus.variant_ids();
  const auto t0 = detail::clock::now();
  r.report = rank_sources(corpus.sources(), cfg);
  r.timings["rank"] = detail::seconds_since(t0);
  r.histogram = score_histogram(r.report, r.variants);
  return r;
}

/// Picks `n_bases` seeded-random documents, attacks each once, adds the
/// variants to the corpus and ranks everything.
inline ExperimentResult run_individual_plagiarism(const Corpus& corpus, std::size_t n_bases,
                                                  const ExperimentConfig& cfg) {
  std::vector<std::size_t> legit;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (!corpus.documents[i].variant_of) legit.push_back(i);
  if (n_bases > 0 && n_bases >= legit.size())
    throw std::invalid_argument("plagiarism: need more than " + std::to_string(n_bases) + " original documents, have " +
                                std::to_string(legit.size()));
  ExperimentResult r = make_result("plagiarize", cfg, corpus.manifest_digest);
  r.warnings = corpus.warnings;
  r.variants = corpus.variant_ids();

  Rng rng(derive_seed(cfg.seed, 0));
  for (std::size_t i = 0; i < n_bases; ++i) std::swap(legit[i], legit[i + rng.below(legit.size() - i)]);
  legit.resize(n_bases);

  const auto t0 = detail::clock::now();
  std::vector<std::pair<Lineage, std::optional<std::string>>> made(n_bases);
  parallel_for(n_bases, [&](std::size_t i) {
    const CorpusDocument& base = corpus.documents[legit[i]];
    made[i] = produce_variant(base.doc_id, base.text, detail::variant_id(base.doc_id, std::string(attack_mode_name(cfg.mode))),
                              cfg, derive_seed(cfg.seed, i + 1));
  });
  r.timings["attack"] = detail::seconds_since(t0);

  std::vector<SourceDoc> docs = corpus.sources();
  for (auto& [lin, text] : made) {
    if (!lin.ok) {
      ++r.failures;
      r.warnings.push_back(lin.base_id + ": " + lin.error);
    }
    if (text) {
      docs.push_back({lin.doc_id, *text});
      r.generated.push_back({lin.doc_id, *text});
      r.variants.insert(lin.doc_id);
    }
    r.lineage.push_back(std::move(lin));
  }
  const auto t1 = detail::clock::now();
  r.report = rank_sources(docs, cfg);
  r.timings["rank"] = detail::seconds_since(t1);
  r.histogram = score_histogram(r.report, r.variants);
  return r;
}

/// `n` variants of one base, then a ranking of base and variants together.
/// The deterministic ablation cannot produce distinct variants and is refused.
inline ExperimentResult run_mass_plagiarism(const std::string& base_id, std::string_view base, std::size_t n,
                                            const ExperimentConfig& cfg) {
  if (cfg.mode == AttackMode::Det)
    throw std::invalid_argument(
        "mass plagiarism with the deterministic ablation is refused: every variant would be the same file");
  ExperimentResult r = make_result("mass", cfg, content_digest(base));
  const auto t0 = detail::clock::now();
  std::vector<std::pair<Lineage, std::optional<std::string>>> made(n);
  if (cfg.mode == AttackMode::Mossad) {
    AttackConfig ac = cfg.attack;
    ac.seed = cfg.seed;
    const std::vector<VariantOutcome> outs = mass_plagiarize(base, ac, cfg.adapter, n, base_id);
    for (std::size_t i = 0; i < n; ++i) {
      Lineage l = detail::lineage_of(outs[i].variant, detail::variant_id(base_id, "mossad" + std::to_string(i)), base_id,
                                     cfg.mode, line_count(base));
      l.ok = outs[i].ok;
      l.error = outs[i].error;
      made[i] = {std::move(l), outs[i].variant.text};
    }
  } else {
    parallel_for(n, [&](std::size_t i) {
      made[i] = produce_variant(base_id, base, detail::variant_id(base_id, "nondet" + std::to_string(i)), cfg,
                                derive_seed(cfg.seed, i));
    });
  }
  r.timings["attack"] = detail::seconds_since(t0);

  std::vector<SourceDoc> docs{{base_id, std::string(base)}};
  for (auto& [lin, text] : made) {
    if (!lin.ok) {
      ++r.failures;
      r.warnings.push_back(lin.doc_id + ": " + lin.error);
    }
    if (text) {
      docs.push_back({lin.doc_id, *text});
      r.generated.push_back({lin.doc_id, *text});
      r.variants.insert(lin.doc_id);
    }
    r.lineage.push_back(std::move(lin));
  }
  const auto t1 = detail::clock::now();
  r.report = rank_sources(docs, cfg);
  r.timings["rank"] = detail::seconds_since(t1);
  r.histogram = score_histogram(r.report, r.variants);
  return r;
}

/// Compiles every document to optimized assembly and ranks the assembly token
/// streams. The source-level ranking of the same documents is kept as the
/// baseline. Documents that do not compile are left out with a warning.
inline ExperimentResult run_countermeasure(const std::vector<SourceDoc>& docs, const std::set<std::string>& variants,
                                           const ExperimentConfig& cfg, std::string manifest_digest) {
  ExperimentResult r = make_result("countermeasure", cfg, std::move(manifest_digest));
  CompilerAdapter adapter = cfg.adapter;
  adapter.emit = EmitMode::Assembly;
  const auto t0 = detail::clock::now();
  std::vector<CompileArtifact> arts(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { arts[i] = compile(adapter, docs[i].text); });
  r.timings["compile"] = detail::seconds_since(t0);

  std::vector<SourceDoc> kept;
  std::vector<NormalizedDocument> asm_docs;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!arts[i].success) {
      r.warnings.push_back("excluded " + docs[i].doc_id + ": does not compile");
      continue;
    }
    kept.push_back(docs[i]);
    asm_docs.push_back(tokenize_asm(arts[i].bytes, docs[i].doc_id));
  }
  for (const SourceDoc& d : kept)
    if (variants.contains(d.doc_id)) r.variants.insert(d.doc_id);
  const auto t1 = detail::clock::now();
  ExperimentConfig asm_cfg = cfg;
  asm_cfg.boilerplate.reset();
  r.report = rank_documents(asm_docs, asm_cfg);
  r.baseline = rank_sources(kept, cfg);
  r.timings["rank"] = detail::seconds_since(t1);
  r.histogram = score_histogram(r.report, r.variants);
  return r;
}

inline ExperimentResult run_countermeasure(const Corpus& corpus, const ExperimentConfig& cfg) {
  ExperimentResult r = run_countermeasure(corpus.sources(), corpus.variant_ids(), cfg, corpus.manifest_digest);
  r.warnings.insert(r.warnings.begin(), corpus.warnings.begin(), corpus.warnings.end());
  return r;
}

/// Finds the row for an unordered pair, if the report kept it.
inline const PairScore* find_pair(const SimilarityReport& report, const std::string& a, const std::string& b) {
  for (const PairScore& p : report.pairs)
    if ((p.doc_a == a && p.doc_b == b) || (p.doc_a == b && p.doc_b == a)) return &p;
  return nullptr;
}

}  // namespace simforge
