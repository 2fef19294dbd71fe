#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "simforge/config.hpp"
#include "simforge/harness.hpp"
#include "simforge/report.hpp"

#ifndef SIMFORGE_DATA_DIR
#define SIMFORGE_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace simforge;

namespace {

constexpr int kOk = 0, kHardError = 1, kPartial = 2;

struct Options {
  std::map<std::string, std::string> raw;
  std::multimap<std::string, CLI::Option*> opts;
  std::string config_path;
  bool no_entropy = false;

  void add(CLI::App& app, const std::string& key, const std::string& help) {
    opts.emplace(key, app.add_option("--" + key, raw[key], help));
  }

  Settings settings() const {
    Settings s(config_path.empty() ? std::map<std::string, std::string>{} : load_config(config_path));
    for (const auto& [key, opt] : opts)
      if (opt->count() > 0) s.set_cli(key, raw.at(key));
    return s;
  }
};

std::vector<std::string> load_entropy(const Settings& s, bool disabled) {
  if (disabled) return {};
  const std::string path = s.get_or("entropy", std::string(SIMFORGE_DATA_DIR) + "/entropy.txt");
  if (path.empty() || path == "none") return {};
  std::vector<std::string> lines;
  for (const std::string& l : SourceLines::split(read_file(path)).lines)
    if (!detail::trim(l).empty()) lines.push_back(l);
  return lines;
}

ExperimentConfig build_config(const Settings& s, bool no_entropy) {
  ExperimentConfig cfg;
  cfg.params = {static_cast<std::size_t>(s.integer("k", 16)), static_cast<std::size_t>(s.integer("t", 30))};
  cfg.params.validate();
  cfg.engine = parse_engine(s.get_or("engine", "winnow"));
  cfg.mml = static_cast<std::size_t>(s.integer("mml", 9));
  cfg.limit = static_cast<std::size_t>(s.integer("limit", 250));
  cfg.seed = s.integer("seed", 0);
  cfg.window.w_lines = static_cast<std::size_t>(s.integer("w-lines", 4));
  cfg.window.validate();
  cfg.mode = parse_attack_mode(s.get_or("mode", "mossad"));

  cfg.adapter.compiler = resolve_compiler(s.get("cc"), std::nullopt);
  cfg.adapter.opt_level = s.get_or("opt-level", "3");
  cfg.adapter.emit = parse_emit_mode(s.get_or("emit", "asm"));
  cfg.adapter.timeout_seconds = s.number("compile-timeout", 60.0);

  cfg.attack.target = s.number("target", 25.0);
  cfg.attack.timeout_seconds = s.number("timeout", 300.0);
  cfg.attack.growth_cap = s.number("growth-cap", 2.5);
  cfg.attack.seed = cfg.seed;
  cfg.attack.engine = cfg.engine;
  cfg.attack.params = cfg.params;
  cfg.attack.mml = cfg.mml;
  cfg.attack.entropy = load_entropy(s, no_entropy);
  cfg.attack.validate();
  return cfg;
}

void print_top(const SimilarityReport& report, std::size_t n) {
  for (std::size_t i = 0; i < std::min(n, report.pairs.size()); ++i) {
    const PairScore& p = report.pairs[i];
    std::printf("%7.2f  %s  %s\n", p.score, p.doc_a.c_str(), p.doc_b.c_str());
  }
}

int finish(const ExperimentResult& r, const fs::path& out) {
  write_result(r, out);
  print_top(r.report, 10);
  for (const std::string& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("%zu pairs written to %s\n", r.report.pairs.size(), out.string().c_str());
  return r.failures > 0 || !r.warnings.empty() ? kPartial : kOk;
}

void print_lineage(const Lineage& l) {
  std::printf("%s  %s  score %.2f  insertions %zu  attempts %zu  lines %zu -> %zu%s%s\n", l.doc_id.c_str(),
              l.ok ? "ok" : "FAILED", l.score, l.insertions.size(), l.attempts, l.base_lines, l.lines,
              l.ok ? "" : "  ", l.error.c_str());
}

/// Writes variants next to each other in `out` with lineage sidecars and a
/// shared timings file.
int write_variants(const std::vector<std::pair<Lineage, std::optional<std::string>>>& made, const fs::path& out) {
  fs::create_directories(out);
  nlohmann::json timings = nlohmann::json::array();
  int code = kOk;
  for (const auto& [lin, text] : made) {
    print_lineage(lin);
    if (!lin.ok) code = kPartial;
    if (!text) {
      code = kHardError;
      continue;
    }
    const fs::path file = out / fs::path(lin.doc_id).filename();
    write_file(file, *text);
    write_file(out / lineage_sidecar_name(file.filename().string()), lineage_json(lin).dump(2) + "\n");
    timings.push_back(lineage_timings_json(lin));
  }
  write_file(out / "timings.json", timings.dump(2) + "\n");
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simforge: token-fingerprint similarity detection and the insertion attack against it"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  o.add(app, "k", "noise threshold in tokens (default 16)");
  o.add(app, "t", "guarantee threshold in tokens (default 30)");
  o.add(app, "engine", "winnow or gst (default winnow)");
  o.add(app, "seed", "master seed (default 0)");
  o.add(app, "limit", "pairs kept in a report (default 250)");
  o.add(app, "out", "output directory (default simforge-out)");
  o.add(app, "cc", "compiler used for equivalence checks (default cc)");
  o.add(app, "opt-level", "optimization level passed as -O<level> (default 3)");
  o.add(app, "emit", "compare asm or obj artifacts (default asm)");
  o.add(app, "compile-timeout", "seconds before a compile is killed (default 60)");
  o.add(app, "target", "attack stops at or below this score (default 25)");
  o.add(app, "entropy", "extra candidate lines for the attack (default: bundled file)");
  o.add(app, "timeout", "seconds without an accepted mutation before giving up (default 300)");
  o.add(app, "growth-cap", "maximum variant length as a multiple of the base (default 2.5)");
  o.add(app, "mml", "minimum match length for gst (default 9)");
  o.add(app, "w-lines", "window size in lines for the ablations (default 4)");
  app.add_option("--config", o.config_path, "key = value settings file")->check(CLI::ExistingFile);
  app.add_flag("--no-entropy", o.no_entropy, "attack with source lines only");

  std::string input;
  std::size_t plagiarize = 0;
  std::size_t variants = 0;
  std::string boilerplate;

  CLI::App* detect = app.add_subcommand("detect", "rank all pairs of a directory of C files");
  detect->add_option("dir", input, "corpus directory")->required()->check(CLI::ExistingDirectory);
  detect->add_option("--plagiarize", plagiarize, "attack this many random documents first");
  detect->add_option("--boilerplate", boilerplate, "file whose fingerprints are ignored")->check(CLI::ExistingFile);
  o.add(*detect, "mode", "attacker for --plagiarize: mossad, det or nondet");

  CLI::App* attack = app.add_subcommand("attack", "produce an equivalent variant that scores below the target");
  attack->add_option("file", input, "C source to attack")->required()->check(CLI::ExistingFile);
  attack->add_option("--variants", variants, "independent variants to produce (default 1)");

  CLI::App* ablate = app.add_subcommand("ablate", "run one of the window-targeting ablations");
  std::string ablation;
  ablate->add_option("kind", ablation, "det or nondet")->required()->check(CLI::IsMember({"det", "nondet"}));
  ablate->add_option("file", input, "C source")->required()->check(CLI::ExistingFile);
  ablate->add_option("--variants", variants, "variants to produce (nondet only, default 1)");

  CLI::App* mass = app.add_subcommand("mass", "many variants of one base, ranked together");
  mass->add_option("file", input, "base C source")->required()->check(CLI::ExistingFile);
  mass->add_option("--variants", variants, "number of variants (default 10)");
  o.add(*mass, "mode", "mossad, nondet or det (det is refused)");

  CLI::App* counter = app.add_subcommand("countermeasure", "rank optimized assembly instead of source");
  counter->add_option("dir", input, "corpus directory")->required()->check(CLI::ExistingDirectory);
  counter->add_option("--plagiarize", plagiarize, "attack this many random documents first");
  o.add(*counter, "mode", "attacker for --plagiarize: mossad, det or nondet");

  CLI::App* report = app.add_subcommand("report", "re-render CSV and HTML from a report.json");
  report->add_option("json", input, "report.json written by an earlier run")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const Settings settings = o.settings();
    const fs::path out = settings.get_or("out", "simforge-out");

    if (report->parsed()) {
      const ExperimentResult r = result_from_json(nlohmann::json::parse(read_file(input)));
      const fs::path dir = settings.get("out") ? out : fs::path(input).parent_path();
      fs::create_directories(dir);
      write_file(dir / "report.csv", report_csv(r.report));
      if (r.baseline) write_file(dir / "baseline.csv", report_csv(*r.baseline));
      write_file(dir / "report.html", report_html(r));
      std::printf("rendered %zu pairs into %s\n", r.report.pairs.size(), dir.string().c_str());
      return kOk;
    }

    ExperimentConfig cfg = build_config(settings, o.no_entropy);

    if (detect->parsed()) {
      if (!boilerplate.empty()) cfg.boilerplate = read_file(boilerplate);
      const Corpus corpus = ingest(input);
      ExperimentResult r = plagiarize > 0 ? run_individual_plagiarism(corpus, plagiarize, cfg) : run_detect(corpus, cfg);
      return finish(r, out);
    }

    if (counter->parsed()) {
      const Corpus corpus = ingest(input);
      if (plagiarize == 0) return finish(run_countermeasure(corpus, cfg), out);
      const ExperimentResult attacked = run_individual_plagiarism(corpus, plagiarize, cfg);
      std::vector<SourceDoc> docs = corpus.sources();
      docs.insert(docs.end(), attacked.generated.begin(), attacked.generated.end());
      ExperimentResult r = run_countermeasure(docs, attacked.variants, cfg, corpus.manifest_digest);
      r.lineage = attacked.lineage;
      r.generated = attacked.generated;
      r.failures += attacked.failures;
      r.warnings.insert(r.warnings.begin(), attacked.warnings.begin(), attacked.warnings.end());
      r.timings["attack"] = attacked.timings.at("attack");
      return finish(r, out);
    }

    if (mass->parsed()) {
      const std::string text = read_file(input);
      const std::string id = fs::path(input).filename().string();
      return finish(run_mass_plagiarism(id, text, variants == 0 ? 10 : variants, cfg), out);
    }

    const std::string text = read_file(input);
    const std::string id = fs::path(input).filename().string();
    const std::size_t n = variants == 0 ? 1 : variants;
    if (ablate->parsed()) {
      cfg.mode = parse_attack_mode(ablation);
      if (cfg.mode == AttackMode::Det && n > 1) {
        std::fprintf(stderr,
                     "error: the deterministic ablation always produces the same file; --variants must be 1\n");
        return kHardError;
      }
    } else {
      cfg.mode = AttackMode::Mossad;
    }
    const std::string tag(attack_mode_name(cfg.mode));
    std::vector<std::pair<Lineage, std::optional<std::string>>> made(n);
    parallel_for(n, [&](std::size_t i) {
      const std::string vid = detail::variant_id(id, n == 1 ? tag : tag + std::to_string(i));
      made[i] = produce_variant(id, text, vid, cfg, n == 1 ? cfg.seed : derive_seed(cfg.seed, i));
    });
    return write_variants(made, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kHardError;
  }
}
