#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "simforge/attack.hpp"
#include "simforge/equivalence.hpp"
#include "simforge/rng.hpp"
#include "simforge/source_edit.hpp"

namespace simforge {

struct WindowParams {
  std::size_t w_lines = 4;

  void validate() const {
    if (w_lines < 1) throw std::invalid_argument("window must span at least one line");
  }
};

/// Retry budget per window for the randomized ablation: ceil(w * log2 w),
/// but never less than one attempt.
inline std::size_t nondet_attempts(std::size_t w) {
  const double budget = std::ceil(static_cast<double>(w) * std::log2(static_cast<double>(w)));
  return std::max<std::size_t>(1, static_cast<std::size_t>(budget));
}

/// Insertion sites of `text` grouped into consecutive, non-overlapping
/// windows of `w_lines` source lines. Windows without a site are omitted.
inline std::vector<std::vector<std::size_t>> site_windows(std::string_view text, std::size_t w_lines) {
  std::map<std::size_t, std::vector<std::size_t>> by_window;
  for (std::size_t site : insertion_sites(text)) by_window[(site - 1) / w_lines].push_back(site);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [_, sites] : by_window) out.push_back(std::move(sites));
  return out;
}

namespace detail {

inline Variant ablation_variant(std::string_view base, std::string_view engine, std::uint64_t seed) {
  Variant v;
  v.text = std::string(base);
  v.base_id = "base";
  v.seed = seed;
  v.engine = std::string(engine);
  return v;
}

}  // namespace detail

/// Deterministic ablation: one fresh zero-initialized declaration per window,
/// trying the window's sites in order (at most `w_lines` of them) and
/// skipping the window if none stays equivalent. Output depends only on the
/// input program and parameters.
inline Variant mossad_det(std::string_view base, const WindowParams& params, const CompilerAdapter& adapter,
                          const FingerprintParams& fp = {}) {
  params.validate();
  const EquivalenceOracle eq(adapter, base);
  static constexpr std::string_view kTypes[] = {"int", "long", "unsigned"};
  const std::unordered_set<std::string> taken = identifiers_in(base);

  Variant v = detail::ablation_variant(base, "winnow", 0);
  SourceLines src = SourceLines::split(base);
  std::size_t offset = 0;
  std::size_t name_counter = 0;
  std::size_t accepted = 0;
  for (const std::vector<std::size_t>& window : site_windows(base, params.w_lines)) {
    std::string name;
    do {
      name = "tmp" + std::to_string(name_counter++);
    } while (taken.contains(name));
    const std::string decl = std::string(kTypes[accepted % 3]) + " " + name + " = 0;";
    const std::size_t tries = std::min(window.size(), params.w_lines);
    for (std::size_t t = 0; t < tries; ++t) {
      ++v.attempts;
      SourceLines trial = src;
      const std::size_t line = insert_line(trial, window[t] + offset, decl);
      std::string text = trial.join();
      if (!eq.matches(text)) continue;
      src = std::move(trial);
      v.text = std::move(text);
      v.insertions.push_back({decl, line, Origin::Entropy, 0.0, 0.0});
      ++offset;
      ++accepted;
      break;
    }
  }
  v.score = VariantScorer(base, Engine::Winnow, fp, 9).score(v.text);
  return v;
}

/// Randomized ablation: for each window, up to nondet_attempts(w) tries of a
/// random source line at a random site of that window; the first equivalent
/// try is kept and the walk moves to the next window.
inline Variant mossad_nondet(std::string_view base, const WindowParams& params, const CompilerAdapter& adapter,
                             std::uint64_t seed, const FingerprintParams& fp = {}) {
  params.validate();
  const EquivalenceOracle eq(adapter, base);
  Rng rng(seed);
  std::vector<std::string> lines;
  for (std::string& l : candidate_lines(base))
    if (is_selectable(l)) lines.push_back(std::move(l));

  Variant v = detail::ablation_variant(base, "winnow", seed);
  SourceLines src = SourceLines::split(base);
  FreshNamer namer;
  std::size_t offset = 0;
  if (!lines.empty()) {
    const std::size_t budget = nondet_attempts(params.w_lines);
    for (const std::vector<std::size_t>& window : site_windows(base, params.w_lines)) {
      for (std::size_t attempt = 0; attempt < budget; ++attempt) {
        ++v.attempts;
        const std::string& pick = lines[rng.below(lines.size())];
        const std::size_t site = window[rng.below(window.size())];
        const std::string stmt = namer.prepare(pick, identifiers_in(v.text));
        SourceLines trial = src;
        const std::size_t line = insert_line(trial, site + offset, stmt);
        std::string text = trial.join();
        if (!eq.matches(text)) continue;
        src = std::move(trial);
        v.text = std::move(text);
        v.insertions.push_back({stmt, line, Origin::Source, 0.0, 0.0});
        ++offset;
        break;
      }
    }
  }
  v.score = VariantScorer(base, Engine::Winnow, fp, 9).score(v.text);
  return v;
}

}  // namespace simforge
