#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "simforge/harness.hpp"
#include "simforge/process.hpp"

namespace simforge {

using nlohmann::json;

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline json spans_json(const std::vector<LineSpan>& spans) {
  json out = json::array();
  for (const LineSpan& s : spans) out.push_back({s.first, s.last});
  return out;
}

inline std::vector<LineSpan> spans_from(const json& j) {
  std::vector<LineSpan> out;
  for (const json& s : j) out.push_back({s.at(0).get<std::uint32_t>(), s.at(1).get<std::uint32_t>()});
  return out;
}

}  // namespace detail

inline std::string report_csv(const SimilarityReport& report) {
  std::string out = "doc_a,doc_b,pct_a,pct_b,score\n";
  for (const PairScore& p : report.pairs) {
    out += detail::csv_field(p.doc_a) + ',' + detail::csv_field(p.doc_b) + ',' + detail::fixed(p.pct_a) + ',' +
           detail::fixed(p.pct_b) + ',' + detail::fixed(p.score) + '\n';
  }
  return out;
}

inline json report_json(const SimilarityReport& report) {
  json pairs = json::array();
  for (const PairScore& p : report.pairs) {
    pairs.push_back({{"doc_a", p.doc_a},
                     {"doc_b", p.doc_b},
                     {"pct_a", p.pct_a},
                     {"pct_b", p.pct_b},
                     {"score", p.score},
                     {"matched", p.matched},
                     {"regions_a", detail::spans_json(p.regions_a)},
                     {"regions_b", detail::spans_json(p.regions_b)}});
  }
  return {{"engine", report.engine}, {"limit", report.limit}, {"pairs", std::move(pairs)}};
}

inline SimilarityReport report_from_json(const json& j) {
  SimilarityReport r;
  r.engine = j.at("engine").get<std::string>();
  r.limit = j.at("limit").get<std::size_t>();
  for (const json& p : j.at("pairs")) {
    r.pairs.push_back({p.at("doc_a").get<std::string>(), p.at("doc_b").get<std::string>(), p.at("pct_a").get<double>(),
                       p.at("pct_b").get<double>(), p.at("score").get<double>(), p.value("matched", std::size_t{0}),
                       detail::spans_from(p.value("regions_a", json::array())),
                       detail::spans_from(p.value("regions_b", json::array()))});
  }
  return r;
}

/// Lineage without wall-clock data, so that reruns serialize identically.
inline json lineage_json(const Lineage& l) {
  json ins = json::array();
  for (const Insertion& i : l.insertions)
    ins.push_back({{"text", i.text}, {"line", i.line}, {"origin", origin_name(i.origin)}, {"score_after", i.score_after}});
  return {{"doc_id", l.doc_id}, {"base_id", l.base_id}, {"mode", l.mode},         {"seed", l.seed},
          {"ok", l.ok},         {"error", l.error},     {"score", l.score},       {"attempts", l.attempts},
          {"base_lines", l.base_lines}, {"lines", l.lines}, {"insertions", std::move(ins)}};
}

inline Lineage lineage_from_json(const json& j) {
  Lineage l;
  l.doc_id = j.at("doc_id").get<std::string>();
  l.base_id = j.at("base_id").get<std::string>();
  l.mode = j.value("mode", std::string("mossad"));
  l.seed = j.value("seed", std::uint64_t{0});
  l.ok = j.value("ok", true);
  l.error = j.value("error", std::string());
  l.score = j.value("score", 0.0);
  l.attempts = j.value("attempts", std::size_t{0});
  l.base_lines = j.value("base_lines", std::size_t{0});
  l.lines = j.value("lines", std::size_t{0});
  for (const json& i : j.value("insertions", json::array())) {
    const std::string origin = i.value("origin", std::string("source"));
    l.insertions.push_back({i.at("text").get<std::string>(), i.at("line").get<std::size_t>(),
                            origin == "entropy" ? Origin::Entropy : origin == "proven" ? Origin::Proven : Origin::Source,
                            i.value("score_after", 0.0), 0.0});
  }
  return l;
}

/// Per-insertion acceptance times of each lineage entry.
inline json lineage_timings_json(const Lineage& l) {
  json t = json::array();
  for (const Insertion& i : l.insertions) t.push_back(i.elapsed_seconds);
  return {{"doc_id", l.doc_id}, {"accepted_at_seconds", std::move(t)}};
}

inline json histogram_json(const std::vector<HistogramBin>& bins) {
  json out = json::array();
  for (const HistogramBin& b : bins)
    out.push_back({{"lo", b.lo}, {"hi", b.hi}, {"legitimate", b.legitimate}, {"variant", b.variant}});
  return out;
}

/// Everything except timings.
inline json result_json(const ExperimentResult& r) {
  json j = {{"experiment", r.name},
            {"engine", r.engine},
            {"params", {{"k", r.params.k}, {"t", r.params.t}, {"mml", r.mml}}},
            {"seed", r.seed},
            {"manifest_digest", r.manifest_digest},
            {"failures", r.failures},
            {"warnings", r.warnings},
            {"variants", r.variants},
            {"histogram", histogram_json(r.histogram)},
            {"report", report_json(r.report)}};
  if (r.baseline) j["baseline"] = report_json(*r.baseline);
  json lin = json::array();
  for (const Lineage& l : r.lineage) lin.push_back(lineage_json(l));
  j["lineage"] = std::move(lin);
  return j;
}

inline ExperimentResult result_from_json(const json& j) {
  ExperimentResult r;
  r.name = j.at("experiment").get<std::string>();
  r.engine = j.at("engine").get<std::string>();
  const json& p = j.at("params");
  r.params = {p.at("k").get<std::size_t>(), p.at("t").get<std::size_t>()};
  r.mml = p.value("mml", std::size_t{9});
  r.seed = j.value("seed", std::uint64_t{0});
  r.manifest_digest = j.value("manifest_digest", std::string());
  r.failures = j.value("failures", std::size_t{0});
  r.warnings = j.value("warnings", std::vector<std::string>{});
  for (const json& v : j.value("variants", json::array())) r.variants.insert(v.get<std::string>());
  r.report = report_from_json(j.at("report"));
  if (j.contains("baseline")) r.baseline = report_from_json(j.at("baseline"));
  for (const json& l : j.value("lineage", json::array())) r.lineage.push_back(lineage_from_json(l));
  r.histogram = score_histogram(r.report, r.variants);
  return r;
}

inline json timings_json(const ExperimentResult& r) {
  json per = json::array();
  for (const Lineage& l : r.lineage) per.push_back(lineage_timings_json(l));
  return {{"experiment", r.name}, {"stages_seconds", r.timings}, {"lineage", std::move(per)}};
}

/// Stacked bar chart; light bars are legitimate pairs, dark bars pairs with a
/// variant.
inline std::string histogram_svg(const std::vector<HistogramBin>& bins) {
  constexpr int kWidth = 520, kHeight = 240, kLeft = 40, kBottom = 30, kTop = 10;
  std::size_t peak = 1;
  for (const HistogramBin& b : bins) peak = std::max(peak, b.legitimate + b.variant);
  const int bar = bins.empty() ? 0 : (kWidth - kLeft - 10) / static_cast<int>(bins.size());
  const double scale = static_cast<double>(kHeight - kBottom - kTop) / static_cast<double>(peak);
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
                    std::to_string(kHeight) + "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  const int base_y = kHeight - kBottom;
  svg += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(base_y) + "\" x2=\"" +
         std::to_string(kWidth - 10) + "\" y2=\"" + std::to_string(base_y) + "\" stroke=\"#000\"/>\n";
  svg += "<text x=\"4\" y=\"" + std::to_string(kTop + 8) + "\">" + std::to_string(peak) + "</text>\n";
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const HistogramBin& b = bins[i];
    const int x = kLeft + static_cast<int>(i) * bar + 2;
    const int h_legit = static_cast<int>(static_cast<double>(b.legitimate) * scale + 0.5);
    const int h_var = static_cast<int>(static_cast<double>(b.variant) * scale + 0.5);
    svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(base_y - h_legit) + "\" width=\"" +
           std::to_string(bar - 4) + "\" height=\"" + std::to_string(h_legit) + "\" fill=\"#c8c8c8\"/>\n";
    svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(base_y - h_legit - h_var) + "\" width=\"" +
           std::to_string(bar - 4) + "\" height=\"" + std::to_string(h_var) + "\" fill=\"#505050\"/>\n";
    svg += "<text x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(base_y + 14) + "\">" + std::to_string(b.lo) +
           "</text>\n";
  }
  svg += "<text x=\"" + std::to_string(kWidth / 2 - 20) + "\" y=\"" + std::to_string(kHeight - 2) +
         "\">score (%)</text>\n</svg>\n";
  return svg;
}

inline std::string report_html(const ExperimentResult& r) {
  std::string h = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + detail::html_escape(r.name) +
                  "</title>\n<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}"
                  "td,th{border:1px solid #999;padding:2px 8px;text-align:right}td.id{text-align:left}"
                  "tr.variant td{background:#eee}</style></head><body>\n";
  h += "<h1>" + detail::html_escape(r.name) + "</h1>\n";
  h += "<p>engine " + detail::html_escape(r.engine) + ", k=" + std::to_string(r.params.k) +
       ", t=" + std::to_string(r.params.t) + ", seed " + std::to_string(r.seed) + ", manifest " +
       detail::html_escape(r.manifest_digest) + "</p>\n";
  h += histogram_svg(r.histogram);
  if (!r.warnings.empty()) {
    h += "<h2>Warnings</h2>\n<ul>\n";
    for (const std::string& w : r.warnings) h += "<li>" + detail::html_escape(w) + "</li>\n";
    h += "</ul>\n";
  }
  auto table = [&](const SimilarityReport& rep, std::string_view title) {
    h += "<h2>" + std::string(title) + "</h2>\n<table>\n<tr><th>doc a</th><th>doc b</th><th>% a</th><th>% b</th>"
         "<th>score</th></tr>\n";
    for (const PairScore& p : rep.pairs) {
      const bool var = r.variants.contains(p.doc_a) || r.variants.contains(p.doc_b);
      h += std::string(var ? "<tr class=\"variant\">" : "<tr>") + "<td class=\"id\">" + detail::html_escape(p.doc_a) +
           "</td><td class=\"id\">" + detail::html_escape(p.doc_b) + "</td><td>" + detail::fixed(p.pct_a) +
           "</td><td>" + detail::fixed(p.pct_b) + "</td><td>" + detail::fixed(p.score) + "</td></tr>\n";
    }
    h += "</table>\n";
  };
  table(r.report, "Pairs");
  if (r.baseline) table(*r.baseline, "Source-level pairs");
  if (!r.lineage.empty()) {
    h += "<h2>Variants</h2>\n<table>\n<tr><th>variant</th><th>base</th><th>ok</th><th>score</th><th>insertions</th>"
         "<th>attempts</th><th>lines</th></tr>\n";
    for (const Lineage& l : r.lineage)
      h += "<tr><td class=\"id\">" + detail::html_escape(l.doc_id) + "</td><td class=\"id\">" +
           detail::html_escape(l.base_id) + "</td><td>" + (l.ok ? "yes" : "no") + "</td><td>" + detail::fixed(l.score) +
           "</td><td>" + std::to_string(l.insertions.size()) + "</td><td>" + std::to_string(l.attempts) + "</td><td>" +
           std::to_string(l.base_lines) + " &rarr; " + std::to_string(l.lines) + "</td></tr>\n";
    h += "</table>\n";
  }
  return h + "</body></html>\n";
}

/// Writes report.csv, report.json, report.html and timings.json into `dir`;
/// a countermeasure run also gets baseline.csv. Generated variants go under
/// `dir/variants` with lineage sidecars.
inline void write_result(const ExperimentResult& r, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_file(dir / "report.csv", report_csv(r.report));
  if (r.baseline) write_file(dir / "baseline.csv", report_csv(*r.baseline));
  write_file(dir / "report.json", result_json(r).dump(2) + "\n");
  write_file(dir / "report.html", report_html(r));
  write_file(dir / "timings.json", timings_json(r).dump(2) + "\n");
  for (const SourceDoc& d : r.generated) {
    const fs::path out = dir / "variants" / fs::path(d.doc_id);
    fs::create_directories(out.parent_path());
    write_file(out, d.text);
    for (const Lineage& l : r.lineage)
      if (l.doc_id == d.doc_id)
        write_file(out.parent_path() / lineage_sidecar_name(out.filename().string()), lineage_json(l).dump(2) + "\n");
  }
}

}  // namespace simforge
