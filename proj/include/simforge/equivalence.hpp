#pragma once

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simforge/error.hpp"
#include "simforge/lexnorm.hpp"
#include "simforge/process.hpp"

namespace simforge {

enum class EmitMode { Assembly, Object };

inline std::string_view emit_mode_name(EmitMode m) { return m == EmitMode::Assembly ? "asm" : "obj"; }

inline EmitMode parse_emit_mode(std::string_view s) {
  if (s == "asm" || s == "assembly") return EmitMode::Assembly;
  if (s == "obj" || s == "object") return EmitMode::Object;
  throw std::invalid_argument("unknown emit mode '" + std::string(s) + "' (expected asm or obj)");
}

/// How sources are compiled for equivalence checks. Immutable once built;
/// one adapter is shared by both sides of every comparison.
struct CompilerAdapter {
  std::string compiler = "cc";
  std::string opt_level = "3";
  EmitMode emit = EmitMode::Assembly;
  double timeout_seconds = 60.0;
  std::vector<std::string> extra_flags;

  std::vector<std::string> command(const std::string& input, const std::string& output) const {
    std::vector<std::string> argv = {compiler, "-O" + opt_level, "-g0", "-w", "-fno-ident",
                                     "-fno-asynchronous-unwind-tables"};
    argv.insert(argv.end(), extra_flags.begin(), extra_flags.end());
    argv.push_back(emit == EmitMode::Assembly ? "-S" : "-c");
    argv.insert(argv.end(), {"-x", "c", "-o", output, input});
    return argv;
  }
};

/// Compiler choice: SIMFORGE_CC wins over an explicit flag, which wins over
/// the config file; `cc` otherwise.
inline std::string resolve_compiler(const std::optional<std::string>& flag,
                                    const std::optional<std::string>& config) {
  if (const char* env = std::getenv("SIMFORGE_CC"); env != nullptr && *env != '\0') return env;
  if (flag && !flag->empty()) return *flag;
  if (config && !config->empty()) return *config;
  return "cc";
}

struct CompileArtifact {
  bool success = false;
  std::string bytes;  // normalized emitted code
  std::string diagnostics;
};

/// Drops comments, blank lines and build-metadata directives; trims each line.
inline std::string normalize_assembly(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (is_build_metadata_directive(line)) continue;
    const std::string_view body = detail::trim(detail::strip_asm_comment(line));
    if (body.empty()) continue;
    out.append(body);
    out.push_back('\n');
  }
  return out;
}

namespace detail {

template <typename T>
bool read_le(std::string_view buf, std::size_t at, T& out) {
  if (at > buf.size() || buf.size() - at < sizeof(T)) return false;
  std::memcpy(&out, buf.data() + at, sizeof(T));
  return true;
}

}  // namespace detail

/// Loadable content of a 64-bit little-endian ELF relocatable: the payload of
/// every code/data section plus its relocations (offset, type, addend, symbol
/// name). Headers, notes, comments and debug sections are ignored. Anything
/// that is not ELF64 is returned unchanged.
inline std::string normalize_object(std::string_view obj) {
  if (obj.size() < 64 || obj.substr(0, 4) != "\x7f"
                                             "ELF" ||
      obj[4] != 2 || obj[5] != 1)
    return std::string(obj);
  std::uint64_t shoff = 0;
  std::uint16_t shentsize = 0, shnum = 0, shstrndx = 0;
  detail::read_le(obj, 0x28, shoff);
  detail::read_le(obj, 0x3a, shentsize);
  detail::read_le(obj, 0x3c, shnum);
  detail::read_le(obj, 0x3e, shstrndx);
  struct Section {
    std::uint32_t name, type;
    std::uint64_t offset, size, entsize;
    std::uint32_t link, info;
  };
  std::vector<Section> secs;
  for (std::uint16_t i = 0; i < shnum; ++i) {
    const std::size_t base = shoff + static_cast<std::size_t>(i) * shentsize;
    Section s{};
    if (!detail::read_le(obj, base, s.name) || !detail::read_le(obj, base + 4, s.type) ||
        !detail::read_le(obj, base + 0x18, s.offset) || !detail::read_le(obj, base + 0x20, s.size) ||
        !detail::read_le(obj, base + 0x28, s.link) || !detail::read_le(obj, base + 0x2c, s.info) ||
        !detail::read_le(obj, base + 0x38, s.entsize))
      return std::string(obj);
    secs.push_back(s);
  }
  auto payload = [&](const Section& s) -> std::string_view {
    if (s.offset > obj.size() || obj.size() - s.offset < s.size) return {};
    return obj.substr(s.offset, s.size);
  };
  auto cstr = [](std::string_view table, std::size_t at) -> std::string_view {
    if (at >= table.size()) return {};
    const std::size_t end = table.find('\0', at);
    return table.substr(at, end == std::string_view::npos ? std::string_view::npos : end - at);
  };
  const std::string_view shstr = shstrndx < secs.size() ? payload(secs[shstrndx]) : std::string_view{};
  auto ignored = [](std::string_view name) {
    for (std::string_view p : {".comment", ".note", ".debug", ".gnu_debug", ".llvm_addrsig", ".eh_frame",
                               ".rela.eh_frame", ".rela.debug"})
      if (name.substr(0, p.size()) == p) return true;
    return false;
  };
  constexpr std::uint32_t kProgbits = 1, kRela = 4, kNobits = 8, kSymtab = 2;

  std::string out;
  for (const Section& s : secs) {
    const std::string_view name = cstr(shstr, s.name);
    if (ignored(name)) continue;
    if (s.type == kProgbits) {
      out.append(name).append("\n").append(payload(s)).append("\n");
    } else if (s.type == kNobits) {
      out.append(name).append(" nobits ").append(std::to_string(s.size)).append("\n");
    } else if (s.type == kRela && s.link < secs.size() && secs[s.link].type == kSymtab) {
      const Section& symtab = secs[s.link];
      const std::string_view syms = payload(symtab);
      const std::string_view strtab = symtab.link < secs.size() ? payload(secs[symtab.link]) : std::string_view{};
      const std::string_view rel = payload(s);
      out.append(name).append("\n");
      for (std::size_t at = 0; at + 24 <= rel.size(); at += 24) {
        std::uint64_t r_offset = 0, r_info = 0;
        std::int64_t r_addend = 0;
        detail::read_le(rel, at, r_offset);
        detail::read_le(rel, at + 8, r_info);
        detail::read_le(rel, at + 16, r_addend);
        const std::size_t sym = static_cast<std::size_t>(r_info >> 32);
        std::uint32_t st_name = 0;
        unsigned char st_info = 0;
        std::uint16_t st_shndx = 0;
        detail::read_le(syms, sym * 24, st_name);
        detail::read_le(syms, sym * 24 + 4, st_info);
        detail::read_le(syms, sym * 24 + 6, st_shndx);
        std::string target(cstr(strtab, st_name));
        // section symbols have no name; use the section's
        if (target.empty() && st_shndx < secs.size()) target = std::string(cstr(shstr, secs[st_shndx].name));
        out.append(std::to_string(r_offset)).append(" ").append(std::to_string(r_info & 0xffffffffu));
        out.append(" ").append(std::to_string(r_addend)).append(" ").append(target).append("\n");
      }
    }
  }
  return out;
}

/// Compiles `source` in a private scratch directory and normalizes the
/// result. A compile error yields success=false; running past the adapter's
/// timeout throws CompileTimeout; a missing compiler throws
/// CompilerUnavailable.
inline CompileArtifact compile(const CompilerAdapter& adapter, std::string_view source) {
  ScratchDir scratch;
  const std::string input = "unit.c";
  const std::string output = adapter.emit == EmitMode::Assembly ? "unit.s" : "unit.o";
  write_file(scratch.path() / input, source);
  const ProcessResult proc = run_process(adapter.command(input, output), scratch.path(), adapter.timeout_seconds);
  if (proc.exec_failed) throw CompilerUnavailable("cannot run compiler '" + adapter.compiler + "': " + proc.output);
  if (proc.timed_out)
    throw CompileTimeout("compiler exceeded " + std::to_string(adapter.timeout_seconds) + " s");
  CompileArtifact art;
  art.diagnostics = proc.output;
  if (proc.exit_code != 0 || !std::filesystem::exists(scratch.path() / output)) {
    if (art.diagnostics.empty()) art.diagnostics = "compiler exited with status " + std::to_string(proc.exit_code);
    return art;
  }
  const std::string raw = read_file(scratch.path() / output);
  art.bytes = adapter.emit == EmitMode::Assembly ? normalize_assembly(raw) : normalize_object(raw);
  art.success = true;
  return art;
}

/// True iff both sides compile and their normalized artifacts are identical.
inline bool equivalent(const CompilerAdapter& adapter, std::string_view original, std::string_view variant) {
  const CompileArtifact a = compile(adapter, original);
  if (!a.success) return false;
  const CompileArtifact b = compile(adapter, variant);
  return b.success && a.bytes == b.bytes;
}

/// Equivalence against a fixed base whose artifact is compiled once.
class EquivalenceOracle {
 public:
  EquivalenceOracle(CompilerAdapter adapter, std::string_view base) : adapter_(std::move(adapter)) {
    base_ = compile(adapter_, base);
    if (!base_.success) throw InitializationError("base program does not compile:\n" + base_.diagnostics);
  }

  bool matches(std::string_view variant) const {
    const CompileArtifact v = compile(adapter_, variant);
    return v.success && v.bytes == base_.bytes;
  }

  const CompilerAdapter& adapter() const { return adapter_; }
  const CompileArtifact& base_artifact() const { return base_; }

 private:
  CompilerAdapter adapter_;
  CompileArtifact base_;
};

}  // namespace simforge
