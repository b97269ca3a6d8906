#include "hwut/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hwut/error.hpp"
#include "hwut/stimulus.hpp"

namespace hwut {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view kind_name(ProblemKind kind) {
  return kind == ProblemKind::kSequential ? "sequential" : "combinational";
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_text(const fs::path& file, const std::string& text) {
  std::error_code ec;
  if (fs::exists(file, ec)) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    if (in && ss.str() == text) return false;
  }
  if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIoError, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(Errc::kIoError, "cannot write " + tmp.string());
  }
  fs::rename(tmp, file, ec);
  if (ec) throw Error(Errc::kIoError, "cannot move " + tmp.string() + ": " + ec.message());
  return true;
}

namespace {

[[noreturn]] void bad_manifest(const fs::path& where, const std::string& msg) {
  throw Error(Errc::kManifestError, where.string() + ": " + msg);
}

json read_json(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) bad_manifest(file, "cannot read");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    bad_manifest(file, e.what());
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

ProblemManifest ProblemManifest::load(const fs::path& dir) {
  const fs::path file = dir / "problem.json";
  if (!fs::exists(file)) bad_manifest(file, "missing problem manifest");
  const json j = read_json(file);
  ProblemManifest m;
  m.dir = dir;
  try {
    m.id = j.at("id").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "combinational") {
      m.kind = ProblemKind::kCombinational;
    } else if (kind == "sequential") {
      m.kind = ProblemKind::kSequential;
    } else {
      bad_manifest(file, "kind must be combinational or sequential, got '" + kind + "'");
    }
    m.description = dir / j.at("description").get<std::string>();
    m.reference = dir / j.at("reference").get<std::string>();
    m.exemplars = dir / j.at("exemplars").get<std::string>();
    if (j.contains("clock")) m.overrides.clock = j.at("clock").get<std::string>();
    if (j.contains("reset")) {
      const json& r = j.at("reset");
      ResetInfo info;
      info.name = r.at("name").get<std::string>();
      info.active_high = r.value("active_high", true);
      info.asynchronous = r.value("asynchronous", true);
      m.overrides.reset = info;
    }
  } catch (const json::exception& e) {
    bad_manifest(file, e.what());
  }
  for (const fs::path& p : {m.description, m.reference, m.exemplars}) {
    if (!fs::exists(p)) bad_manifest(file, "referenced file " + p.string() + " does not exist");
  }
  return m;
}

std::vector<Exemplar> load_exemplars(const fs::path& file) {
  const json j = read_json(file);
  std::vector<Exemplar> out;
  try {
    for (const json& e : j.at("exemplars")) {
      out.push_back({e.at("description").get<std::string>(),
                     e.at("signature").get<std::string>(),
                     e.at("unit_test").get<std::string>()});
    }
  } catch (const json::exception& e) {
    bad_manifest(file, e.what());
  }
  return out;
}

CorpusManifest read_corpus(const fs::path& dir) {
  const fs::path file = dir / "manifest.json";
  if (!fs::exists(file)) bad_manifest(file, "no mutant corpus; run mutate first");
  const json j = read_json(file);
  CorpusManifest c;
  try {
    c.problem = j.at("problem").get<std::string>();
    c.seed = j.at("seed").get<uint64_t>();
    for (const json& m : j.at("mutants")) {
      CorpusEntry e;
      e.bc = m.at("bc").get<std::string>();
      e.kind = m.at("operator").get<std::string>();
      e.file = m.at("file").get<std::string>();
      const json& s = m.at("site");
      e.site = {s.at("path").get<std::string>(), s.at("line").get<int>(),
                s.at("column").get<int>(), s.at("before").get<std::string>(),
                s.at("after").get<std::string>()};
      e.seed = m.at("seed").get<uint64_t>();
      e.witness = m.at("witness").get<std::string>();
      e.witness_cycle = m.at("witness_cycle").get<size_t>();
      e.method = m.at("method").get<std::string>();
      c.mutants.push_back(std::move(e));
    }
    for (const json& s : j.at("skipped")) {
      c.skipped.push_back({s.at("bc").get<std::string>(), s.at("operator").get<std::string>(),
                           s.at("reason").get<std::string>()});
    }
  } catch (const json::exception& e) {
    bad_manifest(file, e.what());
  }
  return c;
}

void write_corpus(const ProblemManifest& manifest, const Corpus& corpus, uint64_t seed) {
  json mutants = json::array();
  std::vector<std::string> kept;
  for (const MutantRecord& r : corpus.mutants) {
    const std::string file = lower(r.bc) + ".sv";
    kept.push_back(file);
    write_text(manifest.dir / file, r.source.text);
    mutants.push_back({{"bc", r.bc},
                       {"operator", r.kind},
                       {"file", file},
                       {"site",
                        {{"path", r.site.path},
                         {"line", r.site.line},
                         {"column", r.site.column},
                         {"before", r.site.before},
                         {"after", r.site.after}}},
                       {"seed", r.seed},
                       {"witness", format_stimulus(r.witness)},
                       {"witness_cycle", r.witness_cycle},
                       {"method", r.method},
                       {"sites_total", r.sites_total},
                       {"sites_tried", r.sites_tried}});
  }
  json skipped = json::array();
  for (const SkippedOperator& s : corpus.skipped) {
    skipped.push_back({{"bc", s.bc}, {"operator", s.kind}, {"reason", s.reason}});
    const fs::path stale = manifest.dir / (lower(s.bc) + ".sv");
    std::error_code ec;
    fs::remove(stale, ec);
  }
  const json j = {{"problem", manifest.id},
                  {"seed", seed},
                  {"mutants", mutants},
                  {"skipped", skipped}};
  write_text(manifest.dir / "manifest.json", j.dump(2) + "\n");
}

Problem load_problem(const fs::path& dir, bool with_corpus) {
  Problem p;
  p.manifest = ProblemManifest::load(dir);
  const ProblemManifest& m = p.manifest;

  DesignSource ref = DesignSource::reference(read_text(m.reference));
  try {
    p.oracle = std::make_shared<const ElaboratedDesign>(load_design(ref));
  } catch (const Error& e) {
    throw Error(Errc::kOracleElaborationFailure,
                "reference of '" + m.id + "' does not elaborate: " +
                    e.diagnostic(m.reference.string()),
                e.line(), e.column());
  }
  const bool sequential = p.oracle->is_sequential();
  if (sequential != (m.kind == ProblemKind::kSequential)) {
    bad_manifest(dir / "problem.json",
                 "kind '" + std::string(kind_name(m.kind)) + "' disagrees with the reference (" +
                     std::to_string(p.oracle->num_clocked()) + " clocked processes)");
  }

  p.spec.id = m.id;
  p.spec.description = read_text(m.description);
  p.spec.signature = extract_signature(*p.oracle, m.overrides);
  p.spec.reference = ref;
  p.spec.exemplars = load_exemplars(m.exemplars);
  p.spec.sequential = sequential;
  p.spec.overrides = m.overrides;

  if (with_corpus) {
    const CorpusManifest corpus = read_corpus(dir);
    for (const CorpusEntry& e : corpus.mutants) {
      const fs::path file = dir / e.file;
      if (!fs::exists(file)) bad_manifest(dir / "manifest.json", "missing mutant " + e.file);
      p.mutants.push_back({e.bc, e.kind, DesignSource::mutant(read_text(file), e.bc)});
    }
  }
  return p;
}

}  // namespace hwut
