#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hwut/elaborate.hpp"
#include "hwut/mutator.hpp"
#include "hwut/prompt.hpp"

namespace hwut {

enum class ProblemKind { kCombinational, kSequential };

std::string_view kind_name(ProblemKind kind);

// problem.json inside a problem directory:
//   {"id": "arbiter", "kind": "sequential", "description": "description.txt",
//    "reference": "ref.sv", "exemplars": "../../exemplars/sequential.json",
//    "clock": "clk", "reset": {"name": "rst", "active_high": true,
//    "asynchronous": true}}
// clock and reset are optional overrides of the inferred signature.
struct ProblemManifest {
  std::string id;
  ProblemKind kind = ProblemKind::kCombinational;
  std::filesystem::path dir;
  std::filesystem::path description;  // resolved against dir
  std::filesystem::path reference;
  std::filesystem::path exemplars;
  SignatureOverrides overrides;

  // Throws kManifestError for unreadable JSON, missing fields or files.
  static ProblemManifest load(const std::filesystem::path& dir);
};

// One line of the corpus manifest.json written next to the mutants.
struct CorpusEntry {
  std::string bc;
  std::string kind;
  std::string file;  // "bc03.sv"
  MutationSite site;
  uint64_t seed = 0;
  std::string witness;  // stimulus text
  size_t witness_cycle = 0;
  std::string method;
};

struct CorpusManifest {
  std::string problem;
  uint64_t seed = 0;
  std::vector<CorpusEntry> mutants;
  std::vector<SkippedOperator> skipped;
};

struct Mutant {
  std::string bc;
  std::string kind;
  DesignSource source;
};

// Everything the loops need about one problem.
struct Problem {
  ProblemManifest manifest;
  ProblemSpec spec;
  std::shared_ptr<const ElaboratedDesign> oracle;
  std::vector<Mutant> mutants;  // empty when no corpus was requested/found
};

// Reads {"exemplars": [{"description", "signature", "unit_test"}, ...]}.
// Throws kManifestError.
std::vector<Exemplar> load_exemplars(const std::filesystem::path& file);

// Throws kManifestError (also when kind disagrees with the reference) and
// kOracleElaborationFailure. With `with_corpus` the corpus manifest must exist.
Problem load_problem(const std::filesystem::path& dir, bool with_corpus);

// Writes bcNN.sv files and manifest.json. Files whose content is unchanged are
// left untouched; mutant files of operators that no longer apply are removed.
void write_corpus(const ProblemManifest& manifest, const Corpus& corpus, uint64_t seed);

// Throws kManifestError.
CorpusManifest read_corpus(const std::filesystem::path& dir);

// Small file helpers shared by the CLI and the orchestrator. Throws kIoError.
std::string read_text(const std::filesystem::path& file);
// Writes through a temporary and a rename. Returns false when the file
// already held exactly `text`.
bool write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace hwut
