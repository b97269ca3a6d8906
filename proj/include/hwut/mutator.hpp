#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hwut/elaborate.hpp"
#include "hwut/stimulus.hpp"

namespace hwut {

struct MutationOperator {
  std::string id;    // BC01..BC10
  std::string kind;  // short machine name, e.g. "logic-operator-swap"
  std::string description;
};

// The fixed catalog, in BC order.
const std::vector<MutationOperator>& list_operators();
// Throws kInvalidArgument for an unknown id.
const MutationOperator& find_operator(std::string_view id);

struct MutationSite {
  std::string path;  // e.g. "item[4].always.body.stmt[1].case.arm[0]"
  int line = 0;
  int column = 0;
  std::string before;  // original text of the edited span
  std::string after;   // replacement text
};

struct DistinctnessBudget {
  int exhaustive_bits = 12;  // combinational designs up to this many input bits
  int random_tests = 1000;
  int random_cycles = 20;
};

struct MutatorOptions {
  DistinctnessBudget budget;
  SignatureOverrides overrides;
};

struct MutantRecord {
  std::string bc;
  std::string kind;
  DesignSource source;
  MutationSite site;
  uint64_t seed = 0;
  UnitTest witness;           // reference and mutant outputs differ on it
  size_t witness_cycle = 0;   // first divergent cycle of the witness
  std::string method;         // "exhaustive" or "random"
  int sites_total = 0;
  int sites_tried = 0;
};

struct SkippedOperator {
  std::string bc;
  std::string kind;
  std::string reason;
};

struct Corpus {
  std::vector<MutantRecord> mutants;
  std::vector<SkippedOperator> skipped;
};

// Every site the operator can edit, in walk order.
std::vector<MutationSite> applicable_sites(const ElaboratedDesign& reference,
                                           const MutationOperator& op,
                                           const MutatorOptions& options = {});

// Throws kNoApplicableSite, kNoDistinctMutant.
MutantRecord inject(const ElaboratedDesign& reference, const MutationOperator& op,
                    uint64_t seed, const MutatorOptions& options = {});

// One record per applicable operator; the rest are listed as skipped.
Corpus make_corpus(const ElaboratedDesign& reference, uint64_t seed,
                   const MutatorOptions& options = {});

// Replays a witness: true when some output differs between the two designs.
bool witness_diverges(const ElaboratedDesign& reference,
                      const ElaboratedDesign& mutant, const UnitTest& witness,
                      const DesignSignature& signature);

}  // namespace hwut
