#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hwut/manifest.hpp"
#include "hwut/metrics.hpp"
#include "hwut/prompt.hpp"
#include "hwut/provider.hpp"
#include "hwut/simulator.hpp"
#include "hwut/stimulus.hpp"
#include "hwut/verdict.hpp"

namespace hwut {

struct LoopOptions {
  int testgen_iters = 5;  // sequential designs only; combinational is one shot
  int debug_iters = 5;
  size_t mismatch_k = 20;
};

// Everything a loop needs besides the design under work.
struct LoopContext {
  const ProblemSpec& spec;
  const ElaboratedDesign& oracle;
  const PromptTemplates& templates;
  const GenConfig& cfg;
  Provider& provider;
  LoopOptions options;
};

struct TestGenStep {
  int iteration = 0;
  bool accepted = false;
  std::string reason;  // why a candidate was rejected; empty when accepted
  std::string prompt;
  std::string response;     // empty when no completion was obtained
  std::optional<UnitTest> test;  // parsed candidate
  std::optional<CoverageReport> coverage;  // union coverage with the candidate
  double bcov = 0.0;  // best coverage after this step
};

struct TestGenState {
  std::string source;  // BC id of the seeding mutant
  std::vector<UnitTest> accepted;
  double bcov = 0.0;
  CoverageReport coverage;  // union over accepted tests
  int iterations = 0;
  int provider_calls = 0;
  std::vector<TestGenStep> history;
};

struct DebugStep {
  int iteration = 0;
  bool accepted = false;
  std::string reason;
  std::string failing_test;
  std::string prompt;
  std::string response;
  std::optional<PassFraction> patch_pass;  // when the patch was simulated
  PassFraction bpass;  // best after this step
};

struct DebugState {
  std::string target;
  DesignSource initial;
  DesignSource current;
  PassFraction initial_pass;
  PassFraction bpass;
  int iterations = 0;
  int provider_calls = 0;
  std::vector<DebugStep> history;
};

// Coverage-gated generation from one seeding mutant. NLSC prompts embed
// `source`, NLS prompts never do. Provider and parse failures become rejected
// steps. Throws kOracleElaborationFailure only through a bad spec and
// kInvalidArgument for a source that does not elaborate under NLSC.
TestGenState generate_tests(const LoopContext& ctx, const DesignSource& source,
                            const std::string& source_id);

// Pass-fraction-gated repair. Throws kEmptyList without tests and
// kInvalidArgument when `buggy` does not elaborate.
DebugState debug(const LoopContext& ctx, const DesignSource& buggy,
                 const std::string& target_id, const std::vector<UnitTest>& tests);

// Verdicts of `tests` on `design` against the oracle. Throws whatever the
// simulator throws.
std::vector<Verdict> evaluate_suite(const ElaboratedDesign& oracle,
                                    const ElaboratedDesign& design,
                                    const DesignSignature& signature,
                                    const std::vector<UnitTest>& tests);

struct RunConfig {
  GenConfig gen = GenConfig::make(Strategy::kNlsc, 0);
  ProviderBinding binding;
  uint64_t seed = 1;
  LoopOptions loops;
  int jobs = 1;
  std::filesystem::path output_dir;
  std::vector<std::string> problems;

  // Stable JSON; credentials never appear. Output dir, jobs and provider
  // concurrency are omitted so the same experiment renders the same text
  // however it was scheduled.
  std::string to_json() const;
  // Throws kInvalidArgument.
  static RunConfig from_json(const std::string& text);
};

struct MatrixCell {
  std::string source;
  std::string target;
  std::optional<PairResult> result;
  std::string skipped;  // reason when result is empty
};

struct DebugOutcome {
  std::string target;
  std::optional<DebugState> state;
  std::string skipped;
  double success() const { return state ? state->bpass.value() : 0.0; }
};

struct EvalRun {
  std::string problem;
  ProblemKind kind = ProblemKind::kCombinational;
  std::string fatal;  // non-empty when the problem could not be evaluated
  std::vector<std::string> mutants;  // BC ids, sources and targets alike
  std::vector<PortInfo> outputs;
  std::vector<TestGenState> generations;  // by source
  std::vector<MatrixCell> cells;          // source-major
  std::vector<DebugOutcome> debug;        // by target
};

using ProgressFn = std::function<void(const std::string&)>;

// Every source mutant seeds one generation loop; its suite is applied to all
// targets; each target is then debugged with the suite generated from it.
// With a non-empty cfg.output_dir the run directory is written and finished
// loops found there (same config) are reused instead of rerun.
std::vector<EvalRun> evaluate_matrix(const std::vector<Problem>& problems,
                                     const RunConfig& cfg, Provider& provider,
                                     const PromptTemplates& templates,
                                     const ProgressFn& progress = {});

// Loads every problem directory (with its corpus) and evaluates them. A
// problem that fails to load becomes an EvalRun with `fatal` set.
std::vector<EvalRun> evaluate_dirs(const std::vector<std::filesystem::path>& dirs,
                                   const RunConfig& cfg, Provider& provider,
                                   const PromptTemplates& templates,
                                   const ProgressFn& progress = {});

// JSON round trip of loop states, used for checkpoints and histories.
std::string testgen_to_json(const TestGenState& state);
TestGenState testgen_from_json(const std::string& text);
std::string debug_to_json(const DebugState& state);
DebugState debug_from_json(const std::string& text);

}  // namespace hwut
