#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hwut/elaborate.hpp"
#include "hwut/simulator.hpp"
#include "hwut/stimulus.hpp"
#include "hwut/verdict.hpp"

namespace hwut {

enum class Strategy { kNls, kNlsc };

std::string_view strategy_name(Strategy s);
// Accepts "nls" / "nlsc" in any case. Throws kInvalidArgument.
Strategy parse_strategy(std::string_view text);

struct GenConfig {
  Strategy strategy = Strategy::kNlsc;
  int shots = 0;  // 0 or 5
  double temperature = 0.8;
  int max_output_tokens = 2048;
  int max_input_tokens = 16384;

  // Defaults for a strategy: 2048 output tokens with source code, 512 without.
  static GenConfig make(Strategy strategy, int shots);
  // Throws kInvalidArgument.
  void validate() const;
  std::string label() const;  // e.g. "NLSC@5"
};

struct Exemplar {
  std::string description;
  std::string signature;
  std::string unit_test;
};

struct ProblemSpec {
  std::string id;
  std::string description;
  DesignSignature signature;
  DesignSource reference;
  std::vector<Exemplar> exemplars;
  bool sequential = false;
  SignatureOverrides overrides;  // applied to the reference and every patch
};

struct TestGenFeedback {
  CoverageReport coverage;
  UnitTest previous;
};

// Prompt skeletons live in editable text files. Markers:
//   {{name}}                 value substitution
//   {{#name}} ... {{/name}}  kept only when `name` is non-empty
struct PromptTemplates {
  std::string testgen;
  std::string debug;

  // Reads testgen.txt and debug.txt. Throws kIoError.
  static PromptTemplates load(const std::filesystem::path& dir);
};

// Throws kInvalidArgument on unbalanced sections.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& values);

// ceil(words * 1.3), words split on whitespace.
int estimate_tokens(std::string_view text);

// The stimulus header a generator must reproduce, e.g. "inputs: a[1], b[1]".
std::string stimulus_header(const DesignSignature& signature);

// Throws kInvalidArgument (strategy/buggy or shots/exemplars disagree) and
// kPromptOverflow.
std::string build_testgen_prompt(const PromptTemplates& templates, const GenConfig& cfg,
                                 const ProblemSpec& spec,
                                 const std::optional<DesignSource>& buggy,
                                 const std::optional<TestGenFeedback>& feedback);

// Throws kInvalidArgument for a passing summary and kPromptOverflow.
std::string build_debug_prompt(const PromptTemplates& templates, const GenConfig& cfg,
                               const ProblemSpec& spec, const DesignSource& buggy,
                               const UnitTest& failing, const MismatchSummary& summary);

}  // namespace hwut
