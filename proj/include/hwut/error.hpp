#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hwut {

// Every failure the library reports carries one of these codes so callers can
// branch on the kind without parsing messages.
enum class Errc {
  // hdl_frontend
  kSyntaxError,
  kUnsupportedConstruct,
  kUndeclaredIdentifier,
  kDuplicateDeclaration,
  kCombinationalLoop,
  kMultipleDrivers,
  kIllegalAssignment,
  kWidthMismatch,
  kClockEdge,
  kAmbiguousClock,
  // simulator
  kStimulusMismatch,
  kSettleDivergence,
  kMalformedVcd,
  // mutator
  kNoApplicableSite,
  kNoDistinctMutant,
  // verdict / metrics
  kTraceShapeMismatch,
  kCalledOnPass,
  kEmptyList,
  kInconsistentInput,
  // llm_gateway
  kPromptOverflow,
  kProviderTimeout,
  kProviderRejection,
  kScriptExhausted,
  kNoStimulusFound,
  kMalformedStimulus,
  kNoModuleFound,
  kPatchRejected,
  // orchestrator / cli
  kOracleElaborationFailure,
  kManifestError,
  kIoError,
  kInvalidArgument,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, int line = 0, int column = 0)
      : std::runtime_error(std::move(message)),
        code_(code),
        line_(line),
        column_(column) {}

  Errc code() const { return code_; }
  int line() const { return line_; }
  int column() const { return column_; }

  // "file:line:col: message" when a location is known, else "file: message".
  std::string diagnostic(std::string_view file) const;

 private:
  Errc code_;
  int line_;
  int column_;
};

}  // namespace hwut
