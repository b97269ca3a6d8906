#include "hwut/error.hpp"

namespace hwut {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kSyntaxError: return "SyntaxError";
    case Errc::kUnsupportedConstruct: return "UnsupportedConstruct";
    case Errc::kUndeclaredIdentifier: return "UndeclaredIdentifier";
    case Errc::kDuplicateDeclaration: return "DuplicateDeclaration";
    case Errc::kCombinationalLoop: return "CombinationalLoop";
    case Errc::kMultipleDrivers: return "MultipleDrivers";
    case Errc::kIllegalAssignment: return "IllegalAssignment";
    case Errc::kWidthMismatch: return "WidthMismatch";
    case Errc::kClockEdge: return "ClockEdge";
    case Errc::kAmbiguousClock: return "AmbiguousClock";
    case Errc::kStimulusMismatch: return "StimulusMismatch";
    case Errc::kSettleDivergence: return "SettleDivergence";
    case Errc::kMalformedVcd: return "MalformedVcd";
    case Errc::kNoApplicableSite: return "NoApplicableSite";
    case Errc::kNoDistinctMutant: return "NoDistinctMutant";
    case Errc::kTraceShapeMismatch: return "TraceShapeMismatch";
    case Errc::kCalledOnPass: return "CalledOnPass";
    case Errc::kEmptyList: return "EmptyList";
    case Errc::kInconsistentInput: return "InconsistentInput";
    case Errc::kPromptOverflow: return "PromptOverflow";
    case Errc::kProviderTimeout: return "ProviderTimeout";
    case Errc::kProviderRejection: return "ProviderRejection";
    case Errc::kScriptExhausted: return "ScriptExhausted";
    case Errc::kNoStimulusFound: return "NoStimulusFound";
    case Errc::kMalformedStimulus: return "MalformedStimulus";
    case Errc::kNoModuleFound: return "NoModuleFound";
    case Errc::kPatchRejected: return "PatchRejected";
    case Errc::kOracleElaborationFailure: return "OracleElaborationFailure";
    case Errc::kManifestError: return "ManifestError";
    case Errc::kIoError: return "IoError";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string Error::diagnostic(std::string_view file) const {
  std::string out(file);
  if (line_ > 0) {
    out += ":" + std::to_string(line_) + ":" + std::to_string(column_);
  }
  out += ": ";
  out += what();
  return out;
}

}  // namespace hwut
