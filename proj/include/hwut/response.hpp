#pragma once

#include <string>
#include <string_view>

#include "hwut/elaborate.hpp"
#include "hwut/stimulus.hpp"

namespace hwut {

// Pulls the first stimulus block out of a completion: a fenced block that
// contains an `inputs:` line, or else a bare `inputs:` line followed by rows.
// The columns must equal signature.stimulus_inputs() in order and width.
// Throws kNoStimulusFound, or kMalformedStimulus whose line is counted in the
// response text.
UnitTest parse_unit_test(std::string_view response, const DesignSignature& signature,
                         std::string id = {});

// Pulls the first module ... endmodule out of a completion, fenced or bare.
// The patch must parse, elaborate and keep `expected` (computed with the same
// overrides). Throws kNoModuleFound, or kPatchRejected with a message starting
// "parse:", "elaborate:" or "signature:".
DesignSource parse_patch(std::string_view response, const DesignSignature& expected,
                         const SignatureOverrides& overrides = {});

}  // namespace hwut
