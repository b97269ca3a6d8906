#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hwut/elaborate.hpp"

namespace hwut {

// An m-input x N-cycle stimulus. Columns follow the signature's input order
// with the clock excluded; the harness generates the clock.
struct UnitTest {
  std::string id;
  std::vector<PortInfo> inputs;
  std::vector<std::vector<uint64_t>> rows;  // rows[cycle][column]

  size_t cycles() const { return rows.size(); }
  bool operator==(const UnitTest&) const = default;
};

// Text form:
//   inputs: a[1], b[1], c[1]
//   0 0 1      # one line per cycle, binary, 1..width digits per value
std::string format_stimulus(const UnitTest& test);

// Throws Error kMalformedStimulus with the offending line number.
UnitTest parse_stimulus(std::string_view text, std::string id = {});

// Throws Error kStimulusMismatch unless the columns equal
// signature.stimulus_inputs() and every value fits its width.
void check_conforms(const UnitTest& test, const DesignSignature& signature);

// Enumerates every input pattern once, one per cycle, least significant
// column varying fastest. Throws kInvalidArgument above `max_bits` inputs.
UnitTest exhaustive_test(const DesignSignature& signature, int max_bits = 16);

// Uniform random values on every column. When the signature has a reset it is
// asserted in cycle 0 and afterwards with probability 1/16, so state machines
// get to run between resets.
UnitTest random_test(const DesignSignature& signature, int cycles,
                     std::mt19937_64& rng);

}  // namespace hwut
