#pragma once

#include <string>
#include <string_view>

#include "hwut/elaborate.hpp"
#include "hwut/simulator.hpp"

namespace hwut {

// Value Change Dump with one timestamp per cycle (#0, #1, ...). The first
// timestamp carries a $dumpvars block; later ones list only changed values.
// No wall-clock date is written, so identical traces give identical bytes.
std::string export_vcd(const Trace& trace, const DesignSignature& signature);

// Reads files produced by export_vcd (and ordinary single-scope VCDs with
// binary values). Throws Error kMalformedVcd.
Trace read_vcd(std::string_view text);

}  // namespace hwut
