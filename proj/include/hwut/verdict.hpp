#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hwut/elaborate.hpp"
#include "hwut/simulator.hpp"

namespace hwut {

// Pass/fail of one run against the oracle. Only signature outputs count:
// internal signals may differ and the run still passes.
struct Verdict {
  bool pass = true;
  std::vector<bool> mask;  // per cycle: some output differs
  size_t mismatch_cycles = 0;

  size_t cycles() const { return mask.size(); }
};

struct MismatchEntry {
  std::string output;
  size_t cycle = 0;
  uint64_t expected = 0;
  uint64_t actual = 0;
  int width = 1;
};

struct MismatchSummary {
  std::string test_id;
  std::vector<MismatchEntry> entries;  // earliest first, at most `limit`
  size_t total = 0;                    // every (output, cycle) mismatch
  size_t limit = 20;

  bool truncated() const { return total > entries.size(); }
};

// Throws kTraceShapeMismatch when cycle counts differ or an output is
// missing or has a different width in either trace.
Verdict compare(const Trace& actual, const Trace& expected,
                const std::vector<PortInfo>& outputs);

// Throws kCalledOnPass for a passing verdict.
MismatchSummary summarize(const Trace& actual, const Trace& expected,
                          const Verdict& verdict,
                          const std::vector<PortInfo>& outputs, size_t k = 20,
                          std::string test_id = {});

// Exact fraction so acceptance tests compare without rounding.
struct PassFraction {
  size_t passed = 0;
  size_t total = 0;

  double value() const { return total ? static_cast<double>(passed) / total : 0.0; }
  bool complete() const { return total > 0 && passed == total; }
  // a/b > c/d  <=>  a*d > c*b
  bool greater_than(const PassFraction& other) const {
    return passed * other.total > other.passed * total;
  }
};

// Throws kEmptyList.
PassFraction pass_fraction(const std::vector<Verdict>& verdicts);

}  // namespace hwut
