#pragma once

#include <array>
#include <string>
#include <vector>

#include "hwut/verdict.hpp"

namespace hwut {

// One (source, target) cell of the evaluation matrix.
struct PairResult {
  std::string source;
  std::string target;
  int ar_i = 0;     // 1 when some test of the suite fails on the target
  double dr = 0.0;  // divergent cycles / total cycles over the whole suite
  double da = 0.0;  // dr gated by ar_i
  size_t divergent_cycles = 0;
  size_t total_cycles = 0;
};

// Five equally spaced bins [0,.2) [.2,.4) [.4,.6) [.6,.8) [.8,1].
struct BinnedDistribution {
  std::array<size_t, 5> counts{};
  double median = 0.0;   // lower-middle element for even sample sizes
  int median_bin = 0;    // 1-based
  size_t size() const;
};

// Fraction of problems with a failing verdict. Throws kEmptyList.
double attack_rate(const std::vector<bool>& attacked);
double attack_rate(const std::vector<Verdict>& verdicts);

// (#cycles where any output differs) / n. Throws kTraceShapeMismatch.
double divergence_rate(const Trace& t_pass, const Trace& t_fail,
                       const std::vector<PortInfo>& outputs);

// ar_i = 1 -> dr, ar_i = 0 -> 0. Throws kInconsistentInput for ar_i outside
// {0,1}, dr outside [0,1], or an attack with zero divergence.
double divergent_attack(int ar_i, double dr);

// Cell metrics from the verdicts of every suite test on one target.
// Throws kEmptyList.
PairResult pair_result(std::string source, std::string target,
                       const std::vector<Verdict>& verdicts);

// 1-based bin for a ratio in [0,1]. Throws kInconsistentInput otherwise.
int bin_index(double value);

// Throws kEmptyList, kInconsistentInput.
BinnedDistribution bin(const std::vector<double>& values);

}  // namespace hwut
