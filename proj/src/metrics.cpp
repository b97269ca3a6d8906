#include "hwut/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hwut/error.hpp"

namespace hwut {

size_t BinnedDistribution::size() const {
  size_t n = 0;
  for (size_t c : counts) n += c;
  return n;
}

double attack_rate(const std::vector<bool>& attacked) {
  if (attacked.empty()) throw Error(Errc::kEmptyList, "attack rate over no problems");
  const auto hits = std::count(attacked.begin(), attacked.end(), true);
  return static_cast<double>(hits) / static_cast<double>(attacked.size());
}

double attack_rate(const std::vector<Verdict>& verdicts) {
  std::vector<bool> attacked;
  attacked.reserve(verdicts.size());
  for (const Verdict& v : verdicts) attacked.push_back(!v.pass);
  return attack_rate(attacked);
}

double divergence_rate(const Trace& t_pass, const Trace& t_fail,
                       const std::vector<PortInfo>& outputs) {
  const Verdict v = compare(t_fail, t_pass, outputs);
  if (v.cycles() == 0) return 0.0;
  return static_cast<double>(v.mismatch_cycles) / static_cast<double>(v.cycles());
}

double divergent_attack(int ar_i, double dr) {
  if (ar_i != 0 && ar_i != 1) {
    throw Error(Errc::kInconsistentInput, "ar_i must be 0 or 1");
  }
  if (!(dr >= 0.0 && dr <= 1.0)) {
    throw Error(Errc::kInconsistentInput, "dr must lie in [0, 1]");
  }
  if (ar_i == 0) return 0.0;
  if (dr == 0.0) {
    throw Error(Errc::kInconsistentInput,
                "a failing suite must diverge on at least one cycle");
  }
  return dr;
}

PairResult pair_result(std::string source, std::string target,
                       const std::vector<Verdict>& verdicts) {
  if (verdicts.empty()) throw Error(Errc::kEmptyList, "no verdicts for cell");
  PairResult r;
  r.source = std::move(source);
  r.target = std::move(target);
  for (const Verdict& v : verdicts) {
    if (!v.pass) r.ar_i = 1;
    r.divergent_cycles += v.mismatch_cycles;
    r.total_cycles += v.cycles();
  }
  r.dr = r.total_cycles ? static_cast<double>(r.divergent_cycles) /
                              static_cast<double>(r.total_cycles)
                        : 0.0;
  r.da = divergent_attack(r.ar_i, r.dr);
  return r;
}

int bin_index(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(Errc::kInconsistentInput, "value outside [0, 1]");
  }
  return std::min(4, static_cast<int>(std::floor(value * 5.0))) + 1;
}

BinnedDistribution bin(const std::vector<double>& values) {
  if (values.empty()) throw Error(Errc::kEmptyList, "nothing to bin");
  BinnedDistribution d;
  for (double v : values) ++d.counts[static_cast<size_t>(bin_index(v) - 1)];
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  d.median = sorted[(sorted.size() - 1) / 2];
  d.median_bin = bin_index(d.median);
  return d;
}

}  // namespace hwut
