#include "hwut/verdict.hpp"

#include <algorithm>

#include "hwut/error.hpp"

namespace hwut {
namespace {

struct OutputPair {
  const TraceSignal* actual;
  const TraceSignal* expected;
};

std::vector<OutputPair> match_outputs(const Trace& actual, const Trace& expected,
                                      const std::vector<PortInfo>& outputs) {
  if (actual.cycles != expected.cycles) {
    throw Error(Errc::kTraceShapeMismatch,
                "traces have " + std::to_string(actual.cycles) + " and " +
                    std::to_string(expected.cycles) + " cycles");
  }
  std::vector<OutputPair> pairs;
  for (const PortInfo& o : outputs) {
    const TraceSignal* a = actual.find(o.name);
    const TraceSignal* e = expected.find(o.name);
    if (!a || !e) {
      throw Error(Errc::kTraceShapeMismatch, "output '" + o.name + "' missing from trace");
    }
    if (a->width != o.width || e->width != o.width || a->values.size() != actual.cycles ||
        e->values.size() != expected.cycles) {
      throw Error(Errc::kTraceShapeMismatch, "output '" + o.name + "' has the wrong shape");
    }
    pairs.push_back({a, e});
  }
  return pairs;
}

}  // namespace

Verdict compare(const Trace& actual, const Trace& expected,
                const std::vector<PortInfo>& outputs) {
  const auto pairs = match_outputs(actual, expected, outputs);
  Verdict v;
  v.mask.assign(actual.cycles, false);
  for (size_t n = 0; n < actual.cycles; ++n) {
    for (const OutputPair& p : pairs) {
      if (p.actual->values[n] != p.expected->values[n]) {
        v.mask[n] = true;
        break;
      }
    }
    if (v.mask[n]) ++v.mismatch_cycles;
  }
  v.pass = v.mismatch_cycles == 0;
  return v;
}

MismatchSummary summarize(const Trace& actual, const Trace& expected,
                          const Verdict& verdict,
                          const std::vector<PortInfo>& outputs, size_t k,
                          std::string test_id) {
  if (verdict.pass) {
    throw Error(Errc::kCalledOnPass, "cannot summarize a passing run");
  }
  const auto pairs = match_outputs(actual, expected, outputs);
  // Outputs are visited by name so entries sort by (cycle, output name).
  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return pairs[a].actual->name < pairs[b].actual->name;
  });

  MismatchSummary s;
  s.test_id = std::move(test_id);
  s.limit = k;
  for (size_t n = 0; n < actual.cycles; ++n) {
    for (size_t i : order) {
      const OutputPair& p = pairs[i];
      if (p.actual->values[n] == p.expected->values[n]) continue;
      ++s.total;
      if (s.entries.size() < k) {
        s.entries.push_back({p.actual->name, n, p.expected->values[n],
                             p.actual->values[n], p.actual->width});
      }
    }
  }
  return s;
}

PassFraction pass_fraction(const std::vector<Verdict>& verdicts) {
  if (verdicts.empty()) throw Error(Errc::kEmptyList, "no verdicts");
  PassFraction f;
  f.total = verdicts.size();
  for (const Verdict& v : verdicts) f.passed += v.pass ? 1 : 0;
  return f;
}

}  // namespace hwut
