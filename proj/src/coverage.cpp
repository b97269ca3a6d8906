#include <algorithm>

#include "hwut/simulator.hpp"

namespace hwut {

CoverageData::CoverageData(const ElaboratedDesign& design)
    : statements(design.statement_lines.size(), false),
      arms(design.branches.size(), false),
      seen_zero(design.signals.size(), 0),
      seen_one(design.signals.size(), 0),
      states(design.state_registers.size()) {}

void CoverageData::merge(const CoverageData& other) {
  for (size_t i = 0; i < statements.size(); ++i) {
    statements[i] = statements[i] || other.statements[i];
  }
  for (size_t i = 0; i < arms.size(); ++i) arms[i] = arms[i] || other.arms[i];
  for (size_t i = 0; i < seen_zero.size(); ++i) {
    seen_zero[i] |= other.seen_zero[i];
    seen_one[i] |= other.seen_one[i];
  }
  for (size_t i = 0; i < states.size(); ++i) {
    states[i].insert(other.states[i].begin(), other.states[i].end());
  }
}

double CoverageReport::scalar() const {
  double sum = 0;
  int n = 0;
  for (const CoverageCategory* c : {&line, &branch, &toggle, &fsm}) {
    if (!c->defined()) continue;
    sum += c->ratio();
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

CoverageReport make_coverage_report(const ElaboratedDesign& design,
                                    const CoverageData& data) {
  CoverageReport r;
  for (size_t i = 0; i < data.statements.size(); ++i) {
    ++r.line.total;
    if (data.statements[i]) {
      ++r.line.covered;
    } else {
      r.uncovered.push_back("line " + std::to_string(design.statement_lines[i]) +
                            ": assignment never executed");
    }
  }
  for (size_t i = 0; i < data.arms.size(); ++i) {
    ++r.branch.total;
    if (data.arms[i]) {
      ++r.branch.covered;
    } else {
      r.uncovered.push_back("line " + std::to_string(design.branches[i].line) + ": " +
                            design.branches[i].label + " never taken");
    }
  }
  const int clock = [&] {
    for (const Process& p : design.processes) {
      if (p.kind == Process::Kind::kClocked) return p.clock;
    }
    return -1;
  }();
  for (size_t s = 0; s < design.signals.size(); ++s) {
    if (static_cast<int>(s) == clock) continue;
    const Signal& sig = design.signals[s];
    for (int b = 0; b < sig.width; ++b) {
      ++r.toggle.total;
      const bool zero = (data.seen_zero[s] >> b) & 1;
      const bool one = (data.seen_one[s] >> b) & 1;
      if (zero && one) {
        ++r.toggle.covered;
        continue;
      }
      std::string name = sig.name;
      if (sig.width > 1) name += "[" + std::to_string(sig.lsb + b) + "]";
      r.uncovered.push_back("toggle " + name + ": never " +
                            (zero ? std::string("1") : one ? "0" : "0 or 1"));
    }
  }
  for (size_t i = 0; i < design.state_registers.size(); ++i) {
    const StateRegister& reg = design.state_registers[i];
    for (size_t k = 0; k < reg.values.size(); ++k) {
      ++r.fsm.total;
      if (data.states[i].contains(reg.values[k])) {
        ++r.fsm.covered;
      } else {
        r.uncovered.push_back("fsm " +
                              design.signals[static_cast<size_t>(reg.signal)].name +
                              ": state " + reg.constants[k] + " never reached");
      }
    }
  }
  return r;
}

}  // namespace hwut
