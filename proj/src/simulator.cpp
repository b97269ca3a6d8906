#include "hwut/simulator.hpp"

#include <algorithm>

#include "eval.hpp"
#include "hwut/error.hpp"

namespace hwut {

const TraceSignal* Trace::find(std::string_view name) const {
  for (const TraceSignal& s : signals) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

Simulator::Simulator(const ElaboratedDesign& design, DesignSignature signature,
                     SimOptions options)
    : d_(design), signature_(std::move(signature)), options_(options) {
  if (signature_.clock) clock_ = d_.find_signal(*signature_.clock);
  for (const PortInfo& p : signature_.stimulus_inputs()) {
    columns_.push_back(d_.find_signal(p.name));
  }
  for (size_t i = 0; i < d_.signals.size(); ++i) {
    if (static_cast<int>(i) != clock_) traced_.push_back(static_cast<int>(i));
  }
}

void Simulator::assign(int lvalue, uint64_t value) {
  const LValue& lv = d_.lvalues[static_cast<size_t>(lvalue)];
  int shift = lv.width;
  for (const LValuePart& p : lv.parts) {
    shift -= p.width;
    const uint64_t part = (value >> shift) & width_mask(p.width);
    uint64_t& slot = values_[static_cast<size_t>(p.signal)];
    const uint64_t mask = width_mask(p.width) << p.lo;
    slot = (slot & ~mask) | (part << p.lo);
  }
}

void Simulator::commit(std::vector<Pending>& nba) {
  for (const Pending& p : nba) assign(p.lvalue, p.value);
  nba.clear();
}

void Simulator::exec(int idx, CoverageData* cov, std::vector<Pending>& nba) {
  if (idx < 0) return;
  const CStmt& s = d_.stmts[static_cast<size_t>(idx)];
  const uint64_t* v = values_.data();
  switch (s.kind) {
    case CStmt::Kind::kNull:
      return;
    case CStmt::Kind::kBlock:
      for (int c : s.children) exec(c, cov, nba);
      return;
    case CStmt::Kind::kIf: {
      const int w = d_.nodes[static_cast<size_t>(s.cond)].width;
      const bool taken = detail::eval_node(d_, s.cond, w, v) != 0;
      if (cov) cov->arms[static_cast<size_t>(s.branch_base + (taken ? 0 : 1))] = true;
      exec(s.children[taken ? 0 : 1], cov, nba);
      return;
    }
    case CStmt::Kind::kCase: {
      const uint64_t subject = detail::eval_node(d_, s.cond, s.case_width, v);
      int chosen = -1;
      int fallback = -1;
      for (size_t i = 0; i < s.arms.size() && chosen < 0; ++i) {
        if (s.arms[i].labels.empty()) {
          fallback = static_cast<int>(i);
          continue;
        }
        for (int l : s.arms[i].labels) {
          if (detail::eval_node(d_, l, s.case_width, v) == subject) {
            chosen = static_cast<int>(i);
            break;
          }
        }
      }
      if (chosen < 0) chosen = fallback;
      if (chosen >= 0) {
        if (cov) cov->arms[static_cast<size_t>(s.branch_base + chosen)] = true;
        exec(s.arms[static_cast<size_t>(chosen)].body, cov, nba);
      } else if (s.implicit_default && cov) {
        cov->arms[static_cast<size_t>(s.branch_base) + s.arms.size()] = true;
      }
      return;
    }
    case CStmt::Kind::kBlocking:
    case CStmt::Kind::kNonBlocking: {
      const LValue& lv = d_.lvalues[static_cast<size_t>(s.lvalue)];
      const int w = std::max(lv.width, d_.nodes[static_cast<size_t>(s.rhs)].width);
      const uint64_t value = detail::eval_node(d_, s.rhs, w, v);
      if (cov) cov->statements[static_cast<size_t>(s.statement_id)] = true;
      if (s.kind == CStmt::Kind::kBlocking) {
        assign(s.lvalue, value);
      } else {
        nba.push_back({s.lvalue, value});
      }
      return;
    }
  }
}

void Simulator::settle(CoverageData* cov) {
  std::vector<Pending> nba;
  for (int sweep = 0; sweep < options_.settle_cap; ++sweep) {
    const std::vector<uint64_t> before = values_;
    for (int pi : d_.comb_order) {
      const Process& p = d_.processes[static_cast<size_t>(pi)];
      if (p.kind == Process::Kind::kContinuous) {
        const LValue& lv = d_.lvalues[static_cast<size_t>(p.lvalue)];
        const int w = std::max(lv.width, d_.nodes[static_cast<size_t>(p.rhs)].width);
        assign(p.lvalue, detail::eval_node(d_, p.rhs, w, values_.data()));
        if (cov) cov->statements[static_cast<size_t>(p.statement_id)] = true;
      } else {
        exec(p.body, cov, nba);
        commit(nba);
      }
    }
    if (values_ == before) return;
  }
  throw Error(Errc::kSettleDivergence,
              "combinational logic did not settle within " +
                  std::to_string(options_.settle_cap) + " sweeps");
}

void Simulator::fire_edges(const std::vector<uint64_t>& before, CoverageData* cov) {
  auto edge = [&](int sig, Edge e) {
    const uint64_t was = before[static_cast<size_t>(sig)] & 1;
    const uint64_t now = values_[static_cast<size_t>(sig)] & 1;
    return e == Edge::kPos ? (!was && now) : (was && !now);
  };
  std::vector<Pending> nba;
  bool any = false;
  for (const Process& p : d_.processes) {
    if (p.kind != Process::Kind::kClocked) continue;
    bool fire = edge(p.clock, p.clock_edge);
    for (const auto& [sig, e] : p.async_resets) fire = fire || edge(sig, e);
    if (!fire) continue;
    any = true;
    exec(p.body, cov, nba);
  }
  if (!any) return;
  commit(nba);
  settle(cov);
}

void Simulator::sample(Trace& trace, size_t cycle, CoverageData* cov) const {
  for (size_t i = 0; i < traced_.size(); ++i) {
    trace.signals[i].values[cycle] = values_[static_cast<size_t>(traced_[i])];
  }
  if (!cov) return;
  for (int sig : traced_) {
    const uint64_t m = d_.signals[static_cast<size_t>(sig)].mask();
    const uint64_t v = values_[static_cast<size_t>(sig)];
    cov->seen_one[static_cast<size_t>(sig)] |= v & m;
    cov->seen_zero[static_cast<size_t>(sig)] |= ~v & m;
  }
  for (size_t r = 0; r < d_.state_registers.size(); ++r) {
    cov->states[r].insert(values_[static_cast<size_t>(d_.state_registers[r].signal)]);
  }
}

Trace Simulator::run(const UnitTest& test, CoverageData* cov) {
  check_conforms(test, signature_);
  const size_t n = test.cycles();

  Trace trace;
  trace.cycles = n;
  for (int sig : traced_) {
    const Signal& s = d_.signals[static_cast<size_t>(sig)];
    trace.signals.push_back({s.name, s.width, std::vector<uint64_t>(n, 0)});
  }

  // Time zero: every variable starts at 0, then combinational logic settles.
  values_.assign(d_.signals.size(), 0);
  settle(nullptr);

  for (size_t cycle = 0; cycle < n; ++cycle) {
    std::vector<uint64_t> before = values_;
    for (size_t c = 0; c < columns_.size(); ++c) {
      values_[static_cast<size_t>(columns_[c])] = test.rows[cycle][c];
    }
    settle(cov);
    // Asynchronous reset edges carried by this row act before the clock.
    fire_edges(before, cov);

    if (clock_ >= 0) {
      before = values_;
      values_[static_cast<size_t>(clock_)] = 1;
      fire_edges(before, cov);
    }
    sample(trace, cycle, cov);
    if (clock_ >= 0) {
      before = values_;
      values_[static_cast<size_t>(clock_)] = 0;
      fire_edges(before, cov);
    }
  }
  return trace;
}

Trace run(const ElaboratedDesign& design, const UnitTest& test) {
  return Simulator(design, extract_signature(design)).run(test);
}

CoverageReport collect_coverage(const ElaboratedDesign& design,
                                const std::vector<UnitTest>& tests) {
  return collect_coverage(design, extract_signature(design), tests);
}

CoverageReport collect_coverage(const ElaboratedDesign& design,
                                const DesignSignature& signature,
                                const std::vector<UnitTest>& tests) {
  Simulator sim(design, signature);
  CoverageData data(design);
  for (const UnitTest& t : tests) sim.run(t, &data);
  return make_coverage_report(design, data);
}

}  // namespace hwut
