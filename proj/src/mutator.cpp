#include "hwut/mutator.hpp"

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "hwut/error.hpp"
#include "hwut/parser.hpp"
#include "hwut/simulator.hpp"
#include "hwut/verdict.hpp"

namespace hwut {
namespace {

enum Op {
  kLogicSwap = 0,
  kCompareSwap,
  kNegateCondition,
  kBitFlip,
  kOffByOne,
  kWrongTransition,
  kDeleteCaseArm,
  kResetValue,
  kAssignKind,
  kEdgePolarity,
};

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t mix(uint64_t a, uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

struct Edit {
  int begin = 0;
  int end = 0;
  std::string text;
};

struct Candidate {
  MutationSite site;
  std::vector<Edit> edits;  // alternatives, tried in order
};

// Facts about the reference the walker needs.
struct DesignFacts {
  std::map<std::string, std::vector<std::string>> state_peers;  // constant -> set
  std::set<std::string> reset_names;
  std::map<std::string, int> widths;
  std::map<std::string, uint64_t> params;
};

DesignFacts gather_facts(const ElaboratedDesign& d, const DesignSignature& sig) {
  DesignFacts f;
  for (const StateRegister& r : d.state_registers) {
    for (const std::string& c : r.constants) f.state_peers[c] = r.constants;
  }
  for (const Process& p : d.processes) {
    for (const auto& [s, e] : p.async_resets) {
      f.reset_names.insert(d.signals[static_cast<size_t>(s)].name);
    }
  }
  if (sig.reset) f.reset_names.insert(sig.reset->name);
  for (const Signal& s : d.signals) f.widths[s.name] = s.width;
  for (const ParamValue& p : d.params) f.params[p.name] = p.value;
  return f;
}

bool mentions(const Expr& e, const std::set<std::string>& names) {
  if ((e.kind == Expr::Kind::kIdent || e.kind == Expr::Kind::kIndex) &&
      names.contains(e.name)) {
    return true;
  }
  for (const Expr& o : e.operands) {
    if (mentions(o, names)) return true;
  }
  return false;
}

bool is_atomic(const Expr& e) {
  return e.kind == Expr::Kind::kNumber || e.kind == Expr::Kind::kIdent ||
         e.kind == Expr::Kind::kIndex || e.kind == Expr::Kind::kSlice ||
         e.kind == Expr::Kind::kConcat || e.kind == Expr::Kind::kReplicate;
}

std::optional<BinaryOp> swapped(Op op, BinaryOp b) {
  if (op == kLogicSwap) {
    switch (b) {
      case BinaryOp::kBitAnd: return BinaryOp::kBitOr;
      case BinaryOp::kBitOr: return BinaryOp::kBitAnd;
      case BinaryOp::kLogicAnd: return BinaryOp::kLogicOr;
      case BinaryOp::kLogicOr: return BinaryOp::kLogicAnd;
      default: return std::nullopt;
    }
  }
  if (op == kCompareSwap) {
    switch (b) {
      case BinaryOp::kEq: return BinaryOp::kNe;
      case BinaryOp::kNe: return BinaryOp::kEq;
      case BinaryOp::kLt: return BinaryOp::kLe;
      case BinaryOp::kLe: return BinaryOp::kLt;
      case BinaryOp::kGt: return BinaryOp::kGe;
      case BinaryOp::kGe: return BinaryOp::kGt;
      default: return std::nullopt;
    }
  }
  return std::nullopt;
}

// Walks the AST in a fixed order and reports every site of one operator.
// With target >= 0 the target-th site is also applied to the AST in place
// and the walk stops there.
class SiteWalker {
 public:
  SiteWalker(Op op, std::string_view text, const DesignFacts& facts, uint64_t seed,
             int target)
      : op_(op), text_(text), facts_(facts), seed_(seed), target_(target) {}

  std::vector<Candidate> walk(DesignAst& ast) {
    for (size_t i = 0; i < ast.items.size() && !stop_; ++i) {
      const std::string path = "item[" + std::to_string(i) + "]";
      ModuleItem& item = ast.items[i];
      if (auto* a = std::get_if<ContAssign>(&item)) {
        visit_expr(a->rhs, true, path + ".assign.rhs");
      } else if (auto* n = std::get_if<NetDecl>(&item)) {
        if (n->init) visit_expr(*n->init, true, path + ".net.init");
      } else if (auto* b = std::get_if<AlwaysBlock>(&item)) {
        visit_always(*b, path + ".always");
      }
    }
    return std::move(out_);
  }

 private:
  uint64_t choice(uint64_t n) const {
    return n == 0 ? 0 : mix(seed_ * 16 + static_cast<uint64_t>(op_), counter_) % n;
  }

  std::string span(const SourceLoc& loc) const {
    return std::string(text_.substr(static_cast<size_t>(loc.begin),
                                    static_cast<size_t>(loc.end - loc.begin)));
  }

  // Registers a site. Returns true when this is the site to apply.
  bool site(const SourceLoc& loc, const std::string& path, std::vector<Edit> edits) {
    Candidate c;
    c.site.path = path;
    c.site.line = loc.line;
    c.site.column = loc.column;
    const Edit& e = edits.front();
    c.site.before = std::string(
        text_.substr(static_cast<size_t>(e.begin), static_cast<size_t>(e.end - e.begin)));
    c.site.after = e.text;
    c.edits = std::move(edits);
    out_.push_back(std::move(c));
    const bool hit = counter_ == target_;
    ++counter_;
    if (hit) stop_ = true;
    return hit;
  }

  Edit replace_node(const Expr& old_node, const Expr& new_node) const {
    std::string t = print_expr(new_node);
    if (!is_atomic(new_node)) t = "(" + t + ")";
    return {old_node.loc.begin, old_node.loc.end, t};
  }

  void visit_always(AlwaysBlock& b, const std::string& path) {
    Stmt* reset_then = nullptr;
    if (b.is_clocked()) {
      std::set<std::string> async;
      for (const EdgeEvent& ev : b.events) {
        if (facts_.reset_names.contains(ev.signal)) async.insert(ev.signal);
      }
      Stmt* top = &b.body;
      while (top->kind == Stmt::Kind::kBlock && top->body.size() == 1) top = &top->body[0];
      if (top->kind == Stmt::Kind::kIf && mentions(top->cond, facts_.reset_names)) {
        reset_then = &top->body[0];
      }
      if (op_ == kEdgePolarity) {
        for (size_t e = 0; e < b.events.size(); ++e) {
          EdgeEvent& ev = b.events[e];
          if (async.contains(ev.signal)) continue;
          const bool pos = ev.edge == Edge::kPos;
          const std::string kw = pos ? "posedge" : "negedge";
          const std::string nk = pos ? "negedge" : "posedge";
          if (span(ev.loc).rfind(kw, 0) != 0) continue;
          if (site(ev.loc, path + ".event[" + std::to_string(e) + "]",
                   {{ev.loc.begin, ev.loc.begin + 7, nk}})) {
            ev.edge = pos ? Edge::kNeg : Edge::kPos;
            return;
          }
        }
      }
    }
    reset_then_ = reset_then;
    visit_stmt(b.body, false, path + ".body");
  }

  void visit_stmt(Stmt& s, bool in_reset, const std::string& path) {
    if (stop_) return;
    if (&s == reset_then_) in_reset = true;
    switch (s.kind) {
      case Stmt::Kind::kNull:
        return;
      case Stmt::Kind::kBlock:
        for (size_t i = 0; i < s.body.size() && !stop_; ++i) {
          visit_stmt(s.body[i], in_reset, path + ".stmt[" + std::to_string(i) + "]");
        }
        return;
      case Stmt::Kind::kIf:
        if (op_ == kNegateCondition && negate(s.cond, path + ".if.cond")) return;
        visit_expr(s.cond, false, path + ".if.cond");
        if (!stop_) visit_stmt(s.body[0], in_reset, path + ".if.then");
        if (!stop_ && s.has_else()) visit_stmt(s.body[1], in_reset, path + ".if.else");
        return;
      case Stmt::Kind::kCase:
        visit_expr(s.cond, false, path + ".case.subject");
        if (op_ == kDeleteCaseArm && s.items.size() >= 2) {
          for (size_t i = 0; i < s.items.size(); ++i) {
            if (s.items[i].is_default()) continue;
            if (site(s.items[i].loc, path + ".case.arm[" + std::to_string(i) + "]",
                     {delete_lines(s.items[i].loc)})) {
              s.items.erase(s.items.begin() + static_cast<long>(i));
              return;
            }
          }
        }
        for (size_t i = 0; i < s.items.size() && !stop_; ++i) {
          const std::string ip = path + ".case.arm[" + std::to_string(i) + "]";
          for (size_t l = 0; l < s.items[i].labels.size() && !stop_; ++l) {
            visit_expr(s.items[i].labels[l], false, ip + ".label[" + std::to_string(l) + "]");
          }
          if (!stop_) visit_stmt(s.items[i].body, in_reset, ip + ".body");
        }
        return;
      case Stmt::Kind::kBlocking:
      case Stmt::Kind::kNonBlocking:
        if (op_ == kAssignKind) {
          const bool blocking = s.kind == Stmt::Kind::kBlocking;
          const std::string from = blocking ? "=" : "<=";
          const std::string to = blocking ? "<=" : "=";
          if (auto e = token_edit(s.lhs().loc.end, s.rhs.loc.begin, from, to)) {
            if (site(s.loc, path + ".assign", {*e})) {
              s.kind = blocking ? Stmt::Kind::kNonBlocking : Stmt::Kind::kBlocking;
              return;
            }
          }
        }
        if (op_ == kResetValue && in_reset && corrupt_reset(s, path + ".assign.rhs")) {
          return;
        }
        visit_expr(s.rhs, true, path + ".assign.rhs");
        return;
    }
  }

  // A whole-line deletion when the span sits alone on its lines.
  Edit delete_lines(const SourceLoc& loc) const {
    size_t b = static_cast<size_t>(loc.begin);
    size_t e = static_cast<size_t>(loc.end);
    size_t lb = b;
    while (lb > 0 && (text_[lb - 1] == ' ' || text_[lb - 1] == '\t')) --lb;
    size_t le = e;
    while (le < text_.size() && (text_[le] == ' ' || text_[le] == '\t')) ++le;
    if ((lb == 0 || text_[lb - 1] == '\n') && (le == text_.size() || text_[le] == '\n')) {
      if (le < text_.size()) ++le;
      return {static_cast<int>(lb), static_cast<int>(le), ""};
    }
    return {loc.begin, loc.end, ""};
  }

  // Finds `from` between two offsets and swaps it for `to`.
  std::optional<Edit> token_edit(int gap_begin, int gap_end, const std::string& from,
                                 const std::string& to) const {
    if (gap_end < gap_begin) return std::nullopt;
    const std::string_view gap = text_.substr(static_cast<size_t>(gap_begin),
                                              static_cast<size_t>(gap_end - gap_begin));
    const size_t at = gap.find(from);
    if (at == std::string_view::npos) return std::nullopt;
    const int b = gap_begin + static_cast<int>(at);
    return Edit{b, b + static_cast<int>(from.size()), to};
  }

  bool negate(Expr& cond, const std::string& path) {
    Edit e{cond.loc.begin, cond.loc.end, "!(" + span(cond.loc) + ")"};
    if (!site(cond.loc, path, {e})) return false;
    cond = Expr::unary(UnaryOp::kLogicNot, std::move(cond));
    return true;
  }

  bool corrupt_reset(Stmt& s, const std::string& path) {
    Expr& rhs = s.rhs;
    Expr repl;
    if (rhs.kind == Expr::Kind::kNumber) {
      repl = Expr::number(rhs.value ^ 1, rhs.width, rhs.base);
    } else if (rhs.kind == Expr::Kind::kIdent && facts_.state_peers.contains(rhs.name)) {
      auto peers = facts_.state_peers.at(rhs.name);
      std::erase(peers, rhs.name);
      repl = Expr::ident(peers[choice(peers.size())]);
    } else if (rhs.kind == Expr::Kind::kIdent && facts_.params.contains(rhs.name) &&
               s.lhs().kind == Expr::Kind::kIdent &&
               facts_.widths.contains(s.lhs().name)) {
      const int w = facts_.widths.at(s.lhs().name);
      repl = Expr::number((facts_.params.at(rhs.name) ^ 1) & width_mask(w), w, 'd');
    } else {
      return false;
    }
    if (!site(rhs.loc, path, {replace_node(rhs, repl)})) return false;
    rhs = std::move(repl);
    return true;
  }

  void visit_expr(Expr& e, bool value_pos, const std::string& path) {
    if (stop_) return;
    switch (e.kind) {
      case Expr::Kind::kNumber:
        if (op_ == kBitFlip || op_ == kOffByOne) mutate_number(e, path);
        return;
      case Expr::Kind::kIdent:
        if (op_ == kWrongTransition && value_pos && facts_.state_peers.contains(e.name)) {
          auto peers = facts_.state_peers.at(e.name);
          std::erase(peers, e.name);
          Expr repl = Expr::ident(peers[choice(peers.size())]);
          if (site(e.loc, path, {replace_node(e, repl)})) e = std::move(repl);
        }
        return;
      case Expr::Kind::kIndex:
      case Expr::Kind::kSlice:
        return;
      case Expr::Kind::kBinary: {
        if (auto nb = swapped(op_, e.binary_op)) {
          Expr repl = e;
          repl.binary_op = *nb;
          std::vector<Edit> edits;
          if (auto t = token_edit(e.operands[0].loc.end, e.operands[1].loc.begin,
                                  op_text(e.binary_op), op_text(*nb))) {
            edits.push_back(*t);
          }
          edits.push_back(replace_node(e, repl));
          if (site(e.loc, path, std::move(edits))) {
            e.binary_op = *nb;
            return;
          }
        }
        visit_expr(e.operands[0], false, path + ".lhs");
        visit_expr(e.operands[1], false, path + ".rhs");
        return;
      }
      case Expr::Kind::kTernary:
        if (op_ == kNegateCondition && negate(e.operands[0], path + ".cond")) return;
        visit_expr(e.operands[0], false, path + ".cond");
        visit_expr(e.operands[1], value_pos, path + ".then");
        visit_expr(e.operands[2], value_pos, path + ".else");
        return;
      case Expr::Kind::kReplicate:
        for (size_t i = 1; i < e.operands.size(); ++i) {
          visit_expr(e.operands[i], false, path + ".arg[" + std::to_string(i) + "]");
        }
        return;
      case Expr::Kind::kUnary:
      case Expr::Kind::kConcat:
        for (size_t i = 0; i < e.operands.size(); ++i) {
          visit_expr(e.operands[i], false, path + ".arg[" + std::to_string(i) + "]");
        }
        return;
    }
  }

  void mutate_number(Expr& e, const std::string& path) {
    const int w = e.width > 0 ? e.width : 32;
    const uint64_t max = width_mask(w);
    Expr repl = e;
    if (op_ == kBitFlip) {
      const uint64_t bit = e.width > 0 ? choice(static_cast<uint64_t>(w)) : 0;
      repl.value = e.value ^ (uint64_t{1} << bit);
    } else {
      repl.value = e.value == max ? e.value - 1 : e.value + 1;
    }
    if (site(e.loc, path, {replace_node(e, repl)})) e = std::move(repl);
  }

  Op op_;
  std::string_view text_;
  const DesignFacts& facts_;
  uint64_t seed_;
  int target_;
  int counter_ = 0;
  bool stop_ = false;
  const Stmt* reset_then_ = nullptr;
  std::vector<Candidate> out_;
};

std::string apply_edit(const std::string& text, const Edit& e) {
  return text.substr(0, static_cast<size_t>(e.begin)) + e.text +
         text.substr(static_cast<size_t>(e.end));
}

Op op_index(const MutationOperator& op) {
  const auto& all = list_operators();
  for (size_t i = 0; i < all.size(); ++i) {
    if (all[i].id == op.id) return static_cast<Op>(i);
  }
  throw Error(Errc::kInvalidArgument, "unknown mutation operator '" + op.id + "'");
}

// Searches for a stimulus on which the outputs differ.
class DistinctnessChecker {
 public:
  DistinctnessChecker(const ElaboratedDesign& ref, const DesignSignature& sig,
                      const DistinctnessBudget& budget, uint64_t seed)
      : ref_(ref), sig_(sig), budget_(budget), ref_sim_(ref, sig), rng_(seed) {
    int bits = 0;
    for (const PortInfo& p : sig.stimulus_inputs()) bits += p.width;
    exhaustive_ = !ref.is_sequential() && bits <= budget.exhaustive_bits;
  }

  const char* method() const { return exhaustive_ ? "exhaustive" : "random"; }

  // Returns the witness (truncated to its first divergent cycle) if any.
  std::optional<std::pair<UnitTest, size_t>> find(const ElaboratedDesign& mutant) {
    Simulator sim(mutant, sig_);
    const size_t count =
        exhaustive_ ? 1 : static_cast<size_t>(std::max(budget_.random_tests, 0));
    for (size_t i = 0; i < count; ++i) {
      const UnitTest& t = test(i);
      const Trace& expected = ref_trace(i);
      const Trace actual = sim.run(t);
      const Verdict v = compare(actual, expected, sig_.outputs);
      if (v.pass) continue;
      size_t first = 0;
      while (!v.mask[first]) ++first;
      UnitTest w = t;
      w.id = "witness";
      if (exhaustive_) {
        w.rows = {t.rows[first]};
      } else {
        w.rows.resize(first + 1);
      }
      return std::make_pair(w, exhaustive_ ? size_t{0} : first);
    }
    return std::nullopt;
  }

 private:
  const UnitTest& test(size_t i) {
    while (tests_.size() <= i) {
      tests_.push_back(exhaustive_ ? exhaustive_test(sig_, budget_.exhaustive_bits)
                                   : random_test(sig_, budget_.random_cycles, rng_));
    }
    return tests_[i];
  }
  const Trace& ref_trace(size_t i) {
    while (traces_.size() <= i) traces_.push_back(ref_sim_.run(test(traces_.size())));
    return traces_[i];
  }

  const ElaboratedDesign& ref_;
  const DesignSignature& sig_;
  DistinctnessBudget budget_;
  Simulator ref_sim_;
  std::mt19937_64 rng_;
  bool exhaustive_ = false;
  std::vector<UnitTest> tests_;
  std::vector<Trace> traces_;
};

}  // namespace

const std::vector<MutationOperator>& list_operators() {
  static const std::vector<MutationOperator> kOps = {
      {"BC01", "logic-operator-swap", "swap & with | or && with ||"},
      {"BC02", "comparison-swap", "swap == with !=, < with <=, > with >="},
      {"BC03", "condition-negation", "negate an if or ?: condition"},
      {"BC04", "constant-bit-flip", "flip one bit of a literal"},
      {"BC05", "off-by-one-constant", "add one to a literal (subtract at its maximum)"},
      {"BC06", "wrong-state-transition", "replace a state constant with another state"},
      {"BC07", "deleted-case-arm", "remove a non-default case arm"},
      {"BC08", "reset-value-corruption", "change a value assigned under reset"},
      {"BC09", "blocking-nonblocking-swap", "swap = and <= in a procedural assignment"},
      {"BC10", "clock-edge-flip", "swap posedge and negedge on the clock event"},
  };
  return kOps;
}

const MutationOperator& find_operator(std::string_view id) {
  for (const MutationOperator& op : list_operators()) {
    if (op.id == id) return op;
  }
  throw Error(Errc::kInvalidArgument, "unknown mutation operator '" + std::string(id) + "'");
}

std::vector<MutationSite> applicable_sites(const ElaboratedDesign& reference,
                                           const MutationOperator& op,
                                           const MutatorOptions& options) {
  const DesignSignature sig = extract_signature(reference, options.overrides);
  const DesignFacts facts = gather_facts(reference, sig);
  DesignAst ast = reference.ast;
  auto cands = SiteWalker(op_index(op), reference.source.text, facts, 0, -1).walk(ast);
  std::vector<MutationSite> out;
  for (auto& c : cands) out.push_back(std::move(c.site));
  return out;
}

bool witness_diverges(const ElaboratedDesign& reference, const ElaboratedDesign& mutant,
                      const UnitTest& witness, const DesignSignature& signature) {
  const Trace a = Simulator(mutant, signature).run(witness);
  const Trace e = Simulator(reference, signature).run(witness);
  return !compare(a, e, signature.outputs).pass;
}

MutantRecord inject(const ElaboratedDesign& reference, const MutationOperator& op,
                    uint64_t seed, const MutatorOptions& options) {
  const Op idx = op_index(op);
  const DesignSignature sig = extract_signature(reference, options.overrides);
  const DesignFacts facts = gather_facts(reference, sig);
  const std::string& text = reference.source.text;

  DesignAst probe = reference.ast;
  const auto sites = SiteWalker(idx, text, facts, seed, -1).walk(probe);
  if (sites.empty()) {
    throw Error(Errc::kNoApplicableSite, op.id + " (" + op.kind + ") has no site in '" +
                                             reference.ast.name + "'");
  }
  const int n = static_cast<int>(sites.size());
  std::mt19937_64 pick(mix(seed, static_cast<uint64_t>(idx) + 1));
  const int start = static_cast<int>(pick() % static_cast<uint64_t>(n));
  DistinctnessChecker checker(reference, sig, options.budget,
                              mix(seed, 0x5eed0000 + static_cast<uint64_t>(idx)));

  for (int t = 0; t < n; ++t) {
    const int k = (start + t) % n;
    DesignAst expected = reference.ast;
    auto cands = SiteWalker(idx, text, facts, seed, k).walk(expected);
    const Candidate& cand = cands[static_cast<size_t>(k)];

    std::optional<std::string> mutated;
    MutationSite site = cand.site;
    for (const Edit& e : cand.edits) {
      std::string candidate_text = apply_edit(text, e);
      try {
        if (parse_design(DesignSource::mutant(candidate_text, op.id)) == expected) {
          mutated = std::move(candidate_text);
          site.before = text.substr(static_cast<size_t>(e.begin),
                                    static_cast<size_t>(e.end - e.begin));
          site.after = e.text;
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!mutated) continue;

    DesignSource src = DesignSource::mutant(*mutated, op.id);
    std::optional<ElaboratedDesign> mutant;
    try {
      mutant = load_design(src);
      if (!(extract_signature(*mutant, options.overrides) == sig)) continue;
    } catch (const Error&) {
      continue;
    }
    std::optional<std::pair<UnitTest, size_t>> witness;
    try {
      witness = checker.find(*mutant);
    } catch (const Error&) {
      continue;  // e.g. the mutant oscillates
    }
    if (!witness) continue;

    MutantRecord r;
    r.bc = op.id;
    r.kind = op.kind;
    r.source = std::move(src);
    r.site = std::move(site);
    r.seed = seed;
    r.witness = std::move(witness->first);
    r.witness.id = op.id + "-witness";
    r.witness_cycle = witness->second;
    r.method = checker.method();
    r.sites_total = n;
    r.sites_tried = t + 1;
    return r;
  }
  throw Error(Errc::kNoDistinctMutant,
              op.id + " (" + op.kind + "): all " + std::to_string(n) +
                  " sites give mutants equivalent to '" + reference.ast.name + "'");
}

Corpus make_corpus(const ElaboratedDesign& reference, uint64_t seed,
                   const MutatorOptions& options) {
  Corpus c;
  for (const MutationOperator& op : list_operators()) {
    try {
      c.mutants.push_back(inject(reference, op, seed, options));
    } catch (const Error& e) {
      if (e.code() != Errc::kNoApplicableSite && e.code() != Errc::kNoDistinctMutant) throw;
      c.skipped.push_back({op.id, op.kind, std::string(errc_name(e.code())) + ": " + e.what()});
    }
  }
  return c;
}

}  // namespace hwut
