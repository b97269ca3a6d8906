#include "hwut/elaborate.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>

#include "eval.hpp"
#include "hwut/error.hpp"
#include "hwut/parser.hpp"

namespace hwut {
namespace {

constexpr int kMaxWidth = 64;

[[noreturn]] void fail(Errc code, const std::string& msg, const SourceLoc& loc) {
  throw Error(code, msg, loc.line, loc.column);
}

using BitMap = std::map<int, uint64_t>;  // signal -> bit mask

class Elaborator {
 public:
  Elaborator(const DesignAst& ast, DesignSource source) {
    d_.ast = ast;
    d_.source = std::move(source);
  }

  ElaboratedDesign run() {
    declare_params_and_signals();
    compile_processes();
    check_drivers();
    order_combinational();
    classify_clocked();
    find_state_registers();
    return std::move(d_);
  }

 private:
  // --- declarations --------------------------------------------------------

  void check_unique(const std::string& name, const SourceLoc& loc) {
    if (names_.contains(name)) {
      fail(Errc::kDuplicateDeclaration, "'" + name + "' is declared twice", loc);
    }
    names_.insert(name);
  }

  uint64_t const_value(const Expr& e, int* width_out = nullptr) {
    int node = compile_expr(e);
    int w = d_.nodes[static_cast<size_t>(node)].width;
    if (width_out) *width_out = w;
    return detail::eval_node(d_, node, w, nullptr);
  }

  // Returns {width, lsb}.
  std::pair<int, int> resolve_range(const std::optional<Range>& r,
                                    const SourceLoc& loc) {
    if (!r) return {1, 0};
    uint64_t msb = const_value(r->msb);
    uint64_t lsb = const_value(r->lsb);
    if (msb < lsb) {
      fail(Errc::kUnsupportedConstruct,
           "ascending ranges [lsb:msb] are not supported", loc);
    }
    if (msb - lsb + 1 > kMaxWidth || msb > 4096) {
      fail(Errc::kUnsupportedConstruct, "vectors wider than 64 bits", loc);
    }
    return {static_cast<int>(msb - lsb + 1), static_cast<int>(lsb)};
  }

  void add_signal(const std::string& name, Signal::Kind kind, NetKind net,
                  const std::optional<Range>& range, const SourceLoc& loc) {
    check_unique(name, loc);
    Signal s;
    s.name = name;
    s.kind = kind;
    auto [w, lsb] = resolve_range(range, loc);
    s.width = w;
    s.lsb = lsb;
    s.loc = loc;
    switch (net) {
      case NetKind::kImplicit:
      case NetKind::kWire:
        s.continuous = true;
        break;
      case NetKind::kReg:
        s.procedural = true;
        break;
      case NetKind::kLogic:
        s.continuous = true;
        s.procedural = true;
        break;
    }
    if (kind == Signal::Kind::kInput) {
      if (net == NetKind::kReg) {
        fail(Errc::kIllegalAssignment, "input '" + name + "' declared reg", loc);
      }
      s.continuous = false;
      s.procedural = false;
    }
    signal_index_[name] = static_cast<int>(d_.signals.size());
    d_.signals.push_back(std::move(s));
  }

  void declare_params_and_signals() {
    // Parameters may be used by port ranges, so they resolve first.
    for (const ModuleItem& item : d_.ast.items) {
      const auto* p = std::get_if<ParamDecl>(&item);
      if (!p) continue;
      check_unique(p->name, p->loc);
      int vw = 0;
      uint64_t v = const_value(p->value, &vw);
      ParamValue pv{p->name, v, vw};
      if (p->range) {
        auto [w, lsb] = resolve_range(p->range, p->loc);
        (void)lsb;
        if (w < 64 && (v >> w) != 0) {
          fail(Errc::kWidthMismatch,
               "value of '" + p->name + "' does not fit its range", p->loc);
        }
        pv.width = w;
      }
      param_index_[p->name] = static_cast<int>(d_.params.size());
      d_.params.push_back(pv);
    }
    for (const PortDecl& p : d_.ast.ports) {
      add_signal(p.name,
                 p.direction == Direction::kInput ? Signal::Kind::kInput
                                                  : Signal::Kind::kOutput,
                 p.net, p.range, p.loc);
    }
    for (const ModuleItem& item : d_.ast.items) {
      const auto* n = std::get_if<NetDecl>(&item);
      if (!n) continue;
      add_signal(n->name,
                 n->net == NetKind::kReg ? Signal::Kind::kReg
                                         : Signal::Kind::kWire,
                 n->net, n->range, n->loc);
    }
  }

  // --- expressions ---------------------------------------------------------

  int push(Node n) {
    d_.nodes.push_back(n);
    return static_cast<int>(d_.nodes.size()) - 1;
  }

  int lookup_signal(const std::string& name, const SourceLoc& loc) {
    auto it = signal_index_.find(name);
    if (it == signal_index_.end()) {
      if (param_index_.contains(name)) {
        fail(Errc::kUnsupportedConstruct,
             "bit-selects of parameters are not supported", loc);
      }
      fail(Errc::kUndeclaredIdentifier, "'" + name + "' is not declared", loc);
    }
    return it->second;
  }

  int checked_width(int w, const SourceLoc& loc) {
    if (w > kMaxWidth) {
      fail(Errc::kUnsupportedConstruct,
           "expression wider than 64 bits is not supported", loc);
    }
    return w;
  }

  int compile_expr(const Expr& e) {
    Node n;
    switch (e.kind) {
      case Expr::Kind::kNumber: {
        n.op = Node::Op::kConst;
        n.value = e.value;
        n.width = e.width > 0 ? e.width : 32;
        if (e.width > 0 && e.width < 64 && (e.value >> e.width) != 0) {
          fail(Errc::kWidthMismatch, "literal value does not fit its size",
               e.loc);
        }
        if (e.width == 0 && (e.value >> 32) != 0) n.width = 64;
        return push(n);
      }
      case Expr::Kind::kIdent: {
        if (auto it = param_index_.find(e.name); it != param_index_.end()) {
          const ParamValue& p = d_.params[static_cast<size_t>(it->second)];
          n.op = Node::Op::kConst;
          n.param = it->second;
          n.value = p.value;
          n.width = p.width;
          return push(n);
        }
        n.op = Node::Op::kSignal;
        n.signal = lookup_signal(e.name, e.loc);
        n.width = d_.signals[static_cast<size_t>(n.signal)].width;
        note_read(n.signal, d_.signals[static_cast<size_t>(n.signal)].mask());
        return push(n);
      }
      case Expr::Kind::kIndex: {
        n.signal = lookup_signal(e.name, e.loc);
        const Signal& s = d_.signals[static_cast<size_t>(n.signal)];
        n.width = 1;
        if (is_constant(e.operands[0])) {
          uint64_t i = const_value(e.operands[0]);
          if (i < static_cast<uint64_t>(s.lsb) ||
              i - static_cast<uint64_t>(s.lsb) >= static_cast<uint64_t>(s.width)) {
            fail(Errc::kWidthMismatch,
                 "bit-select out of range for '" + s.name + "'", e.loc);
          }
          n.op = Node::Op::kIndexConst;
          n.lo = static_cast<int>(i) - s.lsb;
          note_read(n.signal, uint64_t{1} << n.lo);
        } else {
          n.op = Node::Op::kIndexDyn;
          n.lo = s.lsb;
          n.a = compile_expr(e.operands[0]);
          note_read(n.signal, s.mask());
        }
        return push(n);
      }
      case Expr::Kind::kSlice: {
        n.op = Node::Op::kSlice;
        n.signal = lookup_signal(e.name, e.loc);
        const Signal& s = d_.signals[static_cast<size_t>(n.signal)];
        uint64_t hi = const_value(e.operands[0]);
        uint64_t lo = const_value(e.operands[1]);
        if (hi < lo || lo < static_cast<uint64_t>(s.lsb) ||
            hi - static_cast<uint64_t>(s.lsb) >= static_cast<uint64_t>(s.width)) {
          fail(Errc::kWidthMismatch,
               "part-select out of range for '" + s.name + "'", e.loc);
        }
        n.lo = static_cast<int>(lo) - s.lsb;
        n.width = static_cast<int>(hi - lo + 1);
        note_read(n.signal, width_mask(n.width) << n.lo);
        return push(n);
      }
      case Expr::Kind::kUnary: {
        n.op = Node::Op::kUnary;
        n.unary_op = e.unary_op;
        n.a = compile_expr(e.operands[0]);
        int w = d_.nodes[static_cast<size_t>(n.a)].width;
        switch (e.unary_op) {
          case UnaryOp::kBitNot:
          case UnaryOp::kNegate:
          case UnaryOp::kPlus:
            n.width = w;
            break;
          default:
            n.width = 1;
        }
        return push(n);
      }
      case Expr::Kind::kBinary: {
        n.op = Node::Op::kBinary;
        n.binary_op = e.binary_op;
        n.a = compile_expr(e.operands[0]);
        n.b = compile_expr(e.operands[1]);
        int wa = d_.nodes[static_cast<size_t>(n.a)].width;
        int wb = d_.nodes[static_cast<size_t>(n.b)].width;
        switch (e.binary_op) {
          case BinaryOp::kShl:
          case BinaryOp::kShr:
            n.width = wa;
            break;
          case BinaryOp::kAdd:
          case BinaryOp::kSub:
          case BinaryOp::kBitAnd:
          case BinaryOp::kBitOr:
          case BinaryOp::kBitXor:
          case BinaryOp::kBitXnor:
            n.width = std::max(wa, wb);
            break;
          default:
            n.width = 1;
        }
        return push(n);
      }
      case Expr::Kind::kTernary: {
        n.op = Node::Op::kTernary;
        n.a = compile_expr(e.operands[0]);
        n.b = compile_expr(e.operands[1]);
        n.c = compile_expr(e.operands[2]);
        n.width = std::max(d_.nodes[static_cast<size_t>(n.b)].width,
                           d_.nodes[static_cast<size_t>(n.c)].width);
        return push(n);
      }
      case Expr::Kind::kConcat: {
        n.op = Node::Op::kConcat;
        std::vector<int> kids;
        int total = 0;
        for (const Expr& c : e.operands) {
          if (c.kind == Expr::Kind::kNumber && c.width == 0) {
            fail(Errc::kWidthMismatch,
                 "unsized literal in concatenation", c.loc);
          }
          kids.push_back(compile_expr(c));
          total += d_.nodes[static_cast<size_t>(kids.back())].width;
        }
        n.first_arg = static_cast<int>(d_.args.size());
        n.num_args = static_cast<int>(kids.size());
        d_.args.insert(d_.args.end(), kids.begin(), kids.end());
        n.width = checked_width(total, e.loc);
        return push(n);
      }
      case Expr::Kind::kReplicate: {
        n.op = Node::Op::kReplicate;
        uint64_t count = const_value(e.operands[0]);
        if (count == 0) fail(Errc::kWidthMismatch, "zero replication count", e.loc);
        Expr body;
        body.kind = Expr::Kind::kConcat;
        body.loc = e.loc;
        body.operands.assign(e.operands.begin() + 1, e.operands.end());
        n.a = compile_expr(body);
        n.value = count;
        uint64_t w = count * static_cast<uint64_t>(d_.nodes[static_cast<size_t>(n.a)].width);
        n.width = checked_width(w > 1000 ? 1000 : static_cast<int>(w), e.loc);
        return push(n);
      }
    }
    fail(Errc::kSyntaxError, "unknown expression", e.loc);
  }

  bool is_constant(const Expr& e) const {
    switch (e.kind) {
      case Expr::Kind::kNumber:
        return true;
      case Expr::Kind::kIdent:
        return param_index_.contains(e.name);
      case Expr::Kind::kIndex:
      case Expr::Kind::kSlice:
        return false;
      default:
        return std::all_of(e.operands.begin(), e.operands.end(),
                           [this](const Expr& c) { return is_constant(c); });
    }
  }

  void note_read(int signal, uint64_t mask) {
    if (reads_ != nullptr) (*reads_)[signal] |= mask;
  }

  int compile_lvalue(const Expr& e, bool procedural) {
    LValue lv;
    std::vector<const Expr*> parts;
    if (e.kind == Expr::Kind::kConcat) {
      for (const Expr& c : e.operands) parts.push_back(&c);
    } else {
      parts.push_back(&e);
    }
    for (const Expr* p : parts) {
      if (p->kind == Expr::Kind::kConcat) {
        fail(Errc::kUnsupportedConstruct, "nested concatenation targets", p->loc);
      }
      if (p->kind != Expr::Kind::kIdent && p->kind != Expr::Kind::kIndex &&
          p->kind != Expr::Kind::kSlice) {
        fail(Errc::kSyntaxError, "invalid assignment target", p->loc);
      }
      if (param_index_.contains(p->name)) {
        fail(Errc::kIllegalAssignment,
             "cannot assign to parameter '" + p->name + "'", p->loc);
      }
      LValuePart part;
      part.signal = lookup_signal(p->name, p->loc);
      const Signal& s = d_.signals[static_cast<size_t>(part.signal)];
      if (s.kind == Signal::Kind::kInput) {
        fail(Errc::kIllegalAssignment, "cannot assign to input '" + s.name + "'",
             p->loc);
      }
      if (procedural && !s.procedural) {
        fail(Errc::kIllegalAssignment,
             "procedural assignment to net '" + s.name + "' (declare it reg)",
             p->loc);
      }
      if (!procedural && !s.continuous) {
        fail(Errc::kIllegalAssignment,
             "continuous assignment to variable '" + s.name + "'", p->loc);
      }
      if (p->kind == Expr::Kind::kIdent) {
        part.lo = 0;
        part.width = s.width;
      } else if (p->kind == Expr::Kind::kIndex) {
        if (!is_constant(p->operands[0])) {
          fail(Errc::kUnsupportedConstruct,
               "assignment to a variable bit-select is not supported", p->loc);
        }
        uint64_t i = const_value(p->operands[0]);
        if (i < static_cast<uint64_t>(s.lsb) ||
            i - static_cast<uint64_t>(s.lsb) >= static_cast<uint64_t>(s.width)) {
          fail(Errc::kWidthMismatch, "bit-select out of range for '" + s.name + "'",
               p->loc);
        }
        part.lo = static_cast<int>(i) - s.lsb;
        part.width = 1;
      } else {
        uint64_t hi = const_value(p->operands[0]);
        uint64_t lo = const_value(p->operands[1]);
        if (hi < lo || lo < static_cast<uint64_t>(s.lsb) ||
            hi - static_cast<uint64_t>(s.lsb) >= static_cast<uint64_t>(s.width)) {
          fail(Errc::kWidthMismatch,
               "part-select out of range for '" + s.name + "'", p->loc);
        }
        part.lo = static_cast<int>(lo) - s.lsb;
        part.width = static_cast<int>(hi - lo + 1);
      }
      lv.width += part.width;
      if (writes_ != nullptr) {
        (*writes_)[part.signal] |= width_mask(part.width) << part.lo;
      }
      lv.parts.push_back(part);
    }
    checked_width(lv.width, e.loc);
    d_.lvalues.push_back(std::move(lv));
    return static_cast<int>(d_.lvalues.size()) - 1;
  }

  // --- statements ----------------------------------------------------------

  int add_branches(int line, std::vector<std::string> labels) {
    int base = static_cast<int>(d_.branches.size());
    for (auto& l : labels) d_.branches.push_back({line, std::move(l)});
    return base;
  }

  int new_statement(int line) {
    d_.statement_lines.push_back(line);
    return static_cast<int>(d_.statement_lines.size()) - 1;
  }

  int compile_stmt(const Stmt& s) {
    CStmt c;
    c.line = s.loc.line;
    switch (s.kind) {
      case Stmt::Kind::kNull:
        c.kind = CStmt::Kind::kNull;
        break;
      case Stmt::Kind::kBlock:
        c.kind = CStmt::Kind::kBlock;
        for (const Stmt& child : s.body) c.children.push_back(compile_stmt(child));
        break;
      case Stmt::Kind::kIf:
        c.kind = CStmt::Kind::kIf;
        c.cond = compile_expr(s.cond);
        c.branch_base = add_branches(c.line, {"if true", "if false"});
        c.children.push_back(compile_stmt(s.body[0]));
        c.children.push_back(s.has_else() ? compile_stmt(s.body[1]) : -1);
        break;
      case Stmt::Kind::kCase: {
        c.kind = CStmt::Kind::kCase;
        c.cond = compile_expr(s.cond);
        c.case_width = d_.nodes[static_cast<size_t>(c.cond)].width;
        bool has_default = false;
        bool all_const = true;
        std::vector<std::string> labels;
        for (size_t i = 0; i < s.items.size(); ++i) {
          const CaseItem& item = s.items[i];
          CaseArm arm;
          arm.line = item.loc.line;
          for (const Expr& l : item.labels) {
            all_const = all_const && is_constant(l);
            arm.labels.push_back(compile_expr(l));
            c.case_width = std::max(
                c.case_width, d_.nodes[static_cast<size_t>(arm.labels.back())].width);
          }
          if (item.is_default()) {
            has_default = true;
            labels.push_back("case default");
          } else {
            labels.push_back("case arm " + std::to_string(i + 1));
          }
          c.arms.push_back(std::move(arm));
        }
        if (!has_default) {
          c.implicit_default = true;
          if (all_const && c.case_width <= 16) {
            std::set<uint64_t> seen;
            for (const CaseArm& arm : c.arms) {
              for (int l : arm.labels) {
                seen.insert(detail::eval_node(d_, l, c.case_width, nullptr));
              }
            }
            c.implicit_default = seen.size() < (uint64_t{1} << c.case_width);
          }
          if (c.implicit_default) labels.push_back("case no match");
        }
        c.branch_base = add_branches(c.line, std::move(labels));
        for (size_t i = 0; i < s.items.size(); ++i) {
          c.arms[i].body = compile_stmt(s.items[i].body);
        }
        break;
      }
      case Stmt::Kind::kBlocking:
      case Stmt::Kind::kNonBlocking: {
        c.kind = s.kind == Stmt::Kind::kBlocking ? CStmt::Kind::kBlocking
                                                 : CStmt::Kind::kNonBlocking;
        BitMap* saved = reads_;
        reads_ = nullptr;  // target bits are written, not read
        c.lvalue = compile_lvalue(s.lhs(), true);
        reads_ = saved;
        c.rhs = compile_expr(s.rhs);
        c.statement_id = new_statement(c.line);
        record_assignment(c.lvalue, c.rhs);
        break;
      }
    }
    d_.stmts.push_back(std::move(c));
    return static_cast<int>(d_.stmts.size()) - 1;
  }

  void record_assignment(int lvalue, int rhs) {
    const LValue& lv = d_.lvalues[static_cast<size_t>(lvalue)];
    for (const LValuePart& p : lv.parts) {
      const Signal& s = d_.signals[static_cast<size_t>(p.signal)];
      if (lv.parts.size() == 1 && p.width == s.width) {
        full_assignments_[p.signal].push_back(rhs);
      } else {
        partial_assigned_.insert(p.signal);
      }
      if (in_clocked_) clocked_written_.insert(p.signal);
    }
  }

  void compile_processes() {
    for (size_t i = 0; i < d_.ast.items.size(); ++i) {
      const ModuleItem& item = d_.ast.items[i];
      Process p;
      p.item_index = static_cast<int>(i);
      BitMap reads, writes;
      reads_ = &reads;
      writes_ = &writes;
      in_clocked_ = false;
      if (const auto* n = std::get_if<NetDecl>(&item)) {
        if (!n->init) continue;
        p.kind = Process::Kind::kContinuous;
        p.loc = n->loc;
        p.lvalue = compile_lvalue(Expr::ident(n->name), false);
        p.rhs = compile_expr(*n->init);
        p.statement_id = new_statement(n->loc.line);
        record_assignment(p.lvalue, p.rhs);
      } else if (const auto* a = std::get_if<ContAssign>(&item)) {
        p.kind = Process::Kind::kContinuous;
        p.loc = a->loc;
        reads_ = nullptr;
        p.lvalue = compile_lvalue(a->lhs, false);
        reads_ = &reads;
        p.rhs = compile_expr(a->rhs);
        p.statement_id = new_statement(a->loc.line);
        record_assignment(p.lvalue, p.rhs);
      } else if (const auto* b = std::get_if<AlwaysBlock>(&item)) {
        p.loc = b->loc;
        if (b->is_clocked()) {
          p.kind = Process::Kind::kClocked;
          in_clocked_ = true;
          for (const EdgeEvent& ev : b->events) {
            int sig = lookup_signal(ev.signal, ev.loc);
            event_signals_.push_back({sig, ev.edge});
          }
        } else {
          p.kind = Process::Kind::kCombinational;
          if (b->style == AlwaysBlock::Style::kAlwaysFf) {
            fail(Errc::kClockEdge, "always_ff without edge events", b->loc);
          }
        }
        p.body = compile_stmt(b->body);
        if (p.kind == Process::Kind::kClocked) {
          clocked_events_[d_.processes.size()] = std::move(event_signals_);
          event_signals_.clear();
        }
      } else {
        continue;
      }
      reads_ = nullptr;
      writes_ = nullptr;
      process_reads_.push_back(std::move(reads));
      process_writes_.push_back(std::move(writes));
      d_.processes.push_back(std::move(p));
    }
  }

  // --- structural checks ---------------------------------------------------

  void check_drivers() {
    // signal -> per-bit owning process
    std::map<int, std::vector<int>> owner;
    for (size_t pi = 0; pi < d_.processes.size(); ++pi) {
      for (const auto& [sig, mask] : process_writes_[pi]) {
        const Signal& s = d_.signals[static_cast<size_t>(sig)];
        auto& bits = owner[sig];
        if (bits.empty()) bits.assign(static_cast<size_t>(s.width), -1);
        for (int b = 0; b < s.width; ++b) {
          if (!((mask >> b) & 1)) continue;
          int& o = bits[static_cast<size_t>(b)];
          if (o >= 0 && o != static_cast<int>(pi)) {
            fail(Errc::kMultipleDrivers,
                 "'" + s.name + "' is driven by more than one process",
                 d_.processes[pi].loc);
          }
          o = static_cast<int>(pi);
        }
      }
    }
  }

  void order_combinational() {
    std::vector<int> comb;
    for (size_t i = 0; i < d_.processes.size(); ++i) {
      if (d_.processes[i].kind != Process::Kind::kClocked) {
        comb.push_back(static_cast<int>(i));
      }
    }
    std::map<int, std::vector<int>> succ;
    std::map<int, int> indegree;
    for (int p : comb) indegree[p] = 0;
    for (int p : comb) {
      for (int q : comb) {
        if (p == q) continue;
        bool edge = false;
        for (const auto& [sig, mask] : process_writes_[static_cast<size_t>(p)]) {
          auto it = process_reads_[static_cast<size_t>(q)].find(sig);
          if (it != process_reads_[static_cast<size_t>(q)].end() &&
              (it->second & mask)) {
            edge = true;
            break;
          }
        }
        if (edge) {
          succ[p].push_back(q);
          ++indegree[q];
        }
      }
    }
    std::set<int> ready;
    for (int p : comb) {
      if (indegree[p] == 0) ready.insert(p);
    }
    while (!ready.empty()) {
      int p = *ready.begin();
      ready.erase(ready.begin());
      d_.comb_order.push_back(p);
      for (int q : succ[p]) {
        if (--indegree[q] == 0) ready.insert(q);
      }
    }
    if (d_.comb_order.size() != comb.size()) {
      std::set<std::string> names;
      int first = -1;
      for (int p : comb) {
        if (indegree[p] == 0) continue;
        if (first < 0) first = p;
        for (const auto& [sig, mask] : process_writes_[static_cast<size_t>(p)]) {
          names.insert(d_.signals[static_cast<size_t>(sig)].name);
        }
      }
      std::string list;
      for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
      fail(Errc::kCombinationalLoop, "combinational loop through " + list,
           d_.processes[static_cast<size_t>(first)].loc);
    }
  }

  void collect_signals(int node, std::set<int>& out) const {
    if (node < 0) return;
    const Node& n = d_.nodes[static_cast<size_t>(node)];
    if (n.signal >= 0) out.insert(n.signal);
    collect_signals(n.a, out);
    collect_signals(n.b, out);
    collect_signals(n.c, out);
    for (int i = 0; i < n.num_args; ++i) {
      collect_signals(d_.args[static_cast<size_t>(n.first_arg + i)], out);
    }
  }

  int top_statement(int stmt) const {
    while (stmt >= 0) {
      const CStmt& s = d_.stmts[static_cast<size_t>(stmt)];
      if (s.kind != CStmt::Kind::kBlock || s.children.empty()) break;
      stmt = s.children.front();
    }
    return stmt;
  }

  void classify_clocked() {
    for (size_t pi = 0; pi < d_.processes.size(); ++pi) {
      Process& p = d_.processes[pi];
      if (p.kind != Process::Kind::kClocked) continue;
      const auto& events = clocked_events_[pi];
      std::set<int> cond_signals;
      int top = top_statement(p.body);
      if (top >= 0 && d_.stmts[static_cast<size_t>(top)].kind == CStmt::Kind::kIf) {
        collect_signals(d_.stmts[static_cast<size_t>(top)].cond, cond_signals);
      }
      std::vector<std::pair<int, Edge>> clocks;
      for (const auto& ev : events) {
        if (events.size() > 1 && cond_signals.contains(ev.first)) {
          p.async_resets.push_back(ev);
        } else {
          clocks.push_back(ev);
        }
      }
      if (clocks.size() != 1) {
        fail(Errc::kClockEdge,
             clocks.empty() ? "clocked block has no clock edge"
                            : "clocked block has more than one clock edge",
             p.loc);
      }
      p.clock = clocks[0].first;
      p.clock_edge = clocks[0].second;
      auto check_port = [&](int sig, const char* role) {
        const Signal& s = d_.signals[static_cast<size_t>(sig)];
        if (s.kind != Signal::Kind::kInput || s.width != 1) {
          fail(Errc::kClockEdge,
               std::string(role) + " '" + s.name + "' must be a 1-bit input",
               p.loc);
        }
      };
      check_port(p.clock, "clock");
      for (const auto& r : p.async_resets) check_port(r.first, "reset");
    }
  }

  bool acceptable_state_rhs(int node, std::set<int>& refs, std::set<int>& params) const {
    const Node& n = d_.nodes[static_cast<size_t>(node)];
    switch (n.op) {
      case Node::Op::kConst:
        if (n.param < 0) return false;
        params.insert(n.param);
        return true;
      case Node::Op::kSignal:
        refs.insert(n.signal);
        return true;
      case Node::Op::kTernary:
        return acceptable_state_rhs(n.b, refs, params) &&
               acceptable_state_rhs(n.c, refs, params);
      default:
        return false;
    }
  }

  void find_state_registers() {
    std::map<int, std::set<int>> refs;
    std::map<int, std::set<int>> direct_params;
    std::set<int> candidates;
    for (const auto& [sig, rhs_list] : full_assignments_) {
      if (partial_assigned_.contains(sig)) continue;
      bool ok = true;
      for (int rhs : rhs_list) {
        ok = ok && acceptable_state_rhs(rhs, refs[sig], direct_params[sig]);
      }
      if (ok) candidates.insert(sig);
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = candidates.begin(); it != candidates.end();) {
        bool ok = std::all_of(refs[*it].begin(), refs[*it].end(),
                              [&](int r) { return candidates.contains(r); });
        if (!ok) {
          it = candidates.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    }
    for (int sig : candidates) {
      if (!clocked_written_.contains(sig)) continue;
      std::set<int> params;
      std::set<int> seen;
      std::vector<int> stack = {sig};
      while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        if (!seen.insert(s).second) continue;
        params.insert(direct_params[s].begin(), direct_params[s].end());
        for (int r : refs[s]) stack.push_back(r);
      }
      std::map<uint64_t, std::string> by_value;
      const uint64_t mask = d_.signals[static_cast<size_t>(sig)].mask();
      for (int p : params) {
        const ParamValue& pv = d_.params[static_cast<size_t>(p)];
        by_value.emplace(pv.value & mask, pv.name);
      }
      if (by_value.size() < 2) continue;
      StateRegister reg;
      reg.signal = sig;
      for (const auto& [v, name] : by_value) {
        reg.values.push_back(v);
        reg.constants.push_back(name);
      }
      d_.state_registers.push_back(std::move(reg));
    }
  }

  ElaboratedDesign d_;
  std::set<std::string> names_;
  std::unordered_map<std::string, int> signal_index_;
  std::unordered_map<std::string, int> param_index_;

  BitMap* reads_ = nullptr;
  BitMap* writes_ = nullptr;
  std::vector<BitMap> process_reads_;
  std::vector<BitMap> process_writes_;
  bool in_clocked_ = false;
  std::vector<std::pair<int, Edge>> event_signals_;
  std::map<size_t, std::vector<std::pair<int, Edge>>> clocked_events_;

  std::map<int, std::vector<int>> full_assignments_;
  std::set<int> partial_assigned_;
  std::set<int> clocked_written_;
};

}  // namespace

int ElaboratedDesign::find_signal(std::string_view name) const {
  for (size_t i = 0; i < signals.size(); ++i) {
    if (signals[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const ParamValue* ElaboratedDesign::find_param(std::string_view name) const {
  for (const ParamValue& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

int ElaboratedDesign::num_continuous() const {
  return static_cast<int>(std::count_if(
      processes.begin(), processes.end(),
      [](const Process& p) { return p.kind == Process::Kind::kContinuous; }));
}

int ElaboratedDesign::num_combinational_blocks() const {
  return static_cast<int>(std::count_if(
      processes.begin(), processes.end(),
      [](const Process& p) { return p.kind == Process::Kind::kCombinational; }));
}

int ElaboratedDesign::num_clocked() const {
  return static_cast<int>(std::count_if(
      processes.begin(), processes.end(),
      [](const Process& p) { return p.kind == Process::Kind::kClocked; }));
}

ElaboratedDesign elaborate(const DesignAst& ast, DesignSource source) {
  return Elaborator(ast, std::move(source)).run();
}

ElaboratedDesign load_design(const DesignSource& source) {
  return elaborate(parse_design(source), source);
}

// --- signature ---------------------------------------------------------------

namespace {

int unwrap_top(const ElaboratedDesign& d, int stmt) {
  while (stmt >= 0) {
    const CStmt& s = d.stmts[static_cast<size_t>(stmt)];
    if (s.kind != CStmt::Kind::kBlock || s.children.empty()) break;
    stmt = s.children.front();
  }
  return stmt;
}

bool constant_branch(const ElaboratedDesign& d, int stmt) {
  if (stmt < 0) return true;
  const CStmt& s = d.stmts[static_cast<size_t>(stmt)];
  switch (s.kind) {
    case CStmt::Kind::kBlocking:
    case CStmt::Kind::kNonBlocking:
      return d.nodes[static_cast<size_t>(s.rhs)].op == Node::Op::kConst;
    case CStmt::Kind::kBlock:
      return std::all_of(s.children.begin(), s.children.end(),
                         [&](int c) { return constant_branch(d, c); });
    case CStmt::Kind::kNull:
      return true;
    default:
      return false;
  }
}

// Recognizes `x`, `!x`, `~x`, `x == k`, `x != k` over a 1-bit input.
std::optional<std::pair<int, bool>> reset_condition(const ElaboratedDesign& d,
                                                    int node) {
  const Node& n = d.nodes[static_cast<size_t>(node)];
  auto input_bit = [&](int idx) -> int {
    const Node& m = d.nodes[static_cast<size_t>(idx)];
    if (m.op != Node::Op::kSignal) return -1;
    const Signal& s = d.signals[static_cast<size_t>(m.signal)];
    return (s.kind == Signal::Kind::kInput && s.width == 1) ? m.signal : -1;
  };
  if (int s = input_bit(node); s >= 0) return std::make_pair(s, true);
  if (n.op == Node::Op::kUnary &&
      (n.unary_op == UnaryOp::kLogicNot || n.unary_op == UnaryOp::kBitNot)) {
    if (int s = input_bit(n.a); s >= 0) return std::make_pair(s, false);
  }
  if (n.op == Node::Op::kBinary &&
      (n.binary_op == BinaryOp::kEq || n.binary_op == BinaryOp::kNe)) {
    int s = input_bit(n.a);
    const Node& k = d.nodes[static_cast<size_t>(n.b)];
    if (s >= 0 && k.op == Node::Op::kConst && k.value <= 1) {
      bool high = (k.value == 1) == (n.binary_op == BinaryOp::kEq);
      return std::make_pair(s, high);
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<PortInfo> DesignSignature::stimulus_inputs() const {
  std::vector<PortInfo> out;
  for (const PortInfo& p : inputs) {
    if (clock && p.name == *clock) continue;
    out.push_back(p);
  }
  return out;
}

std::string DesignSignature::to_text() const {
  std::string out = "module " + module + "\n";
  auto describe = [&](const char* dir, const PortInfo& p) {
    std::string line = std::string("  ") + dir + " " + p.name;
    line += p.width == 1 ? " (1 bit" : " (" + std::to_string(p.width) + " bits";
    if (clock && p.name == *clock) line += ", clock";
    if (reset && p.name == reset->name) {
      line += std::string(", ") +
              (reset->asynchronous ? "asynchronous" : "synchronous") +
              (reset->active_high ? " active-high" : " active-low") + " reset";
    }
    return line + ")\n";
  };
  for (const PortInfo& p : inputs) out += describe("input ", p);
  for (const PortInfo& p : outputs) out += describe("output", p);
  return out;
}

DesignSignature extract_signature(const ElaboratedDesign& design,
                                  const SignatureOverrides& overrides) {
  DesignSignature sig;
  sig.module = design.ast.name;
  for (const Signal& s : design.signals) {
    if (s.kind == Signal::Kind::kInput) sig.inputs.push_back({s.name, s.width});
    if (s.kind == Signal::Kind::kOutput) sig.outputs.push_back({s.name, s.width});
  }

  std::optional<int> clock;
  std::map<int, ResetInfo> resets;
  for (const Process& p : design.processes) {
    if (p.kind != Process::Kind::kClocked) continue;
    if (clock && *clock != p.clock) {
      throw Error(Errc::kAmbiguousClock,
                  "processes are clocked by both '" +
                      design.signals[static_cast<size_t>(*clock)].name +
                      "' and '" +
                      design.signals[static_cast<size_t>(p.clock)].name + "'",
                  p.loc.line, p.loc.column);
    }
    clock = p.clock;
    for (const auto& [r, edge] : p.async_resets) {
      resets.emplace(r, ResetInfo{design.signals[static_cast<size_t>(r)].name,
                                  edge == Edge::kPos, true});
    }
    if (!p.async_resets.empty()) continue;
    int top = unwrap_top(design, p.body);
    if (top < 0) continue;
    const CStmt& s = design.stmts[static_cast<size_t>(top)];
    if (s.kind != CStmt::Kind::kIf) continue;
    auto cond = reset_condition(design, s.cond);
    if (!cond || cond->first == p.clock) continue;
    if (!constant_branch(design, s.children[0])) continue;
    resets.emplace(cond->first,
                   ResetInfo{design.signals[static_cast<size_t>(cond->first)].name,
                             cond->second, false});
  }
  if (clock) sig.clock = design.signals[static_cast<size_t>(*clock)].name;
  if (!resets.empty()) sig.reset = resets.begin()->second;

  if (overrides.clock) {
    int c = design.find_signal(*overrides.clock);
    if (c < 0 || design.signals[static_cast<size_t>(c)].kind != Signal::Kind::kInput ||
        design.signals[static_cast<size_t>(c)].width != 1) {
      throw Error(Errc::kInvalidArgument,
                  "clock override '" + *overrides.clock + "' is not a 1-bit input");
    }
    sig.clock = *overrides.clock;
  }
  if (overrides.reset) {
    int r = design.find_signal(overrides.reset->name);
    if (r < 0 || design.signals[static_cast<size_t>(r)].kind != Signal::Kind::kInput) {
      throw Error(Errc::kInvalidArgument,
                  "reset override '" + overrides.reset->name + "' is not an input");
    }
    sig.reset = overrides.reset;
  }
  return sig;
}

}  // namespace hwut
