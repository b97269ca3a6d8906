// Test helpers. The evaluators here deliberately share no code with the
// simulator: they walk the parser's AST directly.
#pragma once

#include <cstdint>
#include <filesystem>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "hwut/ast.hpp"
#include "hwut/elaborate.hpp"
#include "hwut/manifest.hpp"
#include "hwut/parser.hpp"
#include "hwut/simulator.hpp"
#include "hwut/stimulus.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(HWUT_DATA_DIR); }
inline fs::path problem_dir(const std::string& name) { return data_dir() / "problems" / name; }

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("hwut_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Builds a scripted mock directory.
class MockScript {
 public:
  explicit MockScript(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void add(const std::string& scope, const std::string& text) {
    sequences_[scope].push_back(file(text));
  }
  void add_digest(const std::string& digest, const std::string& text) {
    digests_[digest] = file(text);
  }
  const fs::path& write() {
    nlohmann::json j = {{"digests", digests_}, {"sequences", sequences_}};
    std::ofstream(dir_ / "index.json") << j.dump(2);
    return dir_;
  }

 private:
  std::string file(const std::string& text) {
    char name[32];
    std::snprintf(name, sizeof name, "%04d.txt", ++count_);
    std::ofstream(dir_ / name, std::ios::binary) << text;
    return name;
  }

  fs::path dir_;
  int count_ = 0;
  std::map<std::string, std::vector<std::string>> sequences_;
  std::map<std::string, std::string> digests_;
};

inline std::string fenced(const std::string& body, const std::string& lang = "") {
  return "Here you go.\n\n```" + lang + "\n" + body + (body.empty() || body.back() != '\n' ? "\n" : "") +
         "```\n";
}

// --- independent combinational evaluator --------------------------------------

inline uint64_t mask_of(int w) { return w >= 64 ? ~uint64_t{0} : ((uint64_t{1} << w) - 1); }

class AstEvaluator {
 public:
  explicit AstEvaluator(const hwut::DesignAst& ast) : ast_(ast) {
    for (const auto& p : ast.ports) declare(p.name, p.range);
    for (const auto& item : ast.items) {
      if (auto* n = std::get_if<hwut::NetDecl>(&item)) declare(n->name, n->range);
    }
    for (const auto& item : ast.items) {
      if (auto* p = std::get_if<hwut::ParamDecl>(&item)) {
        const int w = p->range ? range_width(*p->range) : self_width(p->value);
        params_[p->name] = {eval(p->value, w) & mask_of(w), w};
      }
    }
  }

  // Drives inputs, iterates every process until nothing changes.
  std::map<std::string, uint64_t> run(const std::map<std::string, uint64_t>& inputs) {
    for (auto& [name, v] : values_) v = 0;
    for (const auto& [name, v] : inputs) values_[name] = v & mask_of(widths_.at(name));
    for (int sweep = 0; sweep < 200; ++sweep) {
      const auto before = values_;
      for (const auto& item : ast_.items) {
        if (auto* a = std::get_if<hwut::ContAssign>(&item)) {
          assign(a->lhs, a->rhs);
        } else if (auto* n = std::get_if<hwut::NetDecl>(&item); n && n->init) {
          assign(hwut::Expr::ident(n->name), *n->init);
        } else if (auto* b = std::get_if<hwut::AlwaysBlock>(&item)) {
          exec(b->body);
        }
      }
      if (values_ == before) return values_;
    }
    throw std::runtime_error("evaluator did not settle");
  }

 private:
  struct Param {
    uint64_t value;
    int width;
  };

  int range_width(const hwut::Range& r) {
    const int msb = static_cast<int>(eval(r.msb, 32));
    const int lsb = static_cast<int>(eval(r.lsb, 32));
    return msb - lsb + 1;
  }
  int range_lsb(const std::optional<hwut::Range>& r) {
    return r ? static_cast<int>(eval(r->lsb, 32)) : 0;
  }
  void declare(const std::string& name, const std::optional<hwut::Range>& r) {
    widths_[name] = r ? range_width(*r) : 1;
    lsbs_[name] = range_lsb(r);
    values_[name] = 0;
  }

  int self_width(const hwut::Expr& e) {
    using K = hwut::Expr::Kind;
    using B = hwut::BinaryOp;
    using U = hwut::UnaryOp;
    switch (e.kind) {
      case K::kNumber:
        return e.width ? e.width : 32;
      case K::kIdent:
        if (auto it = params_.find(e.name); it != params_.end()) return it->second.width;
        return widths_.at(e.name);
      case K::kUnary:
        if (e.unary_op == U::kBitNot || e.unary_op == U::kNegate || e.unary_op == U::kPlus) {
          return self_width(e.operands[0]);
        }
        return 1;
      case K::kBinary:
        switch (e.binary_op) {
          case B::kShl:
          case B::kShr:
            return self_width(e.operands[0]);
          case B::kLt: case B::kLe: case B::kGt: case B::kGe: case B::kEq: case B::kNe:
          case B::kLogicAnd: case B::kLogicOr:
            return 1;
          default:
            return std::max(self_width(e.operands[0]), self_width(e.operands[1]));
        }
      case K::kTernary:
        return std::max(self_width(e.operands[1]), self_width(e.operands[2]));
      case K::kConcat: {
        int w = 0;
        for (const auto& o : e.operands) w += self_width(o);
        return w;
      }
      case K::kReplicate: {
        int w = 0;
        for (size_t i = 1; i < e.operands.size(); ++i) w += self_width(e.operands[i]);
        return w * static_cast<int>(eval(e.operands[0], 32));
      }
      case K::kIndex:
        return 1;
      case K::kSlice:
        return static_cast<int>(eval(e.operands[0], 32) - eval(e.operands[1], 32)) + 1;
    }
    return 1;
  }

  uint64_t read(const std::string& name) {
    if (auto it = params_.find(name); it != params_.end()) return it->second.value;
    return values_.at(name);
  }

  // Value of e evaluated in a context of width w (w >= self width).
  uint64_t eval(const hwut::Expr& e, int w) {
    using K = hwut::Expr::Kind;
    using B = hwut::BinaryOp;
    using U = hwut::UnaryOp;
    const uint64_t m = mask_of(w);
    switch (e.kind) {
      case K::kNumber:
        return e.value & m;
      case K::kIdent:
        return read(e.name) & m;
      case K::kUnary: {
        const hwut::Expr& a = e.operands[0];
        const int sw = self_width(a);
        const uint64_t v = eval(a, sw);
        switch (e.unary_op) {
          case U::kLogicNot: return v == 0;
          case U::kBitNot: return ~eval(a, w) & m;
          case U::kNegate: return (~eval(a, w) + 1) & m;
          case U::kPlus: return eval(a, w);
          case U::kReduceAnd: return v == mask_of(sw);
          case U::kReduceOr: return v != 0;
          case U::kReduceXor: return __builtin_popcountll(v) & 1;
          case U::kReduceNand: return v != mask_of(sw);
          case U::kReduceNor: return v == 0;
          case U::kReduceXnor: return !(__builtin_popcountll(v) & 1);
        }
        return 0;
      }
      case K::kBinary: {
        const hwut::Expr& a = e.operands[0];
        const hwut::Expr& b = e.operands[1];
        switch (e.binary_op) {
          case B::kAdd: return (eval(a, w) + eval(b, w)) & m;
          case B::kSub: return (eval(a, w) - eval(b, w)) & m;
          case B::kBitAnd: return eval(a, w) & eval(b, w);
          case B::kBitOr: return eval(a, w) | eval(b, w);
          case B::kBitXor: return eval(a, w) ^ eval(b, w);
          case B::kBitXnor: return ~(eval(a, w) ^ eval(b, w)) & m;
          case B::kShl: {
            const uint64_t s = eval(b, self_width(b));
            return s >= 64 ? 0 : (eval(a, w) << s) & m;
          }
          case B::kShr: {
            const uint64_t s = eval(b, self_width(b));
            return s >= 64 ? 0 : (eval(a, w) >> s) & m;
          }
          case B::kLogicAnd: return eval(a, self_width(a)) != 0 && eval(b, self_width(b)) != 0;
          case B::kLogicOr: return eval(a, self_width(a)) != 0 || eval(b, self_width(b)) != 0;
          default: {
            const int cw = std::max(self_width(a), self_width(b));
            const uint64_t x = eval(a, cw), y = eval(b, cw);
            switch (e.binary_op) {
              case B::kLt: return x < y;
              case B::kLe: return x <= y;
              case B::kGt: return x > y;
              case B::kGe: return x >= y;
              case B::kEq: return x == y;
              case B::kNe: return x != y;
              default: return 0;
            }
          }
        }
      }
      case K::kTernary:
        return eval(e.operands[0], self_width(e.operands[0])) ? eval(e.operands[1], w)
                                                              : eval(e.operands[2], w);
      case K::kConcat: {
        uint64_t v = 0;
        for (const auto& o : e.operands) {
          const int ow = self_width(o);
          v = (v << ow) | eval(o, ow);
        }
        return v & m;
      }
      case K::kReplicate: {
        uint64_t body = 0;
        int bw = 0;
        for (size_t i = 1; i < e.operands.size(); ++i) {
          const int ow = self_width(e.operands[i]);
          body = (body << ow) | eval(e.operands[i], ow);
          bw += ow;
        }
        uint64_t v = 0;
        for (uint64_t k = 0; k < eval(e.operands[0], 32); ++k) v = (v << bw) | body;
        return v & m;
      }
      case K::kIndex: {
        const int64_t i = static_cast<int64_t>(eval(e.operands[0], self_width(e.operands[0]))) -
                          lsbs_.at(e.name);
        if (i < 0 || i >= widths_.at(e.name)) return 0;
        return (read(e.name) >> i) & 1;
      }
      case K::kSlice: {
        const int hi = static_cast<int>(eval(e.operands[0], 32)) - lsbs_.at(e.name);
        const int lo = static_cast<int>(eval(e.operands[1], 32)) - lsbs_.at(e.name);
        return (read(e.name) >> lo) & mask_of(hi - lo + 1) & m;
      }
    }
    return 0;
  }

  void store(const hwut::Expr& lhs, uint64_t v) {
    using K = hwut::Expr::Kind;
    switch (lhs.kind) {
      case K::kIdent:
        values_[lhs.name] = v & mask_of(widths_.at(lhs.name));
        break;
      case K::kIndex: {
        const int i = static_cast<int>(eval(lhs.operands[0], 32)) - lsbs_.at(lhs.name);
        if (i < 0 || i >= widths_.at(lhs.name)) break;
        values_[lhs.name] = (values_[lhs.name] & ~(uint64_t{1} << i)) | ((v & 1) << i);
        break;
      }
      case K::kSlice: {
        const int hi = static_cast<int>(eval(lhs.operands[0], 32)) - lsbs_.at(lhs.name);
        const int lo = static_cast<int>(eval(lhs.operands[1], 32)) - lsbs_.at(lhs.name);
        const uint64_t fm = mask_of(hi - lo + 1) << lo;
        values_[lhs.name] = (values_[lhs.name] & ~fm) | ((v << lo) & fm);
        break;
      }
      case K::kConcat: {
        // Least significant part is written last in the list.
        for (auto it = lhs.operands.rbegin(); it != lhs.operands.rend(); ++it) {
          const int w = self_width(*it);
          store(*it, v & mask_of(w));
          v >>= w;
        }
        break;
      }
      default:
        throw std::runtime_error("unsupported lvalue");
    }
  }

  void assign(const hwut::Expr& lhs, const hwut::Expr& rhs) {
    const int w = std::max(self_width(lhs), self_width(rhs));
    store(lhs, eval(rhs, w));
  }

  void exec(const hwut::Stmt& s) {
    using K = hwut::Stmt::Kind;
    switch (s.kind) {
      case K::kBlock:
        for (const auto& b : s.body) exec(b);
        break;
      case K::kIf:
        if (eval(s.cond, self_width(s.cond))) {
          exec(s.body[0]);
        } else if (s.has_else()) {
          exec(s.body[1]);
        }
        break;
      case K::kCase: {
        const hwut::CaseItem* chosen = nullptr;
        for (const auto& item : s.items) {
          for (const auto& label : item.labels) {
            const int cw = std::max(self_width(s.cond), self_width(label));
            if (eval(s.cond, cw) == eval(label, cw)) {
              chosen = &item;
              break;
            }
          }
          if (chosen) break;
        }
        if (!chosen) {
          for (const auto& item : s.items) {
            if (item.is_default()) chosen = &item;
          }
        }
        if (chosen) exec(chosen->body);
        break;
      }
      case K::kBlocking:
      case K::kNonBlocking:
        assign(s.lhs(), s.rhs);
        break;
      case K::kNull:
        break;
    }
  }

  const hwut::DesignAst& ast_;
  std::map<std::string, int> widths_;
  std::map<std::string, int> lsbs_;
  std::map<std::string, uint64_t> values_;
  std::map<std::string, Param> params_;
};

// --- naive trace diff ----------------------------------------------------------

struct NaiveDiff {
  size_t cycles = 0;
  size_t divergent = 0;
  bool any = false;
};

inline NaiveDiff naive_diff(const hwut::Trace& a, const hwut::Trace& b,
                            const std::vector<hwut::PortInfo>& outputs) {
  NaiveDiff d;
  d.cycles = a.cycles;
  for (size_t n = 0; n < a.cycles; ++n) {
    bool differs = false;
    for (const auto& o : outputs) {
      for (const auto& s : a.signals) {
        if (s.name != o.name) continue;
        for (const auto& t : b.signals) {
          if (t.name == o.name && t.values[n] != s.values[n]) differs = true;
        }
      }
    }
    if (differs) {
      ++d.divergent;
      d.any = true;
    }
  }
  return d;
}

// --- alu4 debug fixture ----------------------------------------------------------

// The reference alu4 with its SUB and AND arms replaced.
inline std::string alu4_variant(const std::string& sub_arm, const std::string& and_arm) {
  std::string text = slurp(problem_dir("alu4") / "ref.sv");
  auto swap = [&](const std::string& from, const std::string& to) {
    const size_t at = text.find(from);
    if (at == std::string::npos) throw std::runtime_error("alu4 reference changed: " + from);
    text.replace(at, from.size(), to);
  };
  swap("OP_SUB: result = x - y;", "OP_SUB: result = " + sub_arm + ";");
  swap("OP_AND: result = x & y;", "OP_AND: result = " + and_arm + ";");
  return text;
}

struct AluRow {
  uint64_t op, x, y;
};

// Hand model of alu4 outputs {result, zero}; the flags select the buggy arms.
inline std::pair<uint64_t, uint64_t> alu4_model(const AluRow& r, bool sub_ok, bool and_ok) {
  uint64_t res = 0;
  switch (r.op) {
    case 0: res = r.x + r.y; break;
    case 1: res = sub_ok ? r.x - r.y : r.x + r.y; break;
    case 2: res = and_ok ? (r.x & r.y) : (r.x | r.y); break;
    default: res = r.x | r.y; break;
  }
  res &= 15;
  return {res, res == 0 ? 1u : 0u};
}

// Ten single-row tests: four that no variant gets wrong, three SUB rows whose
// x+y differs from x-y, three AND rows with x != y.
inline std::vector<AluRow> alu4_rows() {
  return {{0, 3, 4},  {0, 9, 9},  {3, 5, 10}, {3, 0, 0}, {1, 7, 2},
          {1, 12, 5}, {1, 3, 1},  {2, 6, 3},  {2, 15, 8}, {2, 1, 12}};
}

inline std::vector<hwut::UnitTest> alu4_tests() {
  std::vector<hwut::UnitTest> tests;
  int n = 0;
  for (const AluRow& r : alu4_rows()) {
    hwut::UnitTest t;
    t.id = "alu_t" + std::to_string(++n);
    t.inputs = {{"op", 2}, {"x", 4}, {"y", 4}};
    t.rows = {{r.op, r.x, r.y}};
    tests.push_back(std::move(t));
  }
  return tests;
}

// Independent pass fraction of a variant over alu4_rows().
inline double alu4_pass_fraction(bool sub_ok, bool and_ok) {
  int pass = 0;
  const auto rows = alu4_rows();
  for (const AluRow& r : rows) pass += alu4_model(r, sub_ok, and_ok) == alu4_model(r, true, true);
  return static_cast<double>(pass) / static_cast<double>(rows.size());
}

}  // namespace testsupport
