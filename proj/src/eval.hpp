#pragma once

// Expression evaluation shared by elaboration (constant folding) and the
// simulator. Unsigned two-valued semantics with Verilog context widths: an
// operand of a context-determined operator is evaluated at the width of its
// context, self-determined operands at their own width.

#include "hwut/elaborate.hpp"
#include "hwut/error.hpp"

namespace hwut::detail {

inline uint64_t eval_node(const ElaboratedDesign& d, int idx, int width,
                          const uint64_t* values) {
  const Node& n = d.nodes[static_cast<size_t>(idx)];
  const uint64_t m = width_mask(width);
  auto self = [&](int child) {
    return eval_node(d, child, d.nodes[static_cast<size_t>(child)].width,
                     values);
  };
  auto at = [&](int child) { return eval_node(d, child, width, values); };
  auto read = [&](int sig) -> uint64_t {
    if (values == nullptr) {
      throw Error(Errc::kWidthMismatch,
                  "expression is not constant: references '" +
                      d.signals[static_cast<size_t>(sig)].name + "'");
    }
    return values[sig];
  };

  switch (n.op) {
    case Node::Op::kConst:
      return n.value & m;
    case Node::Op::kSignal:
      return read(n.signal) & m;
    case Node::Op::kIndexConst:
      return (read(n.signal) >> n.lo) & 1;
    case Node::Op::kIndexDyn: {
      uint64_t i = self(n.a);
      const Signal& s = d.signals[static_cast<size_t>(n.signal)];
      if (i < static_cast<uint64_t>(n.lo)) return 0;
      i -= static_cast<uint64_t>(n.lo);
      if (i >= static_cast<uint64_t>(s.width)) return 0;
      return (read(n.signal) >> i) & 1;
    }
    case Node::Op::kSlice:
      return (read(n.signal) >> n.lo) & width_mask(n.width) & m;
    case Node::Op::kUnary: {
      switch (n.unary_op) {
        case UnaryOp::kLogicNot:
          return self(n.a) == 0 ? 1 : 0;
        case UnaryOp::kBitNot:
          return ~at(n.a) & m;
        case UnaryOp::kNegate:
          return (~at(n.a) + 1) & m;
        case UnaryOp::kPlus:
          return at(n.a);
        default:
          break;
      }
      const int w = d.nodes[static_cast<size_t>(n.a)].width;
      const uint64_t v = self(n.a);
      const uint64_t wm = width_mask(w);
      const bool all = (v & wm) == wm;
      const bool any = (v & wm) != 0;
      const bool parity = __builtin_popcountll(v & wm) & 1;
      switch (n.unary_op) {
        case UnaryOp::kReduceAnd: return all;
        case UnaryOp::kReduceOr: return any;
        case UnaryOp::kReduceXor: return parity;
        case UnaryOp::kReduceNand: return !all;
        case UnaryOp::kReduceNor: return !any;
        case UnaryOp::kReduceXnor: return !parity;
        default: return 0;
      }
    }
    case Node::Op::kBinary: {
      switch (n.binary_op) {
        case BinaryOp::kAdd: return (at(n.a) + at(n.b)) & m;
        case BinaryOp::kSub: return (at(n.a) - at(n.b)) & m;
        case BinaryOp::kBitAnd: return at(n.a) & at(n.b);
        case BinaryOp::kBitOr: return at(n.a) | at(n.b);
        case BinaryOp::kBitXor: return at(n.a) ^ at(n.b);
        case BinaryOp::kBitXnor: return ~(at(n.a) ^ at(n.b)) & m;
        case BinaryOp::kShl: {
          uint64_t s = self(n.b);
          return s >= 64 ? 0 : (at(n.a) << s) & m;
        }
        case BinaryOp::kShr: {
          uint64_t s = self(n.b);
          return s >= 64 ? 0 : (at(n.a) >> s) & m;
        }
        case BinaryOp::kLogicAnd:
          return (self(n.a) != 0 && self(n.b) != 0) ? 1 : 0;
        case BinaryOp::kLogicOr:
          return (self(n.a) != 0 || self(n.b) != 0) ? 1 : 0;
        default:
          break;
      }
      const int cw = std::max(d.nodes[static_cast<size_t>(n.a)].width,
                              d.nodes[static_cast<size_t>(n.b)].width);
      const uint64_t x = eval_node(d, n.a, cw, values);
      const uint64_t y = eval_node(d, n.b, cw, values);
      switch (n.binary_op) {
        case BinaryOp::kLt: return x < y;
        case BinaryOp::kLe: return x <= y;
        case BinaryOp::kGt: return x > y;
        case BinaryOp::kGe: return x >= y;
        case BinaryOp::kEq: return x == y;
        case BinaryOp::kNe: return x != y;
        default: return 0;
      }
    }
    case Node::Op::kTernary:
      return self(n.a) != 0 ? at(n.b) : at(n.c);
    case Node::Op::kConcat: {
      uint64_t out = 0;
      for (int i = 0; i < n.num_args; ++i) {
        int child = d.args[static_cast<size_t>(n.first_arg + i)];
        int cw = d.nodes[static_cast<size_t>(child)].width;
        out = (cw >= 64 ? 0 : out << cw) | self(child);
      }
      return out & m;
    }
    case Node::Op::kReplicate: {
      const Node& body = d.nodes[static_cast<size_t>(n.a)];
      uint64_t unit = self(n.a);
      uint64_t out = 0;
      for (uint64_t i = 0; i < n.value; ++i) {
        out = (body.width >= 64 ? 0 : out << body.width) | unit;
      }
      return out & m;
    }
  }
  return 0;
}

}  // namespace hwut::detail
