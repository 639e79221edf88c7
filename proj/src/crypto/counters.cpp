// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/crypto/counters.hpp"

namespace ebake::crypto {

namespace {
thread_local OpCounters* t_sink = nullptr;
}

OpCounters& OpCounters::operator+=(const OpCounters& o) {
  sym += o.sym;
  asym += o.asym;
  hash += o.hash;
  xor_ops += o.xor_ops;
  point_mul += o.point_mul;
  point_add += o.point_add;
  return *this;
}

std::string OpCounters::to_string() const {
  return "{sym=" + std::to_string(sym) + ", asym=" + std::to_string(asym) +
         ", hash=" + std::to_string(hash) + ", xor=" + std::to_string(xor_ops) +
         ", point_mul=" + std::to_string(point_mul) + ", point_add=" + std::to_string(point_add) +
         "}";
}

CountingScope::CountingScope(OpCounters& sink) : previous_(t_sink) { t_sink = &sink; }

CountingScope::~CountingScope() { t_sink = previous_; }

#if EBAKE_ENABLE_OP_COUNTERS
void detail::record(Op op) {
  OpCounters* c = t_sink;
  if (c == nullptr) return;
  switch (op) {
    case Op::kSym: ++c->sym; break;
    case Op::kAsym: ++c->asym; break;
    case Op::kHash: ++c->hash; break;
    case Op::kXor: ++c->xor_ops; break;
    case Op::kPointMul: ++c->point_mul; break;
    case Op::kPointAdd: ++c->point_add; break;
  }
}
#endif

}  // namespace ebake::crypto
