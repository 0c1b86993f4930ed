#pragma once

#include <cstdint>

namespace rsms {

// Per-thread operation tally fed by the crypto and bloom-filter layers.
// Counters only ever increase during a run; cost accounting works on
// snapshot differences.
struct OpCounters {
  std::uint64_t point_mul = 0;
  std::uint64_t point_add = 0;
  std::uint64_t hash_calls = 0;
  std::uint64_t mod_inv = 0;
  std::uint64_t mod_mul = 0;
  std::uint64_t mod_exp = 0;
  std::uint64_t bf_check = 0;

  OpCounters& operator+=(const OpCounters& o) {
    point_mul += o.point_mul;
    point_add += o.point_add;
    hash_calls += o.hash_calls;
    mod_inv += o.mod_inv;
    mod_mul += o.mod_mul;
    mod_exp += o.mod_exp;
    bf_check += o.bf_check;
    return *this;
  }

  OpCounters operator-(const OpCounters& o) const {
    OpCounters d;
    d.point_mul = point_mul - o.point_mul;
    d.point_add = point_add - o.point_add;
    d.hash_calls = hash_calls - o.hash_calls;
    d.mod_inv = mod_inv - o.mod_inv;
    d.mod_mul = mod_mul - o.mod_mul;
    d.mod_exp = mod_exp - o.mod_exp;
    d.bf_check = bf_check - o.bf_check;
    return d;
  }

  bool operator==(const OpCounters&) const = default;
};

inline OpCounters& op_counters() {
  thread_local OpCounters counters;
  return counters;
}

inline OpCounters op_counters_snapshot() { return op_counters(); }

inline void op_counters_reset() { op_counters() = OpCounters{}; }

// Splits one protocol step into the operations the reference cost formulas
// model ("core") and everything this artifact adds on top, e.g. report
// encryption or redundant verification ("extras").
struct PhaseMeter {
  OpCounters core;
  OpCounters extras;
};

// Accumulates the counter delta over its lifetime into a target (when the
// target is null the deltas still land in the thread totals, nothing else).
class MeterSection {
 public:
  explicit MeterSection(OpCounters* target)
      : target_(target), start_(op_counters()) {}
  ~MeterSection() {
    if (target_) *target_ += op_counters() - start_;
  }
  MeterSection(const MeterSection&) = delete;
  MeterSection& operator=(const MeterSection&) = delete;

 private:
  OpCounters* target_;
  OpCounters start_;
};

}  // namespace rsms
