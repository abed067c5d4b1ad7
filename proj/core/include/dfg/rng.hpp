#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace dfg {

/// Deterministic random source. Built on std::mt19937_64, whose output
/// sequence is fixed by the standard, with hand-rolled double/int mappings
/// so streams are identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  int uniform_int(int n);

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  /// Derives a child seed from a label, so parameter tensors and workers can
  /// each get an independent stream in an order-independent way. FNV-1a.
  static uint64_t derive(uint64_t seed, const std::string& label);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace dfg
