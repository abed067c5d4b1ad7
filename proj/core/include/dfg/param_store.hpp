#pragma once

#include <map>
#include <string>
#include <vector>

#include "dfg/matrix.hpp"
#include "dfg/rng.hpp"
#include "dfg/tape.hpp"

namespace dfg {

/// Named learnable tensors plus per-tensor Adam state (first/second moments
/// and step count). Iteration order is the sorted name order, so updates and
/// serialization are deterministic.
class ParamStore {
 public:
  void create(const std::string& name, Matrix value);
  /// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init from a seed derived off
  /// the tensor name, so creation order does not matter.
  void create_uniform(const std::string& name, int rows, int cols, int fan_in, uint64_t seed);

  bool contains(const std::string& name) const { return items_.count(name) != 0; }
  Matrix& value(const std::string& name);
  const Matrix& value(const std::string& name) const;
  std::vector<std::string> names() const;
  size_t size() const { return items_.size(); }
  long step_count(const std::string& name) const;

  /// One Adam update with bias correction. Every named gradient must match
  /// its parameter's shape; parameters without a gradient entry are left
  /// untouched.
  void adam_step(const std::map<std::string, Matrix>& grads, double lr, double beta1 = 0.9,
                 double beta2 = 0.99, double eps = 1e-8);

  /// Checkpoint: JSON object mapping name -> {"shape": [r, c], "data":
  /// [row-major doubles]}. Values use shortest round-trip decimals, so a
  /// save/load cycle is bit exact. Optimizer state is not serialized.
  std::string to_json() const;
  static ParamStore from_json(const std::string& text);
  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  struct Entry {
    Matrix value;
    Matrix m;
    Matrix v;
    long step = 0;
  };
  std::map<std::string, Entry> items_;
};

/// Binds store tensors to tape leaves, creating each leaf once per tape.
class ParamBinder {
 public:
  ParamBinder(Tape& tape, const ParamStore& store) : tape_(&tape), store_(&store) {}

  NodeId operator()(const std::string& name);
  const ParamStore& store() const { return *store_; }

 private:
  Tape* tape_;
  const ParamStore* store_;
  std::map<std::string, NodeId> bound_;
};

}  // namespace dfg
