#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dfg/matrix.hpp"

namespace dfg {

using NodeId = int;

/// Record-and-replay reverse-mode differentiation over Matrix values.
///
/// Forward values are computed eagerly as ops are recorded; backward() walks
/// the record in reverse. The op set is exactly what the completion pipeline
/// needs; every op has a registered adjoint and backward() refuses anything
/// else, so an op can never be silently skipped.
///
/// Index-valued structure (gather/scatter maps, segment offsets) is fixed at
/// record time: it is data, not a differentiable input.
class Tape {
 public:
  /// A value with no gradient of its own (inputs, index-derived weights).
  NodeId constant(Matrix v);
  /// A named leaf whose gradient backward() reports.
  NodeId param(const std::string& name, Matrix v);

  // Elementwise, shapes must match.
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // Hadamard

  NodeId scale(NodeId a, double c);
  NodeId add_const(NodeId a, double c);

  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId a);

  NodeId relu(NodeId a);
  NodeId tanh(NodeId a);
  NodeId abs(NodeId a);
  NodeId sqrt(NodeId a);   // d/dx at 0 taken as 0
  NodeId recip(NodeId a);  // 1/x

  /// Softmax across each row (attention rows). Stabilized by row-max
  /// subtraction.
  NodeId softmax_rows(NodeId a);
  /// Softmax over row segments, per channel: rows [seg_offsets[s],
  /// seg_offsets[s+1]) form one group (per-node edge blocks). Empty segments
  /// are allowed.
  NodeId segment_softmax(NodeId a, std::vector<int> seg_offsets);

  NodeId sum_all(NodeId a);   // -> 1x1
  NodeId sum_cols(NodeId a);  // N x C -> N x 1

  /// Per-row minimum -> N x 1. Gradient routes to the first (lowest column)
  /// minimizer of each row.
  NodeId min_rows(NodeId a);
  /// Per-segment, per-channel maximum -> S x C. Gradient routes to the first
  /// maximizing row.
  NodeId segment_max(NodeId a, std::vector<int> seg_offsets);

  NodeId gather_rows(NodeId a, std::vector<int> idx);
  /// out[idx[r], :] += a[r, :] over rows of a; result has out_rows rows.
  NodeId scatter_add_rows(NodeId a, std::vector<int> idx, int out_rows);

  NodeId broadcast_col(NodeId a, int cols);  // N x 1 -> N x cols
  NodeId broadcast_row(NodeId a, int rows);  // 1 x C -> rows x C

  NodeId concat_rows(NodeId a, NodeId b);
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId reshape(NodeId a, int rows, int cols);

  const Matrix& value(NodeId id) const { return nodes_[id].value; }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  /// Reverse-mode gradients of a scalar (1x1) loss with respect to every
  /// named leaf. Leaves the loss does not reach get zero gradients and are
  /// listed by disconnected().
  std::map<std::string, Matrix> backward(NodeId loss);
  const std::vector<std::string>& disconnected() const { return disconnected_; }

  /// Running hash of every discrete branch the forward pass took: sign
  /// patterns at abs/relu/sqrt/recip inputs, argmin/argmax routing, and any
  /// selection folded in from outside (sampling indices, graph adjacency,
  /// rounded degrees) via note_structure(). Two forwards with equal hashes
  /// evaluated the same smooth piece of the function, so central differences
  /// between them estimate the derivative the backward pass computes.
  uint64_t structure_hash() const { return structure_hash_; }
  void note_structure(uint64_t h);
  void note_structure(const std::vector<int>& values);

 private:
  enum class Op {
    Constant, Param, Add, Sub, Mul, Scale, AddConst, MatMul, Transpose,
    Relu, Tanh, Abs, Sqrt, Recip, SoftmaxRows, SegmentSoftmax, SumAll,
    SumCols, MinRows, SegmentMax, GatherRows, ScatterAddRows, BroadcastCol,
    BroadcastRow, ConcatRows, ConcatCols, Reshape,
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    Matrix value;
    std::vector<int> idx;  // gather/scatter indices or segment offsets
    double c = 0.0;
    std::string name;  // Param only
  };

  NodeId push(Node n);
  const Matrix& val(NodeId id) const { return nodes_[id].value; }
  void fold_structure(unsigned char byte);

  std::vector<Node> nodes_;
  std::vector<std::string> disconnected_;
  uint64_t structure_hash_ = 1469598103934665603ull;  // FNV-1a offset basis
};

}  // namespace dfg
