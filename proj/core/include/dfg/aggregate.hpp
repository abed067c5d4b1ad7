#pragma once

#include "dfg/flex_graph.hpp"
#include "dfg/matrix.hpp"
#include "dfg/point_cloud.hpp"
#include "dfg/tape.hpp"

namespace dfg {

/// Learnable affine map from coordinates to a C-channel positional code:
/// delta_j = p_j * weight + bias.
struct PosEncoding {
  Matrix weight;  // 3 x C
  Matrix bias;    // 1 x C
};

/// Two affine layers C -> C with a rectifier between; the relation map
/// applied to positional-encoded feature differences.
struct RelationMlp {
  Matrix w1;  // C x C
  Matrix b1;  // 1 x C
  Matrix w2;  // C x C
  Matrix b2;  // 1 x C
};

/// Per-edge C-vector logits, row e aligned with FlexGraph.targets[e].
struct EdgeLogits {
  Matrix values;  // E x C
};

Matrix pos_encode(const PointCloud& cloud, const PosEncoding& enc);

/// For edge (j -> k): beta((f_j + delta_j) - (f_k + delta_k)) plus the
/// scaled L1 distance between the two points, broadcast across channels.
///
/// `mask_constant` is the logit assigned to non-edges in an equivalent
/// dense formulation. The edge list never materializes non-edges, so the
/// constant does not enter this computation; it is part of the contract so
/// dense reference implementations agree on the convention.
EdgeLogits edge_logits(const FlexGraph& g, const Matrix& feats, const Matrix& delta,
                       const PointCloud& cloud, const RelationMlp& beta, double gamma,
                       double mask_constant = -1e9);

/// Per-(node, channel) softmax over each node's out-edges. Nodes with
/// degree 0 contribute no weight rows.
Matrix masked_softmax(const FlexGraph& g, const EdgeLogits& logits);

/// h_j = sum over k in N(j) of a_(j,k) (Hadamard) (h_prev_k + delta_k).
/// Degree-0 nodes produce zero rows.
Matrix aggregate(const FlexGraph& g, const Matrix& weights, const Matrix& h_prev,
                 const Matrix& delta);

// Tape-recorded forms. The plain functions above are thin wrappers that run
// these on a scratch tape, so there is a single implementation of the math.

struct PosEncodingIds {
  NodeId weight;
  NodeId bias;
};

struct RelationMlpIds {
  NodeId w1;
  NodeId b1;
  NodeId w2;
  NodeId b2;
};

/// relu(x w1 + b1) w2 + b2 with row-broadcast biases.
NodeId record_mlp2(Tape& t, NodeId x, NodeId w1, NodeId b1, NodeId w2, NodeId b2);

NodeId record_pos_encode(Tape& t, NodeId coords, const PosEncodingIds& enc);
NodeId record_edge_logits(Tape& t, const FlexGraph& g, NodeId feats, NodeId delta, NodeId coords,
                          const RelationMlpIds& beta, double gamma);
NodeId record_masked_softmax(Tape& t, const FlexGraph& g, NodeId logits);
NodeId record_aggregate(Tape& t, const FlexGraph& g, NodeId weights, NodeId h_prev, NodeId delta);

/// Edge source nodes in target-list order: source_nodes(g)[e] = j for every
/// edge e in [offsets[j], offsets[j+1]).
std::vector<int> source_nodes(const FlexGraph& g);

}  // namespace dfg
