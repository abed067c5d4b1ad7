#include "dfg/aggregate.hpp"

#include "dfg/error.hpp"

namespace dfg {

std::vector<int> source_nodes(const FlexGraph& g) {
  std::vector<int> src(g.targets.size());
  for (int j = 0; j < g.n_nodes; ++j) {
    for (int e = g.offsets[j]; e < g.offsets[j + 1]; ++e) src[e] = j;
  }
  return src;
}

NodeId record_mlp2(Tape& t, NodeId x, NodeId w1, NodeId b1, NodeId w2, NodeId b2) {
  const int rows = t.value(x).rows;
  NodeId h = t.add(t.matmul(x, w1), t.broadcast_row(b1, rows));
  h = t.relu(h);
  return t.add(t.matmul(h, w2), t.broadcast_row(b2, rows));
}

NodeId record_pos_encode(Tape& t, NodeId coords, const PosEncodingIds& enc) {
  const int rows = t.value(coords).rows;
  return t.add(t.matmul(coords, enc.weight), t.broadcast_row(enc.bias, rows));
}

NodeId record_edge_logits(Tape& t, const FlexGraph& g, NodeId feats, NodeId delta, NodeId coords,
                          const RelationMlpIds& beta, double gamma) {
  if (!t.value(feats).same_shape(t.value(delta))) {
    throw Error(ErrorCode::ShapeMismatch, "feats and delta must share N x C");
  }
  const std::vector<int> src = source_nodes(g);
  const std::vector<int>& tgt = g.targets;

  const NodeId enriched = t.add(feats, delta);
  const NodeId diff = t.sub(t.gather_rows(enriched, src), t.gather_rows(enriched, tgt));
  NodeId logits = record_mlp2(t, diff, beta.w1, beta.b1, beta.w2, beta.b2);

  // gamma * (|dx| + |dy| + |dz|) per edge, broadcast over channels.
  const NodeId coord_diff = t.sub(t.gather_rows(coords, src), t.gather_rows(coords, tgt));
  const NodeId l1 = t.scale(t.sum_cols(t.abs(coord_diff)), gamma);
  return t.add(logits, t.broadcast_col(l1, t.value(logits).cols));
}

NodeId record_masked_softmax(Tape& t, const FlexGraph& g, NodeId logits) {
  if (t.value(logits).rows != g.edge_count()) {
    throw Error(ErrorCode::ShapeMismatch, "logit rows must equal edge count");
  }
  return t.segment_softmax(logits, g.offsets);
}

NodeId record_aggregate(Tape& t, const FlexGraph& g, NodeId weights, NodeId h_prev,
                        NodeId delta) {
  if (!t.value(h_prev).same_shape(t.value(delta))) {
    throw Error(ErrorCode::ShapeMismatch, "h_prev and delta must share N x C");
  }
  const NodeId payload = t.gather_rows(t.add(h_prev, delta), g.targets);
  return t.scatter_add_rows(t.mul(weights, payload), source_nodes(g), g.n_nodes);
}

Matrix pos_encode(const PointCloud& cloud, const PosEncoding& enc) {
  Tape t;
  PosEncodingIds ids{t.constant(enc.weight), t.constant(enc.bias)};
  return t.value(record_pos_encode(t, t.constant(cloud.as_matrix()), ids));
}

EdgeLogits edge_logits(const FlexGraph& g, const Matrix& feats, const Matrix& delta,
                       const PointCloud& cloud, const RelationMlp& beta, double gamma,
                       double mask_constant) {
  (void)mask_constant;  // non-edges are never materialized here
  Tape t;
  RelationMlpIds ids{t.constant(beta.w1), t.constant(beta.b1), t.constant(beta.w2),
                     t.constant(beta.b2)};
  const NodeId out = record_edge_logits(t, g, t.constant(feats), t.constant(delta),
                                        t.constant(cloud.as_matrix()), ids, gamma);
  return EdgeLogits{t.value(out)};
}

Matrix masked_softmax(const FlexGraph& g, const EdgeLogits& logits) {
  Tape t;
  return t.value(record_masked_softmax(t, g, t.constant(logits.values)));
}

Matrix aggregate(const FlexGraph& g, const Matrix& weights, const Matrix& h_prev,
                 const Matrix& delta) {
  Tape t;
  return t.value(
      record_aggregate(t, g, t.constant(weights), t.constant(h_prev), t.constant(delta)));
}

}  // namespace dfg
