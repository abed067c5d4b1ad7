#include "dfg/fusion.hpp"

#include <cmath>

#include "dfg/error.hpp"

namespace dfg {

FusionNodes record_local_fusion(Tape& t, NodeId h_local, NodeId detail, const AttentionIds& ids) {
  const Matrix& h = t.value(h_local);
  if (t.value(detail).rows != h.rows || t.value(detail).cols != 1) {
    throw Error(ErrorCode::ShapeMismatch, "detail must be N x 1");
  }
  const NodeId biased = t.add(h_local, t.broadcast_col(detail, h.cols));
  const NodeId q = t.matmul(biased, ids.w_q);
  const NodeId k = t.matmul(biased, ids.w_k);
  const NodeId v = t.matmul(biased, ids.w_v);
  const NodeId scores = t.scale(t.matmul(q, t.transpose(k)), 1.0 / std::sqrt(double(h.cols)));
  const NodeId attn = t.softmax_rows(scores);
  return {t.matmul(attn, v), attn};
}

FusionNodes record_global_fusion(Tape& t, NodeId h_l, NodeId h_global, const AttentionIds& ids) {
  const Matrix& h = t.value(h_l);
  if (t.value(h_global).rows != h.rows) {
    throw Error(ErrorCode::ShapeMismatch, "global feature rows must match local rows");
  }
  const NodeId injected = t.matmul(h_global, ids.w_g);
  const NodeId q = t.add(t.matmul(h_l, ids.w_q), injected);
  const NodeId k = t.add(t.matmul(h_l, ids.w_k), injected);
  const NodeId v = t.matmul(h_l, ids.w_v);
  const NodeId scores = t.scale(t.matmul(q, t.transpose(k)), 1.0 / std::sqrt(double(h.cols)));
  const NodeId attn = t.softmax_rows(scores);
  return {t.matmul(attn, v), attn};
}

namespace {

AttentionIds bind_const(Tape& t, const AttentionParams& p, bool need_g) {
  AttentionIds ids;
  ids.w_q = t.constant(p.w_q);
  ids.w_k = t.constant(p.w_k);
  ids.w_v = t.constant(p.w_v);
  ids.w_g = need_g ? t.constant(p.w_g) : ids.w_v;
  return ids;
}

}  // namespace

Matrix local_fusion(const Matrix& h_local, const DetailField& detail,
                    const AttentionParams& params, Matrix* attn) {
  if (detail.size() != h_local.rows) {
    throw Error(ErrorCode::ShapeMismatch, "detail length must match feature rows");
  }
  Tape t;
  Matrix d(h_local.rows, 1);
  for (int i = 0; i < d.rows; ++i) d.at(i, 0) = detail.values[i];
  const FusionNodes nodes =
      record_local_fusion(t, t.constant(h_local), t.constant(d), bind_const(t, params, false));
  if (attn != nullptr) *attn = t.value(nodes.attn);
  return t.value(nodes.out);
}

Matrix global_fusion(const Matrix& h_l, const Matrix& h_global, const AttentionParams& params,
                     Matrix* attn) {
  Tape t;
  const FusionNodes nodes = record_global_fusion(t, t.constant(h_l), t.constant(h_global),
                                                 bind_const(t, params, true));
  if (attn != nullptr) *attn = t.value(nodes.attn);
  return t.value(nodes.out);
}

}  // namespace dfg
