#pragma once

#include "dfg/detail_metric.hpp"
#include "dfg/matrix.hpp"
#include "dfg/tape.hpp"

namespace dfg {

/// Projection matrices for one attention block. w_g transforms the injected
/// global feature and is only read by the global block.
struct AttentionParams {
  Matrix w_q;  // C x C
  Matrix w_k;  // C x C
  Matrix w_v;  // C x C
  Matrix w_g;  // C x C
};

/// Detail-biased self-attention over local-graph features: every channel of
/// row j is shifted by the scalar detail value D_j before the Q/K/V
/// projections; scores use softmax(Q K^T / sqrt(C)).
/// `attn`, when given, receives the N x N post-softmax attention rows.
Matrix local_fusion(const Matrix& h_local, const DetailField& detail,
                    const AttentionParams& params, Matrix* attn = nullptr);

/// Second block: self-attention over the local-fusion output where the
/// transformed global aggregate (h_global * w_g) is added to both query and
/// key streams before scoring.
Matrix global_fusion(const Matrix& h_l, const Matrix& h_global, const AttentionParams& params,
                     Matrix* attn = nullptr);

struct AttentionIds {
  NodeId w_q;
  NodeId w_k;
  NodeId w_v;
  NodeId w_g;
};

struct FusionNodes {
  NodeId out;
  NodeId attn;
};

FusionNodes record_local_fusion(Tape& t, NodeId h_local, NodeId detail, const AttentionIds& ids);
FusionNodes record_global_fusion(Tape& t, NodeId h_l, NodeId h_global, const AttentionIds& ids);

}  // namespace dfg
