#include "dfg/tape.hpp"

#include <algorithm>
#include <cmath>

#include "dfg/error.hpp"

namespace dfg {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": shape mismatch");
}

void check_segments(const std::vector<int>& off, int rows, const char* what) {
  if (off.empty() || off.front() != 0 || off.back() != rows ||
      !std::is_sorted(off.begin(), off.end())) {
    throw Error(ErrorCode::BadArgument, std::string(what) + ": malformed segment offsets");
  }
}

}  // namespace

void Tape::fold_structure(unsigned char byte) {
  structure_hash_ ^= byte;
  structure_hash_ *= 1099511628211ull;
}

void Tape::note_structure(uint64_t h) {
  for (int i = 0; i < 8; ++i) fold_structure(static_cast<unsigned char>(h >> (8 * i)));
}

void Tape::note_structure(const std::vector<int>& values) {
  uint64_t h = 1469598103934665603ull;
  for (int v : values) {
    for (int i = 0; i < 4; ++i) {
      h ^= static_cast<unsigned char>(static_cast<uint32_t>(v) >> (8 * i));
      h *= 1099511628211ull;
    }
  }
  note_structure(h);
}

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::constant(Matrix v) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(v);
  return push(std::move(n));
}

NodeId Tape::param(const std::string& name, Matrix v) {
  Node n;
  n.op = Op::Param;
  n.value = std::move(v);
  n.name = name;
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  require_same_shape(val(a), val(b), "add");
  Node n{Op::Add, a, b, val(a)};
  for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] += val(b).data[i];
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  require_same_shape(val(a), val(b), "sub");
  Node n{Op::Sub, a, b, val(a)};
  for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] -= val(b).data[i];
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  require_same_shape(val(a), val(b), "mul");
  Node n{Op::Mul, a, b, val(a)};
  for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] *= val(b).data[i];
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double c) {
  Node n{Op::Scale, a, -1, val(a)};
  n.c = c;
  for (double& v : n.value.data) v *= c;
  return push(std::move(n));
}

NodeId Tape::add_const(NodeId a, double c) {
  Node n{Op::AddConst, a, -1, val(a)};
  n.c = c;
  for (double& v : n.value.data) v += c;
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Matrix& A = val(a);
  const Matrix& B = val(b);
  if (A.cols != B.rows) throw Error(ErrorCode::ShapeMismatch, "matmul: inner dims differ");
  Node n{Op::MatMul, a, b, Matrix(A.rows, B.cols)};
  for (int i = 0; i < A.rows; ++i) {
    for (int k = 0; k < A.cols; ++k) {
      const double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) n.value.at(i, j) += aik * B.at(k, j);
    }
  }
  return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
  const Matrix& A = val(a);
  Node n{Op::Transpose, a, -1, Matrix(A.cols, A.rows)};
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) n.value.at(j, i) = A.at(i, j);
  return push(std::move(n));
}

NodeId Tape::relu(NodeId a) {
  Node n{Op::Relu, a, -1, val(a)};
  for (double& v : n.value.data) {
    fold_structure(v > 0.0 ? 1 : (v < 0.0 ? 2 : 0));
    if (v < 0.0) v = 0.0;
  }
  return push(std::move(n));
}

NodeId Tape::tanh(NodeId a) {
  Node n{Op::Tanh, a, -1, val(a)};
  for (double& v : n.value.data) v = std::tanh(v);
  return push(std::move(n));
}

NodeId Tape::abs(NodeId a) {
  Node n{Op::Abs, a, -1, val(a)};
  for (double& v : n.value.data) {
    fold_structure(v > 0.0 ? 1 : (v < 0.0 ? 2 : 0));
    v = std::fabs(v);
  }
  return push(std::move(n));
}

NodeId Tape::sqrt(NodeId a) {
  Node n{Op::Sqrt, a, -1, val(a)};
  for (double& v : n.value.data) {
    if (v < 0.0) throw Error(ErrorCode::BadArgument, "sqrt of negative value");
    fold_structure(v > 0.0 ? 1 : 0);
    v = std::sqrt(v);
  }
  return push(std::move(n));
}

NodeId Tape::recip(NodeId a) {
  Node n{Op::Recip, a, -1, val(a)};
  for (double& v : n.value.data) {
    fold_structure(v > 0.0 ? 1 : (v < 0.0 ? 2 : 0));
    v = 1.0 / v;
  }
  return push(std::move(n));
}

NodeId Tape::softmax_rows(NodeId a) {
  Node n{Op::SoftmaxRows, a, -1, val(a)};
  Matrix& m = n.value;
  for (int i = 0; i < m.rows; ++i) {
    double mx = -1e300;
    for (int j = 0; j < m.cols; ++j) mx = std::max(mx, m.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < m.cols; ++j) {
      m.at(i, j) = std::exp(m.at(i, j) - mx);
      sum += m.at(i, j);
    }
    for (int j = 0; j < m.cols; ++j) m.at(i, j) /= sum;
  }
  return push(std::move(n));
}

NodeId Tape::segment_softmax(NodeId a, std::vector<int> seg_offsets) {
  check_segments(seg_offsets, val(a).rows, "segment_softmax");
  Node n{Op::SegmentSoftmax, a, -1, val(a)};
  n.idx = std::move(seg_offsets);
  Matrix& m = n.value;
  for (size_t s = 0; s + 1 < n.idx.size(); ++s) {
    const int lo = n.idx[s], hi = n.idx[s + 1];
    if (lo == hi) continue;
    for (int c = 0; c < m.cols; ++c) {
      double mx = -1e300;
      for (int r = lo; r < hi; ++r) mx = std::max(mx, m.at(r, c));
      double sum = 0.0;
      for (int r = lo; r < hi; ++r) {
        m.at(r, c) = std::exp(m.at(r, c) - mx);
        sum += m.at(r, c);
      }
      for (int r = lo; r < hi; ++r) m.at(r, c) /= sum;
    }
  }
  return push(std::move(n));
}

NodeId Tape::sum_all(NodeId a) {
  Node n{Op::SumAll, a, -1, Matrix(1, 1)};
  double acc = 0.0;
  for (double v : val(a).data) acc += v;
  n.value.at(0, 0) = acc;
  return push(std::move(n));
}

NodeId Tape::sum_cols(NodeId a) {
  const Matrix& A = val(a);
  Node n{Op::SumCols, a, -1, Matrix(A.rows, 1)};
  for (int i = 0; i < A.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < A.cols; ++j) acc += A.at(i, j);
    n.value.at(i, 0) = acc;
  }
  return push(std::move(n));
}

NodeId Tape::min_rows(NodeId a) {
  const Matrix& A = val(a);
  if (A.cols < 1) throw Error(ErrorCode::BadArgument, "min_rows needs >= 1 column");
  Node n{Op::MinRows, a, -1, Matrix(A.rows, 1)};
  for (int i = 0; i < A.rows; ++i) {
    int arg = 0;
    for (int j = 1; j < A.cols; ++j) {
      if (A.at(i, j) < A.at(i, arg)) arg = j;
    }
    note_structure(static_cast<uint64_t>(arg));
    n.value.at(i, 0) = A.at(i, arg);
  }
  return push(std::move(n));
}

NodeId Tape::segment_max(NodeId a, std::vector<int> seg_offsets) {
  const Matrix& A = val(a);
  check_segments(seg_offsets, A.rows, "segment_max");
  const int s_count = static_cast<int>(seg_offsets.size()) - 1;
  Node n{Op::SegmentMax, a, -1, Matrix(s_count, A.cols)};
  n.idx = std::move(seg_offsets);
  for (int s = 0; s < s_count; ++s) {
    const int lo = n.idx[s], hi = n.idx[s + 1];
    if (lo == hi) throw Error(ErrorCode::BadArgument, "segment_max: empty segment");
    for (int c = 0; c < A.cols; ++c) {
      int arg = lo;
      for (int r = lo + 1; r < hi; ++r) {
        if (A.at(r, c) > A.at(arg, c)) arg = r;
      }
      note_structure(static_cast<uint64_t>(arg - lo));
      n.value.at(s, c) = A.at(arg, c);
    }
  }
  return push(std::move(n));
}

NodeId Tape::gather_rows(NodeId a, std::vector<int> idx) {
  const Matrix& A = val(a);
  Node n{Op::GatherRows, a, -1, Matrix(static_cast<int>(idx.size()), A.cols)};
  for (size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= A.rows) {
      throw Error(ErrorCode::BadArgument, "gather_rows index out of range");
    }
    for (int c = 0; c < A.cols; ++c) n.value.at(static_cast<int>(r), c) = A.at(idx[r], c);
  }
  n.idx = std::move(idx);
  return push(std::move(n));
}

NodeId Tape::scatter_add_rows(NodeId a, std::vector<int> idx, int out_rows) {
  const Matrix& A = val(a);
  if (static_cast<int>(idx.size()) != A.rows) {
    throw Error(ErrorCode::BadArgument, "scatter_add_rows needs one index per row");
  }
  Node n{Op::ScatterAddRows, a, -1, Matrix(out_rows, A.cols)};
  for (int r = 0; r < A.rows; ++r) {
    if (idx[r] < 0 || idx[r] >= out_rows) {
      throw Error(ErrorCode::BadArgument, "scatter_add_rows index out of range");
    }
    for (int c = 0; c < A.cols; ++c) n.value.at(idx[r], c) += A.at(r, c);
  }
  n.idx = std::move(idx);
  return push(std::move(n));
}

NodeId Tape::broadcast_col(NodeId a, int cols) {
  const Matrix& A = val(a);
  if (A.cols != 1) throw Error(ErrorCode::ShapeMismatch, "broadcast_col expects N x 1");
  Node n{Op::BroadcastCol, a, -1, Matrix(A.rows, cols)};
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < cols; ++j) n.value.at(i, j) = A.at(i, 0);
  return push(std::move(n));
}

NodeId Tape::broadcast_row(NodeId a, int rows) {
  const Matrix& A = val(a);
  if (A.rows != 1) throw Error(ErrorCode::ShapeMismatch, "broadcast_row expects 1 x C");
  Node n{Op::BroadcastRow, a, -1, Matrix(rows, A.cols)};
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < A.cols; ++j) n.value.at(i, j) = A.at(0, j);
  return push(std::move(n));
}

NodeId Tape::concat_rows(NodeId a, NodeId b) {
  const Matrix& A = val(a);
  const Matrix& B = val(b);
  if (A.cols != B.cols) throw Error(ErrorCode::ShapeMismatch, "concat_rows: column mismatch");
  Node n{Op::ConcatRows, a, b, Matrix(A.rows + B.rows, A.cols)};
  std::copy(A.data.begin(), A.data.end(), n.value.data.begin());
  std::copy(B.data.begin(), B.data.end(), n.value.data.begin() + A.data.size());
  return push(std::move(n));
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Matrix& A = val(a);
  const Matrix& B = val(b);
  if (A.rows != B.rows) throw Error(ErrorCode::ShapeMismatch, "concat_cols: row mismatch");
  Node n{Op::ConcatCols, a, b, Matrix(A.rows, A.cols + B.cols)};
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) n.value.at(i, j) = A.at(i, j);
    for (int j = 0; j < B.cols; ++j) n.value.at(i, A.cols + j) = B.at(i, j);
  }
  return push(std::move(n));
}

NodeId Tape::reshape(NodeId a, int rows, int cols) {
  const Matrix& A = val(a);
  if (static_cast<size_t>(rows) * cols != A.data.size()) {
    throw Error(ErrorCode::ShapeMismatch, "reshape: element count changes");
  }
  Node n{Op::Reshape, a, -1, A};
  n.value.rows = rows;
  n.value.cols = cols;
  return push(std::move(n));
}

std::map<std::string, Matrix> Tape::backward(NodeId loss) {
  if (loss < 0 || loss >= node_count()) throw Error(ErrorCode::BadArgument, "unknown loss node");
  const Matrix& lv = val(loss);
  if (lv.rows != 1 || lv.cols != 1) {
    throw Error(ErrorCode::NotScalarLoss, "backward requires a 1x1 loss node");
  }

  std::vector<Matrix> grad(nodes_.size());
  auto g = [&](NodeId id) -> Matrix& {
    if (grad[id].data.empty()) grad[id] = Matrix(nodes_[id].value.rows, nodes_[id].value.cols);
    return grad[id];
  };
  g(loss).at(0, 0) = 1.0;

  for (NodeId id = loss; id >= 0; --id) {
    if (grad[id].data.empty()) continue;  // not reached by the loss
    const Node& n = nodes_[id];
    const Matrix& gy = grad[id];
    switch (n.op) {
      case Op::Constant:
      case Op::Param:
        break;
      case Op::Add: {
        Matrix& ga = g(n.a);
        Matrix& gb = g(n.b);
        for (size_t i = 0; i < gy.data.size(); ++i) {
          ga.data[i] += gy.data[i];
          gb.data[i] += gy.data[i];
        }
        break;
      }
      case Op::Sub: {
        Matrix& ga = g(n.a);
        Matrix& gb = g(n.b);
        for (size_t i = 0; i < gy.data.size(); ++i) {
          ga.data[i] += gy.data[i];
          gb.data[i] -= gy.data[i];
        }
        break;
      }
      case Op::Mul: {
        Matrix& ga = g(n.a);
        Matrix& gb = g(n.b);
        const Matrix& A = val(n.a);
        const Matrix& B = val(n.b);
        for (size_t i = 0; i < gy.data.size(); ++i) {
          ga.data[i] += gy.data[i] * B.data[i];
          gb.data[i] += gy.data[i] * A.data[i];
        }
        break;
      }
      case Op::Scale: {
        Matrix& ga = g(n.a);
        for (size_t i = 0; i < gy.data.size(); ++i) ga.data[i] += n.c * gy.data[i];
        break;
      }
      case Op::AddConst: {
        Matrix& ga = g(n.a);
        for (size_t i = 0; i < gy.data.size(); ++i) ga.data[i] += gy.data[i];
        break;
      }
      case Op::MatMul: {
        const Matrix& A = val(n.a);
        const Matrix& B = val(n.b);
        Matrix& ga = g(n.a);  // gy * B^T
        Matrix& gb = g(n.b);  // A^T * gy
        for (int i = 0; i < A.rows; ++i) {
          for (int j = 0; j < B.cols; ++j) {
            const double gij = gy.at(i, j);
            if (gij == 0.0) continue;
            for (int k = 0; k < A.cols; ++k) {
              ga.at(i, k) += gij * B.at(k, j);
              gb.at(k, j) += gij * A.at(i, k);
            }
          }
        }
        break;
      }
      case Op::Transpose: {
        Matrix& ga = g(n.a);
        for (int i = 0; i < gy.rows; ++i)
          for (int j = 0; j < gy.cols; ++j) ga.at(j, i) += gy.at(i, j);
        break;
      }
      case Op::Relu: {
        Matrix& ga = g(n.a);
        const Matrix& A = val(n.a);
        for (size_t i = 0; i < gy.data.size(); ++i) {
          if (A.data[i] > 0.0) ga.data[i] += gy.data[i];
        }
        break;
      }
      case Op::Tanh: {
        Matrix& ga = g(n.a);
        for (size_t i = 0; i < gy.data.size(); ++i) {
          const double y = n.value.data[i];
          ga.data[i] += gy.data[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::Abs: {
        Matrix& ga = g(n.a);
        const Matrix& A = val(n.a);
        for (size_t i = 0; i < gy.data.size(); ++i) {
          if (A.data[i] > 0.0) ga.data[i] += gy.data[i];
          else if (A.data[i] < 0.0) ga.data[i] -= gy.data[i];
          // subgradient 0 at exactly 0
        }
        break;
      }
      case Op::Sqrt: {
        Matrix& ga = g(n.a);
        for (size_t i = 0; i < gy.data.size(); ++i) {
          const double y = n.value.data[i];
          if (y > 0.0) ga.data[i] += gy.data[i] * 0.5 / y;
          // derivative taken as 0 at x == 0
        }
        break;
      }
      case Op::Recip: {
        Matrix& ga = g(n.a);
        for (size_t i = 0; i < gy.data.size(); ++i) {
          const double y = n.value.data[i];
          ga.data[i] -= gy.data[i] * y * y;
        }
        break;
      }
      case Op::SoftmaxRows: {
        Matrix& ga = g(n.a);
        for (int i = 0; i < gy.rows; ++i) {
          double dot = 0.0;
          for (int j = 0; j < gy.cols; ++j) dot += gy.at(i, j) * n.value.at(i, j);
          for (int j = 0; j < gy.cols; ++j) {
            ga.at(i, j) += n.value.at(i, j) * (gy.at(i, j) - dot);
          }
        }
        break;
      }
      case Op::SegmentSoftmax: {
        Matrix& ga = g(n.a);
        for (size_t s = 0; s + 1 < n.idx.size(); ++s) {
          const int lo = n.idx[s], hi = n.idx[s + 1];
          for (int c = 0; c < gy.cols; ++c) {
            double dot = 0.0;
            for (int r = lo; r < hi; ++r) dot += gy.at(r, c) * n.value.at(r, c);
            for (int r = lo; r < hi; ++r) {
              ga.at(r, c) += n.value.at(r, c) * (gy.at(r, c) - dot);
            }
          }
        }
        break;
      }
      case Op::SumAll: {
        Matrix& ga = g(n.a);
        const double gv = gy.at(0, 0);
        for (double& v : ga.data) v += gv;
        break;
      }
      case Op::SumCols: {
        Matrix& ga = g(n.a);
        for (int i = 0; i < ga.rows; ++i) {
          const double gv = gy.at(i, 0);
          for (int j = 0; j < ga.cols; ++j) ga.at(i, j) += gv;
        }
        break;
      }
      case Op::MinRows: {
        Matrix& ga = g(n.a);
        const Matrix& A = val(n.a);
        for (int i = 0; i < A.rows; ++i) {
          int arg = 0;
          for (int j = 1; j < A.cols; ++j) {
            if (A.at(i, j) < A.at(i, arg)) arg = j;  // first minimizer wins
          }
          ga.at(i, arg) += gy.at(i, 0);
        }
        break;
      }
      case Op::SegmentMax: {
        Matrix& ga = g(n.a);
        const Matrix& A = val(n.a);
        for (size_t s = 0; s + 1 < n.idx.size(); ++s) {
          const int lo = n.idx[s], hi = n.idx[s + 1];
          for (int c = 0; c < A.cols; ++c) {
            int arg = lo;
            for (int r = lo + 1; r < hi; ++r) {
              if (A.at(r, c) > A.at(arg, c)) arg = r;
            }
            ga.at(arg, c) += gy.at(static_cast<int>(s), c);
          }
        }
        break;
      }
      case Op::GatherRows: {
        Matrix& ga = g(n.a);
        for (size_t r = 0; r < n.idx.size(); ++r) {
          for (int c = 0; c < gy.cols; ++c) {
            ga.at(n.idx[r], c) += gy.at(static_cast<int>(r), c);
          }
        }
        break;
      }
      case Op::ScatterAddRows: {
        Matrix& ga = g(n.a);
        for (int r = 0; r < ga.rows; ++r) {
          for (int c = 0; c < gy.cols; ++c) ga.at(r, c) += gy.at(n.idx[r], c);
        }
        break;
      }
      case Op::BroadcastCol: {
        Matrix& ga = g(n.a);
        for (int i = 0; i < gy.rows; ++i) {
          double acc = 0.0;
          for (int j = 0; j < gy.cols; ++j) acc += gy.at(i, j);
          ga.at(i, 0) += acc;
        }
        break;
      }
      case Op::BroadcastRow: {
        Matrix& ga = g(n.a);
        for (int j = 0; j < gy.cols; ++j) {
          double acc = 0.0;
          for (int i = 0; i < gy.rows; ++i) acc += gy.at(i, j);
          ga.at(0, j) += acc;
        }
        break;
      }
      case Op::ConcatRows: {
        Matrix& ga = g(n.a);
        Matrix& gb = g(n.b);
        for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += gy.data[i];
        for (size_t i = 0; i < gb.data.size(); ++i) gb.data[i] += gy.data[ga.data.size() + i];
        break;
      }
      case Op::ConcatCols: {
        Matrix& ga = g(n.a);
        Matrix& gb = g(n.b);
        for (int i = 0; i < ga.rows; ++i) {
          for (int j = 0; j < ga.cols; ++j) ga.at(i, j) += gy.at(i, j);
          for (int j = 0; j < gb.cols; ++j) gb.at(i, j) += gy.at(i, ga.cols + j);
        }
        break;
      }
      case Op::Reshape: {
        Matrix& ga = g(n.a);
        for (size_t i = 0; i < gy.data.size(); ++i) ga.data[i] += gy.data[i];
        break;
      }
      default:
        throw Error(ErrorCode::BadArgument, "op without registered adjoint");
    }
  }

  std::map<std::string, Matrix> out;
  disconnected_.clear();
  for (NodeId id = 0; id < node_count(); ++id) {
    const Node& n = nodes_[id];
    if (n.op != Op::Param) continue;
    if (grad[id].data.empty()) {
      out[n.name] = Matrix(n.value.rows, n.value.cols);
      disconnected_.push_back(n.name);
    } else {
      out[n.name] = std::move(grad[id]);
    }
  }
  return out;
}

}  // namespace dfg
