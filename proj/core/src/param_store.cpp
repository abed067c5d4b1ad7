#include "dfg/param_store.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dfg/error.hpp"

namespace dfg {

void ParamStore::create(const std::string& name, Matrix value) {
  if (contains(name)) throw Error(ErrorCode::BadArgument, "duplicate parameter " + name);
  Entry e;
  e.m = Matrix(value.rows, value.cols);
  e.v = Matrix(value.rows, value.cols);
  e.value = std::move(value);
  items_.emplace(name, std::move(e));
}

void ParamStore::create_uniform(const std::string& name, int rows, int cols, int fan_in,
                                uint64_t seed) {
  Rng rng(Rng::derive(seed, name));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-bound, bound);
  create(name, std::move(m));
}

Matrix& ParamStore::value(const std::string& name) {
  auto it = items_.find(name);
  if (it == items_.end()) throw Error(ErrorCode::BadArgument, "unknown parameter " + name);
  return it->second.value;
}

const Matrix& ParamStore::value(const std::string& name) const {
  auto it = items_.find(name);
  if (it == items_.end()) throw Error(ErrorCode::BadArgument, "unknown parameter " + name);
  return it->second.value;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(items_.size());
  for (const auto& [name, entry] : items_) out.push_back(name);
  return out;
}

long ParamStore::step_count(const std::string& name) const {
  auto it = items_.find(name);
  if (it == items_.end()) throw Error(ErrorCode::BadArgument, "unknown parameter " + name);
  return it->second.step;
}

void ParamStore::adam_step(const std::map<std::string, Matrix>& grads, double lr, double beta1,
                           double beta2, double eps) {
  for (const auto& [name, grad] : grads) {
    auto it = items_.find(name);
    if (it == items_.end()) throw Error(ErrorCode::BadArgument, "gradient for unknown " + name);
    Entry& e = it->second;
    if (!e.value.same_shape(grad)) {
      throw Error(ErrorCode::ShapeMismatch, "gradient shape mismatch for " + name);
    }
    e.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(e.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(e.step));
    for (size_t i = 0; i < grad.data.size(); ++i) {
      const double gi = grad.data[i];
      e.m.data[i] = beta1 * e.m.data[i] + (1.0 - beta1) * gi;
      e.v.data[i] = beta2 * e.v.data[i] + (1.0 - beta2) * gi * gi;
      const double m_hat = e.m.data[i] / bc1;
      const double v_hat = e.v.data[i] / bc2;
      e.value.data[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

std::string ParamStore::to_json() const {
  nlohmann::json root;
  for (const auto& [name, entry] : items_) {
    nlohmann::json t;
    t["shape"] = {entry.value.rows, entry.value.cols};
    t["data"] = entry.value.data;
    root[name] = std::move(t);
  }
  return root.dump();
}

ParamStore ParamStore::from_json(const std::string& text) {
  nlohmann::json root = nlohmann::json::parse(text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    throw Error(ErrorCode::ConfigError, "checkpoint is not a JSON object");
  }
  ParamStore store;
  for (const auto& [name, t] : root.items()) {
    if (!t.contains("shape") || !t.contains("data")) {
      throw Error(ErrorCode::ConfigError, "checkpoint entry missing shape/data: " + name);
    }
    const auto shape = t["shape"].get<std::vector<int>>();
    if (shape.size() != 2) throw Error(ErrorCode::ConfigError, "checkpoint shape must be [r, c]");
    Matrix m(shape[0], shape[1]);
    const auto data = t["data"].get<std::vector<double>>();
    if (data.size() != m.data.size()) {
      throw Error(ErrorCode::ConfigError, "checkpoint data length mismatch for " + name);
    }
    m.data = data;
    store.create(name, std::move(m));
  }
  return store;
}

void ParamStore::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out << to_json() << "\n";
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

NodeId ParamBinder::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  const NodeId id = tape_->param(name, store_->value(name));
  bound_.emplace(name, id);
  return id;
}

}  // namespace dfg
