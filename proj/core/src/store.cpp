#include "qgd/store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "json.hpp"

namespace qgd {

namespace {

constexpr int kStoreFormatVersion = 1;

using json = nlohmann::json;

json node_list(const std::unordered_map<std::size_t, double>& nodes) {
  std::vector<std::pair<std::size_t, double>> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  json out = json::array();
  for (const auto& [k, v] : sorted) out.push_back({k, v});
  return out;
}

json sign_list(const std::unordered_map<std::size_t, bool>& signs) {
  std::vector<std::size_t> keys;
  for (const auto& [k, neg] : signs) {
    if (neg) keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

json store_json(const MatrixStore& s) {
  json trees = json::array();
  for (std::size_t i = 0; i < s.rows(); ++i) {
    trees.push_back({{"nodes", node_list(s.tree(i).nodes())}, {"negative_leaves", sign_list(s.tree(i).signs())}});
  }
  return {{"rows", s.rows()}, {"cols", s.cols()}, {"M", s.max_norm_sq()}, {"trees", trees}};
}

}  // namespace

SampleTree::SampleTree(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidArgument("sample tree needs at least one column");
  leaves_ = std::bit_ceil(n);
  depth_ = std::countr_zero(leaves_);
}

std::size_t SampleTree::set(std::size_t j, double value) {
  if (j >= n_) throw InvalidArgument("column index out of range");
  if (!std::isfinite(value)) throw InvalidArgument("entry value must be finite");
  std::size_t k = leaves_ + j;
  const double sq = value * value;
  if (sq == 0.0) {
    nodes_.erase(k);
  } else {
    nodes_[k] = sq;
  }
  if (value < 0.0) {
    signs_[k] = true;
  } else {
    signs_.erase(k);
  }
  std::size_t touched = 1;
  // Recompute each ancestor from its children rather than by adding a delta,
  // so the stored sums stay exactly consistent.
  while (k > 1) {
    k >>= 1;
    const double s = node(2 * k) + node(2 * k + 1);
    if (s == 0.0) {
      nodes_.erase(k);
    } else {
      nodes_[k] = s;
    }
    ++touched;
  }
  return touched;
}

double SampleTree::node(std::size_t index) const {
  const auto it = nodes_.find(index);
  return it == nodes_.end() ? 0.0 : it->second;
}

bool SampleTree::negative(std::size_t j) const {
  const auto it = signs_.find(leaves_ + j);
  return it != signs_.end() && it->second;
}

double SampleTree::value(std::size_t j) const {
  if (j >= n_) throw InvalidArgument("column index out of range");
  const double mag = std::sqrt(node(leaves_ + j));
  return negative(j) ? -mag : mag;
}

double SampleTree::max_inconsistency() const {
  double worst = 0.0;
  for (const auto& [k, v] : nodes_) {
    if (k >= leaves_) continue;
    worst = std::max(worst, std::abs(v - (node(2 * k) + node(2 * k + 1))));
  }
  return worst;
}

void SampleTree::descend(double scale, std::span<double> out) const {
  if (out.size() < n_) throw InvalidArgument("descend: output too short");
  if (root() == 0.0) return;
  descend_from(1, scale, out);
}

void SampleTree::descend_from(std::size_t index, double amplitude, std::span<double> out) const {
  if (index >= leaves_) {
    const std::size_t j = index - leaves_;
    out[j] = negative(j) ? -amplitude : amplitude;
    return;
  }
  const double parent = node(index);
  for (std::size_t child : {2 * index, 2 * index + 1}) {
    const double c = node(child);
    if (c == 0.0) continue;
    descend_from(child, amplitude * std::sqrt(c / parent), out);
  }
}

SampleTree SampleTree::restore(std::size_t n, std::unordered_map<std::size_t, double> nodes,
                               std::unordered_map<std::size_t, bool> signs) {
  SampleTree t(n);
  for (const auto& [k, v] : nodes) {
    if (k == 0 || k >= 2 * t.leaves_ || !(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("store: malformed tree node");
    }
  }
  for (const auto& [k, neg] : signs) {
    if (k < t.leaves_ || k >= t.leaves_ + n) throw InvalidArgument("store: sign recorded on a non-leaf");
  }
  t.nodes_ = std::move(nodes);
  t.signs_ = std::move(signs);
  return t;
}

MatrixStore::MatrixStore(std::size_t m, std::size_t n) : n_(n) {
  if (m == 0 || n == 0) throw InvalidArgument("store dimensions must be positive");
  trees_.assign(m, SampleTree(n));
}

MatrixStore MatrixStore::from_stream(std::span<const CoordEntry> entries, std::size_t m, std::size_t n) {
  MatrixStore s(m, n);
  for (const auto& e : entries) s.insert(e);
  return s;
}

MatrixStore MatrixStore::from_matrix(const Matrix& a) {
  MatrixStore s(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) s.insert({static_cast<std::size_t>(i) + 1, static_cast<std::size_t>(j) + 1, a(i, j)});
    }
  }
  return s;
}

std::size_t MatrixStore::insert(const CoordEntry& e) {
  if (e.i < 1 || e.i > trees_.size() || e.j < 1 || e.j > n_) {
    throw InvalidArgument("entry (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ") outside a " +
                          std::to_string(trees_.size()) + " x " + std::to_string(n_) + " store");
  }
  SampleTree& t = trees_[e.i - 1];
  std::size_t touched = t.set(e.j - 1, e.value);
  if (t.root() > m_cell_) {
    m_cell_ = t.root();
    ++touched;
  }
  ++inserts_;
  total_touches_ += touched;
  max_touches_ = std::max(max_touches_, touched);
  return touched;
}

std::size_t MatrixStore::touch_limit() const {
  return static_cast<std::size_t>(std::countr_zero(std::bit_ceil(n_))) + 2;
}

Vector MatrixStore::prepare_row_state(std::size_t i) const {
  if (i >= trees_.size()) throw InvalidArgument("row index out of range");
  if (!(m_cell_ > 0.0)) throw InvalidArgument("prepare_row_state: store is empty (M = 0)");
  const SampleTree& t = trees_[i];
  Vector out = Vector::Zero(n_ + 1);
  const double norm_sq = t.root();
  // Tag rotation: amplitude ||a_i|| / sqrt(M) goes to the row, the rest to
  // the extra label n.
  t.descend(std::sqrt(norm_sq / m_cell_), std::span<double>(out.data(), n_));
  out(n_) = std::sqrt(std::max(0.0, (m_cell_ - norm_sq) / m_cell_));
  return out;
}

Matrix MatrixStore::to_dense() const {
  Matrix a = Matrix::Zero(trees_.size(), n_);
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    for (const auto& [k, v] : trees_[i].nodes()) {
      if (k >= trees_[i].leaves()) a(i, k - trees_[i].leaves()) = trees_[i].value(k - trees_[i].leaves());
    }
  }
  return a;
}

std::string MatrixStore::to_json() const {
  json doc = store_json(*this);
  doc["format"] = "qgd-store";
  doc["version"] = kStoreFormatVersion;
  return doc.dump();
}

MatrixStore MatrixStore::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("store: invalid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "qgd-store") throw InvalidArgument("store: unexpected format tag");
    if (doc.at("version").get<int>() != kStoreFormatVersion) throw InvalidArgument("store: unsupported version");
    MatrixStore s(doc.at("rows").get<std::size_t>(), doc.at("cols").get<std::size_t>());
    const auto& trees = doc.at("trees");
    if (trees.size() != s.rows()) throw InvalidArgument("store: tree count does not match rows");
    for (std::size_t i = 0; i < s.rows(); ++i) {
      std::unordered_map<std::size_t, double> nodes;
      for (const auto& pair : trees[i].at("nodes")) nodes[pair.at(0).get<std::size_t>()] = pair.at(1).get<double>();
      std::unordered_map<std::size_t, bool> signs;
      for (const auto& k : trees[i].at("negative_leaves")) signs[k.get<std::size_t>()] = true;
      s.trees_[i] = SampleTree::restore(s.n_, std::move(nodes), std::move(signs));
    }
    s.m_cell_ = doc.at("M").get<double>();
    for (const auto& t : s.trees_) {
      if (t.root() > s.m_cell_) throw InvalidArgument("store: M is below a row norm");
    }
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("store: missing or mistyped field: ") + e.what());
  }
}

WeightedStore::WeightedStore(std::size_t m, std::size_t n) : store_(m, n), weights_(m, 1.0) {}

void WeightedStore::refresh(std::size_t i) {
  m_w_ = std::max(m_w_, weights_[i] * store_.row_norm_sq(i));
}

std::size_t WeightedStore::insert(const CoordEntry& e) {
  const std::size_t touched = store_.insert(e);
  refresh(e.i - 1);
  return touched;
}

void WeightedStore::set_weight(std::size_t i, double w) {
  if (i >= weights_.size()) throw InvalidArgument("weight index out of range");
  if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be positive and finite");
  weights_[i] = w;
  refresh(i);
}

Vector WeightedStore::prepare_weighted_row_state(std::size_t i) const {
  if (i >= rows()) throw InvalidArgument("row index out of range");
  if (!(m_w_ > 0.0)) throw InvalidArgument("prepare_weighted_row_state: store is empty (M_w = 0)");
  const std::size_t n = cols();
  const double weighted = weights_[i] * store_.row_norm_sq(i);
  Vector out = Vector::Zero(n + 1);
  store_.tree(i).descend(std::sqrt(weighted / m_w_), std::span<double>(out.data(), n));
  out(n) = std::sqrt(std::max(0.0, (m_w_ - weighted) / m_w_));
  return out;
}

Matrix WeightedStore::to_dense() const {
  Matrix b = store_.to_dense();
  for (std::size_t i = 0; i < rows(); ++i) b.row(i) *= std::sqrt(weights_[i]);
  return b;
}

std::string WeightedStore::to_json() const {
  json doc = store_json(store_);
  doc["format"] = "qgd-weighted-store";
  doc["version"] = kStoreFormatVersion;
  doc["weights"] = weights_;
  doc["M_w"] = m_w_;
  return doc.dump();
}

WeightedStore WeightedStore::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("store: invalid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "qgd-weighted-store") throw InvalidArgument("store: unexpected format tag");
    json inner = doc;
    inner["format"] = "qgd-store";
    WeightedStore w;
    w.store_ = MatrixStore::from_json(inner.dump());
    w.weights_ = doc.at("weights").get<std::vector<double>>();
    if (w.weights_.size() != w.store_.rows()) throw InvalidArgument("store: weight count does not match rows");
    for (double x : w.weights_) {
      if (!(x > 0.0)) throw InvalidArgument("store: weights must be positive");
    }
    w.m_w_ = doc.at("M_w").get<double>();
    return w;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("store: missing or mistyped field: ") + e.what());
  }
}

StorePair StorePair::from_stream(std::span<const CoordEntry> entries, std::size_t m, std::size_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("factorization exponent p must lie in [0, 1]");
  StorePair s{MatrixStore(m, n), MatrixStore(n, m), p};
  for (const auto& e : entries) {
    const double mag = std::abs(e.value);
    const double row_v = mag == 0.0 ? 0.0 : (e.value < 0.0 ? -1.0 : 1.0) * std::pow(mag, p);
    const double col_v = mag == 0.0 ? 0.0 : std::pow(mag, 1.0 - p);
    s.rows.insert({e.i, e.j, row_v});
    s.cols.insert({e.j, e.i, col_v});
  }
  return s;
}

StorePair StorePair::from_matrix(const Matrix& a, double p) {
  std::vector<CoordEntry> entries;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) entries.push_back({static_cast<std::size_t>(i) + 1, static_cast<std::size_t>(j) + 1, a(i, j)});
    }
  }
  return from_stream(entries, a.rows(), a.cols(), p);
}

double StorePair::mu() const { return std::sqrt(rows.max_norm_sq() * cols.max_norm_sq()); }

}  // namespace qgd
