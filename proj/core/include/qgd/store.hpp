#pragma once

// Streamed storage for state preparation. Each row owns a binary tree over
// its column indices: leaf j holds (a_ij^2, sign a_ij), internal nodes hold
// subtree sums, and the root holds ||a_i||^2. A single cell M tracks the
// running maximum of the row norms.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qgd/types.hpp"

namespace qgd {

/// One streamed matrix entry. Indices are 1-based, as in the file format.
struct CoordEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double value = 0.0;
};

class SampleTree {
 public:
  SampleTree() = default;
  explicit SampleTree(std::size_t n);

  std::size_t width() const { return n_; }
  /// Number of leaves after padding to a power of two.
  std::size_t leaves() const { return leaves_; }
  /// ceil(log2(n)); a root-to-leaf path has depth() + 1 nodes.
  int depth() const { return depth_; }

  /// Writes leaf j (0-based) and recomputes the path to the root. Returns the
  /// number of nodes written.
  std::size_t set(std::size_t j, double value);

  /// Heap-indexed node value (root = 1, children of k are 2k and 2k+1).
  /// Absent nodes read as zero.
  double node(std::size_t index) const;
  double root() const { return node(1); }
  /// Signed entry recovered from the leaf: sign * sqrt(leaf).
  double value(std::size_t j) const;
  bool negative(std::size_t j) const;

  /// Largest |node - (left + right)| over stored internal nodes.
  double max_inconsistency() const;

  /// Conditional-rotation descent from the root. Writes scale * a_ij / ||a_i||
  /// into out[j] for every stored leaf.
  void descend(double scale, std::span<double> out) const;

  const std::unordered_map<std::size_t, double>& nodes() const { return nodes_; }
  const std::unordered_map<std::size_t, bool>& signs() const { return signs_; }

  /// Rebuilds a tree from serialized node and sign maps.
  static SampleTree restore(std::size_t n, std::unordered_map<std::size_t, double> nodes,
                            std::unordered_map<std::size_t, bool> signs);

 private:
  void descend_from(std::size_t index, double amplitude, std::span<double> out) const;

  std::size_t n_ = 0;
  std::size_t leaves_ = 1;
  int depth_ = 0;
  std::unordered_map<std::size_t, double> nodes_;
  std::unordered_map<std::size_t, bool> signs_;  // only negative leaves are recorded
};

class MatrixStore {
 public:
  MatrixStore() = default;
  MatrixStore(std::size_t m, std::size_t n);

  /// Equivalent to inserting every entry in order.
  static MatrixStore from_stream(std::span<const CoordEntry> entries, std::size_t m, std::size_t n);
  /// Inserts the nonzero entries of a dense matrix in row-major order.
  static MatrixStore from_matrix(const Matrix& a);

  /// Returns the number of nodes written, including the M cell when it moves.
  std::size_t insert(const CoordEntry& e);

  std::size_t rows() const { return trees_.size(); }
  std::size_t cols() const { return n_; }
  /// Running maximum of ||a_i||^2. Never decreases.
  double max_norm_sq() const { return m_cell_; }
  double row_norm_sq(std::size_t i) const { return trees_.at(i).root(); }
  double value(std::size_t i, std::size_t j) const { return trees_.at(i).value(j); }
  const SampleTree& tree(std::size_t i) const { return trees_.at(i); }

  /// Amplitudes (a_i1, ..., a_in, sqrt(M - ||a_i||^2)) / sqrt(M) for the
  /// 0-based row i.
  Vector prepare_row_state(std::size_t i) const;

  Matrix to_dense() const;

  std::size_t inserts() const { return inserts_; }
  std::size_t total_touches() const { return total_touches_; }
  std::size_t max_touches() const { return max_touches_; }
  /// ceil(log2 n) + 2: path nodes plus the M cell.
  std::size_t touch_limit() const;

  std::string to_json() const;
  static MatrixStore from_json(const std::string& text);

 private:
  std::size_t n_ = 0;
  std::vector<SampleTree> trees_;
  double m_cell_ = 0.0;
  std::size_t inserts_ = 0;
  std::size_t total_touches_ = 0;
  std::size_t max_touches_ = 0;
};

/// Store for weighted rows sqrt(w_i) x_i. The tree holds x; the weights sit in
/// their own array and M_w = max_i w_i ||x_i||^2 is kept alongside.
class WeightedStore {
 public:
  WeightedStore() = default;
  /// All weights start at 1.
  WeightedStore(std::size_t m, std::size_t n);

  std::size_t insert(const CoordEntry& e);
  /// Sets w_i (0-based row) and updates M_w. Weights must be positive.
  void set_weight(std::size_t i, double w);

  std::size_t rows() const { return store_.rows(); }
  std::size_t cols() const { return store_.cols(); }
  double weight(std::size_t i) const { return weights_.at(i); }
  double max_weighted_norm_sq() const { return m_w_; }
  const MatrixStore& unweighted() const { return store_; }

  /// (sqrt(w_i) x_i, sqrt(M_w - w_i ||x_i||^2)) / sqrt(M_w).
  Vector prepare_weighted_row_state(std::size_t i) const;

  /// sqrt(W) X as a dense matrix.
  Matrix to_dense() const;

  std::string to_json() const;
  static WeightedStore from_json(const std::string& text);

 private:
  void refresh(std::size_t i);

  MatrixStore store_;
  std::vector<double> weights_;
  double m_w_ = 0.0;
};

/// The two copies used by the walk: a row store of sgn(a)|a|^p and a store
/// over A^T of |a|^{1-p}, so that row j of the second store is column j of A.
struct StorePair {
  MatrixStore rows;
  MatrixStore cols;
  double p = 0.5;

  static StorePair from_stream(std::span<const CoordEntry> entries, std::size_t m, std::size_t n, double p);
  static StorePair from_matrix(const Matrix& a, double p);

  std::size_t m() const { return rows.rows(); }
  std::size_t n() const { return rows.cols(); }
  /// sqrt(M_rows * M_cols); equals mu_p(A) unless an overwrite lowered a row.
  double mu() const;
};

}  // namespace qgd
