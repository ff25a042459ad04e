#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "almsics/linalg.hpp"

namespace almsics::metrics {

/// Set of nonzero (i, j) positions of an n x n matrix. Symmetric as a
/// relation; both orientations and the diagonal are counted, so nnz is a
/// whole-matrix count.
class SparsityPattern {
 public:
  using Entry = std::pair<Index, Index>;

  explicit SparsityPattern(Index n) : n_(n) {}
  /// Sorts and deduplicates; throws if out of range or not symmetric.
  SparsityPattern(Index n, std::vector<Entry> entries);

  Index n() const { return n_; }
  std::size_t nnz() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  bool contains(Index i, Index j) const;

  friend bool operator==(const SparsityPattern&, const SparsityPattern&) = default;

 private:
  Index n_;
  std::vector<Entry> entries_;  // sorted lexicographically
};

/// Exact nonzeros of a dense matrix (no threshold).
SparsityPattern pattern_of(const Eigen::MatrixXd& m);

/// Nonzeros of the shrinkage iterate Y; shrinkage leaves exact zeros.
SparsityPattern pattern_from_primal(const SymMatrixd& y);

/// Complementary slackness: (i, j) is nonzero iff |W_ij - S_ij| reaches rho,
/// read as >= rho (1 - tol). Throws if |W - S|_inf > rho (1 + tol).
SparsityPattern pattern_from_dual(const SymMatrixd& w, const SymMatrixd& sigma_hat, double rho,
                                  double tol = 1e-6);

struct PatternDiff {
  std::size_t a_not_b = 0;
  std::size_t b_not_a = 0;
  std::size_t both = 0;
};

PatternDiff pattern_diff(const SparsityPattern& a, const SparsityPattern& b);

/// Confusion counts over off-diagonal ordered pairs.
struct RecoveryStats {
  std::size_t true_pos = 0;
  std::size_t false_pos = 0;
  std::size_t false_neg = 0;
};

RecoveryStats recovery_stats(const SparsityPattern& found, const SparsityPattern& truth);

}  // namespace almsics::metrics
