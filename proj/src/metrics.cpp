#include "almsics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace almsics::metrics {

SparsityPattern::SparsityPattern(Index n, std::vector<Entry> entries) : n_(n), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
  for (const auto& [i, j] : entries_) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) {
      std::ostringstream msg;
      msg << "SparsityPattern: entry (" << i << "," << j << ") outside " << n_ << "x" << n_;
      throw std::invalid_argument(msg.str());
    }
    if (!std::binary_search(entries_.begin(), entries_.end(), Entry{j, i})) {
      std::ostringstream msg;
      msg << "SparsityPattern: (" << i << "," << j << ") present without its mirror";
      throw std::invalid_argument(msg.str());
    }
  }
}

bool SparsityPattern::contains(Index i, Index j) const {
  return std::binary_search(entries_.begin(), entries_.end(), Entry{i, j});
}

namespace {

template <typename Pred>
SparsityPattern collect(Index n, Pred&& nonzero) {
  std::vector<SparsityPattern::Entry> entries;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (nonzero(i, j)) entries.emplace_back(i, j);
    }
  }
  return SparsityPattern(n, std::move(entries));
}

}  // namespace

SparsityPattern pattern_of(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("pattern_of: matrix must be square");
  // Union of both orientations, so an asymmetric input still yields a symmetric pattern.
  return collect(m.rows(), [&](Index i, Index j) { return m(i, j) != 0.0 || m(j, i) != 0.0; });
}

SparsityPattern pattern_from_primal(const SymMatrixd& y) {
  return collect(y.size(), [&](Index i, Index j) { return y(i, j) != 0.0; });
}

SparsityPattern pattern_from_dual(const SymMatrixd& w, const SymMatrixd& sigma_hat, double rho, double tol) {
  if (w.size() != sigma_hat.size()) throw std::invalid_argument("pattern_from_dual: dimension mismatch");
  if (!(rho >= 0) || !(tol >= 0)) throw std::invalid_argument("pattern_from_dual: rho and tol must be >= 0");
  const Eigen::MatrixXd u = (w.matrix() - sigma_hat.matrix()).cwiseAbs();
  if (u.maxCoeff() > rho * (1 + tol)) {
    std::ostringstream msg;
    msg << "pattern_from_dual: W is dual infeasible (|W - S|_inf = " << u.maxCoeff() << " > rho = " << rho << ")";
    throw std::invalid_argument(msg.str());
  }
  const double cut = rho * (1 - tol);
  return collect(w.size(), [&](Index i, Index j) { return u(i, j) >= cut; });
}

PatternDiff pattern_diff(const SparsityPattern& a, const SparsityPattern& b) {
  if (a.n() != b.n()) throw std::invalid_argument("pattern_diff: dimension mismatch");
  std::vector<SparsityPattern::Entry> tmp;
  PatternDiff d;
  std::set_difference(a.entries().begin(), a.entries().end(), b.entries().begin(), b.entries().end(),
                      std::back_inserter(tmp));
  d.a_not_b = tmp.size();
  tmp.clear();
  std::set_difference(b.entries().begin(), b.entries().end(), a.entries().begin(), a.entries().end(),
                      std::back_inserter(tmp));
  d.b_not_a = tmp.size();
  tmp.clear();
  std::set_intersection(a.entries().begin(), a.entries().end(), b.entries().begin(), b.entries().end(),
                        std::back_inserter(tmp));
  d.both = tmp.size();
  return d;
}

RecoveryStats recovery_stats(const SparsityPattern& found, const SparsityPattern& truth) {
  if (found.n() != truth.n()) throw std::invalid_argument("recovery_stats: dimension mismatch");
  RecoveryStats s;
  for (const auto& [i, j] : found.entries()) {
    if (i == j) continue;
    if (truth.contains(i, j)) {
      ++s.true_pos;
    } else {
      ++s.false_pos;
    }
  }
  for (const auto& [i, j] : truth.entries()) {
    if (i != j && !found.contains(i, j)) ++s.false_neg;
  }
  return s;
}

}  // namespace almsics::metrics
