#include "almsics/datagen.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace almsics::datagen {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const char* to_string(UStructure s) {
  return s == UStructure::full ? "full" : "unit_upper";
}

SparseU gen_sparse_u(Index n, double density, std::uint64_t seed, UStructure structure) {
  if (n < 1) throw std::invalid_argument("gen_sparse_u: n must be >= 1");
  if (!(density > 0 && density <= 1)) throw std::invalid_argument("gen_sparse_u: density must lie in (0, 1]");
  Rng rng(seed);
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (structure == UStructure::unit_upper) {
        if (j < i) continue;
        if (j == i) {
          triplets.emplace_back(i, j, rng.sign());
          continue;
        }
      }
      if (rng.bernoulli(density)) triplets.emplace_back(i, j, rng.sign());
    }
  }
  SparseU u(n, n);
  u.setFromTriplets(triplets.begin(), triplets.end());
  return u;
}

TrueCovariance true_covariance(const SparseU& u, double min_eig_ratio) {
  if (u.rows() != u.cols()) throw std::invalid_argument("true_covariance: U must be square");
  if (!(min_eig_ratio > 0 && min_eig_ratio < 1)) {
    throw std::invalid_argument("true_covariance: min_eig_ratio must lie in (0, 1)");
  }
  const Eigen::MatrixXd dense_u(u);
  SymMatrixd m(Eigen::MatrixXd(dense_u * dense_u.transpose()));
  const auto e = sym_eig(m);
  const double threshold = min_eig_ratio * std::max(1.0, e.max_eigenvalue());
  double shift = 0;
  if (e.min_eigenvalue() <= threshold) {
    shift = threshold - e.min_eigenvalue();
    m += shift * SymMatrixd::identity(m.size());
  }
  EigenDecompositiond shifted = e;
  shifted.eigenvalues.array() += shift;
  return {std::move(m), inverse_from_eig(shifted), shift};
}

SymMatrixd sample_covariance(const SymMatrixd& s, Index p, std::uint64_t seed) {
  if (p < 1) throw std::invalid_argument("sample_covariance: p must be >= 1");
  Eigen::LLT<Eigen::MatrixXd> llt(s.matrix());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("sample_covariance: covariance is not positive definite");
  }
  const Index n = s.size();
  Rng rng(seed);
  Eigen::MatrixXd z(n, p);
  for (Index c = 0; c < p; ++c) {
    for (Index r = 0; r < n; ++r) z(r, c) = rng.normal();
  }
  const Eigen::MatrixXd y = llt.matrixL() * z;
  return SymMatrixd(Eigen::MatrixXd(y * y.transpose() / static_cast<double>(p)));
}

SyntheticInstance gen_instance(Index n, double density, std::uint64_t seed, UStructure structure,
                               double min_eig_ratio) {
  if (n < 2) throw std::invalid_argument("gen_instance: n must be >= 2");
  SyntheticInstance inst;
  inst.n = n;
  inst.p = 5 * n;
  inst.seed = seed;
  inst.density = density;
  inst.structure = structure;
  inst.min_eig_ratio = min_eig_ratio;
  inst.u = gen_sparse_u(n, density, derive_seed(seed, 0), structure);
  TrueCovariance tc = true_covariance(inst.u, min_eig_ratio);
  inst.sigma_hat = sample_covariance(tc.covariance, inst.p, derive_seed(seed, 1));
  inst.ground_truth = metrics::pattern_of(tc.precision.matrix());
  inst.precision = std::move(tc.precision);
  inst.covariance = std::move(tc.covariance);
  inst.repair_shift = tc.repair_shift;
  return inst;
}

}  // namespace almsics::datagen
