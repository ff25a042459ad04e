#pragma once

// Synthetic instances: a sparse +-1 matrix U defines the true precision
// U U^T, the true covariance S = (U U^T)^{-1}, and p = 5n zero-mean Gaussian
// draws from N(0, S) give the (uncentered) sample covariance.

#include <Eigen/SparseCore>

#include <cstdint>
#include <random>

#include "almsics/linalg.hpp"
#include "almsics/metrics.hpp"

namespace almsics::datagen {

/// Seeded stream: 64-bit Mersenne Twister, uniforms from the top 53 bits,
/// normals by the Box-Muller transform. Bit-reproducible for a given build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  double uniform();  // [0, 1)
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  int sign() { return uniform() < 0.5 ? -1 : 1; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0;
};

/// Independent child seed; SplitMix64 finalizer of (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class UStructure {
  full,        // every entry independently nonzero
  unit_upper,  // +-1 diagonal, strictly upper entries independently nonzero
};

using SparseU = Eigen::SparseMatrix<double>;

/// Nonzeros are +-1 with equal probability.
SparseU gen_sparse_u(Index n, double density, std::uint64_t seed, UStructure structure = UStructure::full);

struct TrueCovariance {
  SymMatrixd precision;   // U U^T, plus repair_shift * I when that was needed
  SymMatrixd covariance;  // precision^{-1}
  double repair_shift = 0;
};

/// If the smallest eigenvalue of U U^T is at most
/// min_eig_ratio * max(1, largest), the diagonal is shifted up to exactly that
/// threshold. The shift leaves the off-diagonal pattern untouched.
TrueCovariance true_covariance(const SparseU& u, double min_eig_ratio = 1e-6);

/// (1/p) sum_i y_i y_i^T with y_i = L z_i, L the Cholesky factor of S. No
/// mean is subtracted. Throws NotPositiveDefiniteError if S is not PD.
SymMatrixd sample_covariance(const SymMatrixd& s, Index p, std::uint64_t seed);

// Density of a full U; the ground-truth pattern then fills about 6.8% of a
// 500 x 500 precision matrix.
inline constexpr double kDefaultDensity = 0.0118;

// Conditioning floor for generated instances: the precision's smallest
// eigenvalue is lifted to 7% of its largest.
inline constexpr double kDefaultMinEigRatio = 0.07;

struct SyntheticInstance {
  SparseU u;
  SymMatrixd precision;
  SymMatrixd covariance;
  SymMatrixd sigma_hat;
  metrics::SparsityPattern ground_truth{0};
  double repair_shift = 0;
  std::uint64_t seed = 0;
  Index n = 0;
  Index p = 0;
  double density = 0;
  double min_eig_ratio = 0;
  UStructure structure = UStructure::full;
};

SyntheticInstance gen_instance(Index n, double density = kDefaultDensity, std::uint64_t seed = 1,
                               UStructure structure = UStructure::full,
                               double min_eig_ratio = kDefaultMinEigRatio);

const char* to_string(UStructure s);

}  // namespace almsics::datagen
