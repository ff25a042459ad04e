#pragma once

// Small-scale reference solver used to certify the ALM results. Plain
// proximal gradient on the primal with backtracking; it shares nothing with
// the ALM path except the dense kernel in linalg.hpp.

#include <vector>

#include "almsics/metrics.hpp"
#include "almsics/sics_model.hpp"

namespace almsics::oracle {

inline constexpr Index kMaxDimension = 200;
inline constexpr double kMinTolerance = 1e-8;

struct OracleResult {
  SymMatrixd X_star;
  SymMatrixd W;  // dual point S + clip(X^{-1} - S, -rho, rho)
  double F_star = 0;
  long iterations = 0;
  double certified_gap = 0;  // primal(X_star) - dual(W); +inf if W is not PD
  bool certified = false;
  std::vector<double> history;  // objective at the start and after every accepted step
};

/// X+ = shrink(X - s (S - X^{-1}), s rho). The step s is halved until X+ is
/// positive definite and F decreases by at least 1e-4 |X+ - X|^2 / (2 s).
/// The first trial step is alpha^2, later ones a Barzilai-Borwein guess.
/// Stops once the duality gap at W = S + clip(X^{-1} - S, -rho, rho) is at
/// most tol.
OracleResult ista_solve(const sics::SicsProblem& p, double tol, long max_iter = 200000);

struct AgreementReport {
  double F_alm = 0;
  double F_oracle = 0;
  double rel_objective_diff = 0;  // |F_alm - F_oracle| / (1 + |F_oracle|)
  double alm_gap = 0;
  double oracle_gap = 0;
  bool alm_certified = false;
  bool oracle_certified = false;
  metrics::PatternDiff pattern;  // ALM Y vs oracle X* thresholded at 1e-6
  long alm_iterations = 0;
  long oracle_iterations = 0;
};

/// Solves with both methods to duality gap gap_tol and compares.
AgreementReport agree(const sics::SicsProblem& p, double gap_tol);

}  // namespace almsics::oracle
