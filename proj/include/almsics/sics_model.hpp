#pragma once

// l1-penalized Gaussian log-likelihood
//
//   min_{X > 0}  f(X) + g(X),  f(X) = -log det X + <S, X>,  g(X) = rho |X|_1
//
// with S the sample covariance. |X|_1 sums all n^2 entries, diagonal
// included. The dual is  max { log det W + n : |W - S|_inf <= rho }.

#include "almsics/linalg.hpp"

namespace almsics::sics {

class SicsProblem {
 public:
  /// rho == 0 is rejected unless allow_zero_rho is set.
  SicsProblem(SymMatrixd sigma_hat, double rho, bool allow_zero_rho = false);

  const SymMatrixd& sigma_hat() const { return sigma_hat_; }
  double rho() const { return rho_; }
  Index n() const { return sigma_hat_.size(); }

 private:
  SymMatrixd sigma_hat_;
  double rho_;
};

// The optimum satisfies X* >= alpha I with alpha = 1 / (|S|_2 + n rho).
// The X-step keeps its iterates above floor = alpha / 2.
struct AlphaBound {
  double alpha;
  double floor;
};

AlphaBound alpha_bound(const SicsProblem& p);

double f_value(const EigenDecompositiond& x_eig, const SymMatrixd& x, const SicsProblem& p);
double f_value(const SymMatrixd& x, const SicsProblem& p);

/// S - X^{-1}.
SymMatrixd f_grad(const EigenDecompositiond& x_eig, const SicsProblem& p);
SymMatrixd f_grad(const SymMatrixd& x, const SicsProblem& p);

double g_value(const SymMatrixd& x, double rho);

struct XStep {
  SymMatrixd x;
  EigenDecompositiond eig;  // eigendecomposition of x itself
  bool clamped = false;     // some eigenvalue was raised to the floor
};

/// argmin_X f(X) - <Lambda, X - Y> + |X - Y|_F^2 / (2 mu) over X >= floor I.
/// With V diag(d) V^T = Y + mu (Lambda - S), the solution is V diag(g) V^T,
/// g_i = max(floor, (d_i + sqrt(d_i^2 + 4 mu)) / 2).
XStep x_subproblem(const SymMatrixd& y, const SymMatrixd& lambda, double mu, const SicsProblem& p,
                   double floor);

/// shrink(X - mu grad_f, mu rho).
SymMatrixd y_subproblem(const SymMatrixd& x, const SymMatrixd& grad_f, double mu, double rho);

double primal_obj(const SymMatrixd& x, const SicsProblem& p);
double primal_obj(const EigenDecompositiond& x_eig, const SymMatrixd& x, const SicsProblem& p);

struct DualValue {
  double value;
  bool feasible;  // |W - S|_inf <= rho (1 + 1e-12)
};

DualValue dual_obj(const SymMatrixd& w, const SicsProblem& p);

struct GapInfo {
  double dgap;     // +inf when S - Lambda is not positive definite
  double rel_gap;  // dgap / (1 + |pobj| + |dobj|)
  double pobj;
  double dobj;
  bool dual_feasible;
};

/// Duality gap at primal X and dual candidate W = S - Lambda.
/// Throws InvariantError if |Lambda|_inf > rho (1 + 1e-10).
GapInfo dual_gap(const EigenDecompositiond& x_eig, const SymMatrixd& x, const SymMatrixd& lambda,
                 const SicsProblem& p);
GapInfo dual_gap(const EigenDecompositiond& x_eig, const SymMatrixd& lambda, const SicsProblem& p);

}  // namespace almsics::sics
