#include "almsics/sics_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace almsics::sics {

SicsProblem::SicsProblem(SymMatrixd sigma_hat, double rho, bool allow_zero_rho)
    : sigma_hat_(std::move(sigma_hat)), rho_(rho) {
  if (sigma_hat_.size() < 1) throw std::invalid_argument("SicsProblem: empty covariance");
  if (!std::isfinite(rho) || rho < 0) throw std::invalid_argument("SicsProblem: rho must be finite and >= 0");
  if (rho == 0 && !allow_zero_rho) {
    throw std::invalid_argument("SicsProblem: rho = 0 requires the explicit zero-rho override");
  }
  if ((sigma_hat_.matrix().diagonal().array() < 0).any()) {
    throw std::invalid_argument("SicsProblem: covariance has a negative diagonal entry");
  }
}

AlphaBound alpha_bound(const SicsProblem& p) {
  const double denom = spectral_norm(p.sigma_hat()) + static_cast<double>(p.n()) * p.rho();
  if (!(denom > 0)) throw std::invalid_argument("alpha_bound: |S| + n rho is zero");
  const double alpha = 1.0 / denom;
  return {alpha, alpha / 2};
}

double f_value(const EigenDecompositiond& x_eig, const SymMatrixd& x, const SicsProblem& p) {
  double log_det = 0;
  try {
    log_det = log_det_from_eig(x_eig);
  } catch (const NotPositiveDefiniteError& e) {
    throw DomainError(std::string("f_value: ") + e.what());
  }
  return -log_det + inner(p.sigma_hat(), x);
}

double f_value(const SymMatrixd& x, const SicsProblem& p) { return f_value(sym_eig(x), x, p); }

SymMatrixd f_grad(const EigenDecompositiond& x_eig, const SicsProblem& p) {
  return p.sigma_hat() - inverse_from_eig(x_eig);
}

SymMatrixd f_grad(const SymMatrixd& x, const SicsProblem& p) { return f_grad(sym_eig(x), p); }

double g_value(const SymMatrixd& x, double rho) { return rho * l1_norm(x); }

XStep x_subproblem(const SymMatrixd& y, const SymMatrixd& lambda, double mu, const SicsProblem& p,
                   double floor) {
  if (!(mu > 0)) throw std::invalid_argument("x_subproblem: mu must be positive");
  const SymMatrixd m = y + mu * (lambda - p.sigma_hat());
  EigenDecompositiond e = sym_eig(m);
  bool clamped = false;
  // (d + sqrt(d^2 + 4 mu)) / 2 loses digits for d << 0; 2 mu / (sqrt(d^2 + 4 mu) - d)
  // is the same root without cancellation.
  for (Index i = 0; i < e.eigenvalues.size(); ++i) {
    const double d = e.eigenvalues(i);
    const double r = std::sqrt(d * d + 4 * mu);
    double gamma = d >= 0 ? (d + r) / 2 : 2 * mu / (r - d);
    if (gamma < floor) {
      gamma = floor;
      clamped = true;
    }
    e.eigenvalues(i) = gamma;
  }
  // gamma is nondecreasing in d, so the ascending order survives.
  SymMatrixd x = reconstruct(e);
  return {std::move(x), std::move(e), clamped};
}

SymMatrixd y_subproblem(const SymMatrixd& x, const SymMatrixd& grad_f, double mu, double rho) {
  if (!(mu > 0)) throw std::invalid_argument("y_subproblem: mu must be positive");
  if (!(rho >= 0)) throw std::invalid_argument("y_subproblem: rho must be nonnegative");
  return shrink(SymMatrixd(x - mu * grad_f), mu * rho);
}

double primal_obj(const EigenDecompositiond& x_eig, const SymMatrixd& x, const SicsProblem& p) {
  return f_value(x_eig, x, p) + g_value(x, p.rho());
}

double primal_obj(const SymMatrixd& x, const SicsProblem& p) { return primal_obj(sym_eig(x), x, p); }

DualValue dual_obj(const SymMatrixd& w, const SicsProblem& p) {
  const auto log_det = log_det_if_positive_definite(w);
  if (!log_det) throw DomainError("dual_obj: W is not positive definite");
  const bool feasible = max_abs(SymMatrixd(w - p.sigma_hat())) <= p.rho() * (1 + 1e-12);
  return {*log_det + static_cast<double>(p.n()), feasible};
}

GapInfo dual_gap(const EigenDecompositiond& x_eig, const SymMatrixd& x, const SymMatrixd& lambda,
                 const SicsProblem& p) {
  const double lam_inf = max_abs(lambda);
  if (lam_inf > p.rho() * (1 + 1e-10)) {
    std::ostringstream msg;
    msg << "dual_gap: |Lambda|_inf = " << lam_inf << " exceeds rho = " << p.rho();
    throw InvariantError(msg.str());
  }
  const double pobj = primal_obj(x_eig, x, p);
  const auto log_det_w = log_det_if_positive_definite(SymMatrixd(p.sigma_hat() - lambda));
  if (!log_det_w) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, pobj, -inf, false};
  }
  const double dobj = *log_det_w + static_cast<double>(p.n());
  const double dgap = pobj - dobj;
  return {dgap, dgap / (1 + std::abs(pobj) + std::abs(dobj)), pobj, dobj, true};
}

GapInfo dual_gap(const EigenDecompositiond& x_eig, const SymMatrixd& lambda, const SicsProblem& p) {
  return dual_gap(x_eig, reconstruct(x_eig), lambda, p);
}

}  // namespace almsics::sics
