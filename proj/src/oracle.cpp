#include "almsics/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "almsics/sics_solver.hpp"

namespace almsics::oracle {

namespace {

constexpr double kArmijo = 1e-4;

struct Factored {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det = 0;
};

std::optional<Factored> factor(const Eigen::MatrixXd& a) {
  Factored out{Eigen::LLT<Eigen::MatrixXd>(a), 0};
  if (out.llt.info() != Eigen::Success) return std::nullopt;
  const auto d = out.llt.matrixLLT().diagonal();
  if ((d.array() <= 0).any()) return std::nullopt;
  out.log_det = 2 * d.array().log().sum();
  if (!std::isfinite(out.log_det)) return std::nullopt;
  return out;
}

// smooth part -log det X + <S, X>
double smooth(const Factored& fx, const Eigen::MatrixXd& x, const Eigen::MatrixXd& s) {
  return -fx.log_det + s.cwiseProduct(x).sum();
}

double l1(const Eigen::MatrixXd& x) { return x.cwiseAbs().sum(); }

Eigen::MatrixXd soft(const Eigen::MatrixXd& z, double t) {
  return z.unaryExpr([t](double v) { return v > t ? v - t : (v < -t ? v + t : 0.0); });
}

struct DualCheck {
  Eigen::MatrixXd w;
  double value;  // -inf if w not PD
};

DualCheck dual_point(const Eigen::MatrixXd& x_inv, const Eigen::MatrixXd& s, double rho) {
  Eigen::MatrixXd w = s + (x_inv - s).unaryExpr([rho](double v) { return std::clamp(v, -rho, rho); });
  w = (w + w.transpose()).eval() / 2;
  const auto fw = factor(w);
  const double value = fw ? fw->log_det + static_cast<double>(w.rows())
                          : -std::numeric_limits<double>::infinity();
  return {std::move(w), value};
}

}  // namespace

OracleResult ista_solve(const sics::SicsProblem& p, double tol, long max_iter) {
  const Index n = p.n();
  if (n > kMaxDimension) {
    std::ostringstream msg;
    msg << "ista_solve: n = " << n << " exceeds the oracle limit " << kMaxDimension;
    throw std::invalid_argument(msg.str());
  }
  if (!(tol >= kMinTolerance)) throw std::invalid_argument("ista_solve: tol must be >= 1e-8");
  if (max_iter < 1) throw std::invalid_argument("ista_solve: max_iter must be >= 1");
  const double rho = p.rho();
  if (!(rho >= 0)) throw std::invalid_argument("ista_solve: rho must be nonnegative");

  const Eigen::MatrixXd& s = p.sigma_hat().matrix();
  const double alpha = 1.0 / (spectral_norm(p.sigma_hat()) + static_cast<double>(n) * rho);

  Eigen::MatrixXd x = (s.diagonal().array() + rho).inverse().matrix().asDiagonal();
  auto fx = factor(x);
  if (!fx) throw NotPositiveDefiniteError("ista_solve: starting point is not positive definite");
  const double fsmooth = smooth(*fx, x, s);

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd x_inv = fx->llt.solve(eye);
  double fobj = fsmooth + rho * l1(x);
  const double s_min = alpha * alpha;
  double trial_step = s_min;

  OracleResult out;
  DualCheck dual{};
  double gap = std::numeric_limits<double>::infinity();
  long it = 0;
  out.history.push_back(fobj);
  for (;;) {
    dual = dual_point(x_inv, s, rho);
    gap = fobj - dual.value;
    if (gap <= tol || it >= max_iter) break;

    const Eigen::MatrixXd grad = s - x_inv;
    double t = trial_step;
    for (;;) {
      Eigen::MatrixXd trial = soft(x - t * grad, t * rho);
      trial = (trial + trial.transpose()).eval() / 2;
      auto ft = factor(trial);
      if (ft) {
        const double f_trial = smooth(*ft, trial, s) + rho * l1(trial);
        const double decrease = kArmijo * (trial - x).squaredNorm() / (2 * t);
        if (f_trial <= fobj - decrease + 1e-12 * std::max(1.0, std::abs(fobj))) {
          Eigen::MatrixXd inv_trial = ft->llt.solve(eye);
          inv_trial = (inv_trial + inv_trial.transpose()).eval() / 2;
          // Barzilai-Borwein guess for the next trial step
          const Eigen::MatrixXd dx = trial - x;
          const double curv = dx.cwiseProduct(x_inv - inv_trial).sum();
          trial_step = curv > 0 ? std::clamp(dx.squaredNorm() / curv, s_min, 1e6) : 2 * t;
          x = std::move(trial);
          x_inv = std::move(inv_trial);
          fobj = f_trial;
          out.history.push_back(fobj);
          break;
        }
      }
      t /= 2;
      if (t < 1e-20) {
        throw DivergenceError("ista_solve: backtracking failed to find a step", it, t);
      }
    }
    ++it;
  }

  out.X_star = SymMatrixd(x);
  out.W = SymMatrixd(dual.w);
  out.F_star = fobj;
  out.iterations = it;
  out.certified_gap = std::isfinite(dual.value) ? gap : std::numeric_limits<double>::infinity();
  out.certified = out.certified_gap <= tol;
  return out;
}

AgreementReport agree(const sics::SicsProblem& p, double gap_tol) {
  AgreementReport rep;
  const OracleResult o = ista_solve(p, gap_tol);

  const sics::SolveResult r = sics::solve(p, sics::certification_config(p, gap_tol));

  rep.F_oracle = o.F_star;
  rep.oracle_gap = o.certified_gap;
  rep.oracle_certified = o.certified;
  rep.oracle_iterations = o.iterations;
  rep.alm_iterations = r.iterations;
  rep.F_alm = r.final_gap ? r.final_gap->pobj : sics::primal_obj(r.X, p);
  rep.alm_gap = r.final_gap && r.final_gap->dual_feasible ? r.final_gap->dgap
                                                          : std::numeric_limits<double>::infinity();
  rep.alm_certified = rep.alm_gap <= gap_tol;
  rep.rel_objective_diff = std::abs(rep.F_alm - rep.F_oracle) / (1 + std::abs(rep.F_oracle));

  const Eigen::MatrixXd xs = o.X_star.matrix().unaryExpr([](double v) { return std::abs(v) > 1e-6 ? v : 0.0; });
  rep.pattern = metrics::pattern_diff(metrics::pattern_from_primal(r.Y), metrics::pattern_of(xs));
  return rep;
}

}  // namespace almsics::oracle
