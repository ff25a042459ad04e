#include "almsics/sics_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace almsics::sics {

double default_mu0(double rho) {
  if (!(rho > 0)) {
    throw std::invalid_argument("default_mu0: rho must be positive; supply mu0 explicitly");
  }
  if (rho < 0.5) return 100.0 / rho;
  if (rho <= 10.0) return rho;
  return rho / 100.0;
}

void validate(const SicsConfig& c) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("SicsConfig: " + m); };
  if (!(c.eps_gap > 0)) fail("eps_gap must be positive");
  if (!(c.eps_rel > 0)) fail("eps_rel must be positive");
  if (c.n_gap < 1) fail("n_gap must be >= 1");
  if (c.n_mu < 1) fail("n_mu must be >= 1");
  if (!(c.eta_mu > 0 && c.eta_mu < 1)) fail("eta_mu must lie in (0, 1)");
  if (c.max_iter < 0) fail("max_iter must be >= 0");
  if (c.mu0 && !(*c.mu0 > 0 && std::isfinite(*c.mu0))) fail("mu0 must be positive");
  if (c.mu_bar && !(*c.mu_bar > 0 && std::isfinite(*c.mu_bar))) fail("mu_bar must be positive");
}

MuSchedule::MuSchedule(const SicsConfig& config, double rho)
    : mu0_(config.mu0 ? *config.mu0 : default_mu0(rho)),
      eta_(config.eta_mu),
      n_mu_(config.n_mu),
      fixed_(config.fixed_mu_mode) {
  validate(config);
  if (config.mu_bar) {
    mu_bar_ = *config.mu_bar;
    if (mu_bar_ > mu0_) throw std::invalid_argument("SicsConfig: mu_bar must not exceed mu0");
  } else {
    // The 1e-6 floor cannot exceed mu0 itself.
    mu_bar_ = std::min(mu0_, std::max(mu0_ * std::pow(eta_, 8), 1e-6));
  }
}

double MuSchedule::operator()(long k) const {
  if (fixed_) return mu0_;
  const double mu = mu0_ * std::pow(eta_, static_cast<double>(k / n_mu_));
  return std::max(mu, mu_bar_);
}

double mu_schedule(const SicsConfig& config, double rho, long k) { return MuSchedule(config, rho)(k); }

SicsConfig certification_config(const SicsProblem& p, double eps_gap) {
  SicsConfig c;
  c.eps_gap = eps_gap;
  c.eps_rel = 1e-16;
  const double a = alpha_bound(p).alpha;
  c.mu_bar = std::min(MuSchedule(c, p.rho()).mu_bar(), a * a / 4);
  return c;
}

RelativeChanges relative_changes(double f_prev, double f_cur, const SymMatrixd& x_prev,
                                 const SymMatrixd& x_cur, const SymMatrixd& y_prev,
                                 const SymMatrixd& y_cur) {
  auto scale = [](double a, double b) { return std::max({1.0, a, b}); };
  const double frel = std::abs(f_cur - f_prev) / scale(std::abs(f_cur), std::abs(f_prev));
  const double xrel = (x_cur.matrix() - x_prev.matrix()).norm() /
                      scale(x_cur.matrix().norm(), x_prev.matrix().norm());
  const double yrel = (y_cur.matrix() - y_prev.matrix()).norm() /
                      scale(y_cur.matrix().norm(), y_prev.matrix().norm());
  return {frel, xrel, yrel};
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::running: return "running";
    case Termination::gap_met: return "gap_met";
    case Termination::rel_change_met: return "rel_change_met";
    case Termination::max_iter: return "max_iter";
  }
  return "unknown";
}

Termination termination_check(const RelativeChanges& rel, const std::optional<GapInfo>& fresh_gap,
                              const SicsConfig& config) {
  if (fresh_gap && fresh_gap->dual_feasible && fresh_gap->dgap <= config.eps_gap) {
    return Termination::gap_met;
  }
  if (std::max({rel.frel, rel.xrel, rel.yrel}) <= config.eps_rel) return Termination::rel_change_met;
  return Termination::running;
}

bool skip_test_g(const SymMatrixd& x_next, const SymMatrixd& y, const SymMatrixd& lambda, double mu,
                 double rho) {
  const SymMatrixd d = x_next - y;
  const double lhs = g_value(x_next, rho);
  const double rhs = g_value(y, rho) - inner(lambda, d) + squared_norm(d) / (2 * mu);
  return lhs > rhs + alm::kInequalitySlack * std::max(1.0, std::abs(rhs));
}

// ---------------------------------------------------------------------------

SicsObjective::SicsObjective(const SicsProblem& problem, double floor)
    : problem_(problem), floor_(floor) {}

const EigenDecompositiond& SicsObjective::eig_of(const SymMatrixd& x) const {
  if (cache_ && cache_->x == x) return cache_->eig;
  EigenDecompositiond e = sym_eig(x);
  if (!(e.min_eigenvalue() > 0)) {
    std::ostringstream msg;
    msg << "SicsObjective: X is not positive definite (min eigenvalue " << e.min_eigenvalue() << ")";
    throw DomainError(msg.str());
  }
  cache_ = Cache{x, std::move(e), {}, false};
  return cache_->eig;
}

double SicsObjective::f_value(const SymMatrixd& x) const {
  return sics::f_value(eig_of(x), x, problem_);
}

SymMatrixd SicsObjective::f_grad(const SymMatrixd& x) const {
  const auto& e = eig_of(x);
  if (!cache_->has_inverse) {
    cache_->inverse = inverse_from_eig(e);
    cache_->has_inverse = true;
  }
  return problem_.sigma_hat() - cache_->inverse;
}

double SicsObjective::g_value(const SymMatrixd& x) const { return sics::g_value(x, problem_.rho()); }

SymMatrixd SicsObjective::prox_g(const SymMatrixd& v, double mu) const {
  return shrink(v, mu * problem_.rho());
}

SymMatrixd SicsObjective::solve_x_subproblem(const SymMatrixd& y, const SymMatrixd& lambda,
                                             double mu) const {
  XStep step = x_subproblem(y, lambda, mu, problem_, floor_);
  cache_ = Cache{step.x, std::move(step.eig), {}, false};
  return std::move(step.x);
}

SymMatrixd SicsObjective::initial_multiplier(const SymMatrixd& x0) const {
  const double rho = problem_.rho();
  return f_grad(x0).unary_expr([rho](double v) { return std::clamp(v, -rho, rho); });
}

bool SicsObjective::skip_test(const SymMatrixd& x_next, const SymMatrixd& y, const SymMatrixd& lambda,
                              double mu) const {
  return skip_test_g(x_next, y, lambda, mu, problem_.rho());
}

// Y need not be positive definite, so resetting X to Y could leave the domain
// of f. The reset is taken only when Y lies in {X >= floor I}.
bool SicsObjective::accept_skip(const SymMatrixd& y) const {
  EigenDecompositiond e = sym_eig(y);
  if (e.min_eigenvalue() < floor_) return false;
  cache_ = Cache{y, std::move(e), {}, false};
  return true;
}

// -Lambda is the subgradient of g picked by the shrinkage: -rho sgn(v) where
// the entry survived, v / mu where it was truncated. Algebraically equal to
// grad f - (X - Y) / mu, but exact in floating point, so |Lambda|_inf <= rho
// holds without cancellation error.
SymMatrixd SicsObjective::multiplier(const SymMatrixd& v, const SymMatrixd& /*y*/, double mu) const {
  const double rho = problem_.rho();
  const double tau = mu * rho;
  return v.unary_expr([rho, tau, mu](double z) {
    if (std::abs(z) - tau > 0) return z > 0 ? -rho : rho;
    return -z / mu;
  });
}

// ---------------------------------------------------------------------------

SymMatrixd initial_point(const SicsProblem& p, InitialPoint init) {
  if (init == InitialPoint::identity) return SymMatrixd::identity(p.n());
  const Eigen::VectorXd d = (p.sigma_hat().matrix().diagonal().array() + p.rho()).inverse();
  if (!d.allFinite() || (d.array() <= 0).any()) {
    throw std::invalid_argument("initial_point: diagonal start needs S_ii + rho > 0");
  }
  return SymMatrixd::diagonal(d);
}

SolveResult solve(const SicsProblem& p, const SicsConfig& config, const IterationObserver& observer) {
  validate(config);
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  SolveResult result;
  result.alpha = alpha_bound(p);
  const SicsObjective model(p, result.alpha.floor);
  const MuSchedule schedule(config, p.rho());

  auto state = alm::initial_state(model, initial_point(p, config.init), schedule(0));
  double f_prev = alm::objective(model, state.x);

  auto gap_at = [&](const auto& s) { return dual_gap(model.eig_of(s.x), s.x, s.lambda, p); };

  Termination term = config.max_iter == 0 ? Termination::max_iter : Termination::running;
  std::optional<GapInfo> last_gap;
  while (term == Termination::running) {
    auto prev = state;
    prev.mu = schedule(prev.k);
    state = alm::alm_iterate(model, prev, [&](const auto& before, const auto& candidate, const auto& after) {
      if (!observer) return;
      observer(IterationView{after.k, after.mu, candidate, before.x, before.y, before.lambda, after.x,
                             after.y, after.lambda, after.skipped_last, model});
    });

    IterationRecord rec;
    rec.k = state.k;
    rec.mu = state.mu;
    rec.F = alm::objective(model, state.x);
    const RelativeChanges rel = relative_changes(f_prev, rec.F, prev.x, state.x, prev.y, state.y);
    rec.frel = rel.frel;
    rec.xrel = rel.xrel;
    rec.yrel = rel.yrel;
    rec.skipped = state.skipped_last;

    std::optional<GapInfo> gap;
    if (state.k % config.n_gap == 0) gap = gap_at(state);
    term = termination_check(rel, gap, config);
    if (term == Termination::running && state.k >= config.max_iter) term = Termination::max_iter;
    if (term != Termination::running && !gap) gap = gap_at(state);
    if (gap) {
      rec.dgap = gap->dgap;
      rec.rel_gap = gap->rel_gap;
      last_gap = gap;
    }
    rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    result.trace.push_back(rec);
    f_prev = rec.F;
  }

  if (result.trace.empty()) last_gap = gap_at(state);
  result.termination = term;
  result.final_gap = last_gap;
  result.iterations = state.k;
  result.unskipped = state.k_n;
  result.X = std::move(state.x);
  result.Y = std::move(state.y);
  result.Lambda = std::move(state.lambda);
  return result;
}

}  // namespace almsics::sics
