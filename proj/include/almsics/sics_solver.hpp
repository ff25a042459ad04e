#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "almsics/alm.hpp"
#include "almsics/sics_model.hpp"

namespace almsics::sics {

enum class InitialPoint { diagonal, identity };

struct SicsConfig {
  double eps_gap = 1e-3;
  double eps_rel = 1e-8;
  long n_gap = 20;  // gap-check period
  long n_mu = 20;   // mu-update period
  double eta_mu = 1.0 / 3.0;
  std::optional<double> mu_bar;  // empty: max(mu0 * eta_mu^8, 1e-6)
  std::optional<double> mu0;     // empty: default_mu0(rho)
  long max_iter = 10000;
  bool fixed_mu_mode = false;  // hold mu at mu0 for every iteration
  InitialPoint init = InitialPoint::diagonal;
};

/// 100/rho for rho < 0.5, rho for 0.5 <= rho <= 10, rho/100 above.
double default_mu0(double rho);

/// mu_k = max(mu0 * eta^floor(k / n_mu), mu_bar), or mu0 in fixed mode.
class MuSchedule {
 public:
  MuSchedule(const SicsConfig& config, double rho);

  double operator()(long k) const;
  double mu0() const { return mu0_; }
  double mu_bar() const { return mu_bar_; }

 private:
  double mu0_;
  double mu_bar_;
  double eta_;
  long n_mu_;
  bool fixed_;
};

double mu_schedule(const SicsConfig& config, double rho, long k);

/// Defaults, but solved to duality gap eps_gap with the relative-change
/// stop disabled, and mu_bar lowered to at most alpha^2 / 4, the reciprocal
/// of the Lipschitz constant of grad f on X >= (alpha / 2) I.
SicsConfig certification_config(const SicsProblem& p, double eps_gap);

struct RelativeChanges {
  double frel;
  double xrel;
  double yrel;
};

/// |a - b| / max(1, |a|, |b|) style changes between consecutive iterates.
RelativeChanges relative_changes(double f_prev, double f_cur, const SymMatrixd& x_prev,
                                 const SymMatrixd& x_cur, const SymMatrixd& y_prev,
                                 const SymMatrixd& y_cur);

enum class Termination { running, gap_met, rel_change_met, max_iter };

std::string to_string(Termination t);

/// `fresh_gap` is set only on iterations where the gap was evaluated.
Termination termination_check(const RelativeChanges& rel, const std::optional<GapInfo>& fresh_gap,
                              const SicsConfig& config);

/// Step 2 with the f terms cancelled:
/// g(X) > g(Y) - <Lambda, X - Y> + |X - Y|_F^2 / (2 mu).
bool skip_test_g(const SymMatrixd& x_next, const SymMatrixd& y, const SymMatrixd& lambda, double mu,
                 double rho);

/// The problem seen through the CompositeObjective interface. Caches the
/// eigendecomposition of the most recent X so f and its gradient come for
/// free after an X-step. One instance per run; not thread-safe.
class SicsObjective {
 public:
  using Point = SymMatrixd;
  using Scalar = double;

  SicsObjective(const SicsProblem& problem, double floor);

  double f_value(const SymMatrixd& x) const;
  SymMatrixd f_grad(const SymMatrixd& x) const;
  double g_value(const SymMatrixd& x) const;
  SymMatrixd prox_g(const SymMatrixd& v, double mu) const;
  SymMatrixd solve_x_subproblem(const SymMatrixd& y, const SymMatrixd& lambda, double mu) const;

  SymMatrixd initial_multiplier(const SymMatrixd& x0) const;
  bool skip_test(const SymMatrixd& x_next, const SymMatrixd& y, const SymMatrixd& lambda,
                 double mu) const;
  bool accept_skip(const SymMatrixd& y) const;
  SymMatrixd multiplier(const SymMatrixd& v, const SymMatrixd& y, double mu) const;

  /// Decomposition of x, reusing the cache when x matches it.
  const EigenDecompositiond& eig_of(const SymMatrixd& x) const;

  const SicsProblem& problem() const { return problem_; }
  double floor() const { return floor_; }

 private:
  struct Cache {
    SymMatrixd x;
    EigenDecompositiond eig;
    SymMatrixd inverse;
    bool has_inverse = false;
  };

  const SicsProblem& problem_;
  double floor_;
  mutable std::optional<Cache> cache_;
};

static_assert(alm::CompositeObjective<SicsObjective>);

struct IterationRecord {
  long k = 0;
  double mu = 0;
  double F = 0;  // primal objective at X^k
  std::optional<double> dgap;
  std::optional<double> rel_gap;
  double frel = 0;
  double xrel = 0;
  double yrel = 0;
  bool skipped = false;
  double seconds = 0;  // wall time since the solve started
};

struct SolveResult {
  SymMatrixd X;
  SymMatrixd Y;
  SymMatrixd Lambda;
  Termination termination = Termination::running;
  std::vector<IterationRecord> trace;
  long iterations = 0;
  long unskipped = 0;
  AlphaBound alpha{};
  std::optional<GapInfo> final_gap;
};

/// Everything one iteration touched, for diagnostics and invariant tests.
struct IterationView {
  long k;
  double mu;
  const SymMatrixd& x_candidate;  // step-1 solution before the skip test
  const SymMatrixd& x_prev;
  const SymMatrixd& y_prev;
  const SymMatrixd& lambda_prev;
  const SymMatrixd& x;
  const SymMatrixd& y;
  const SymMatrixd& lambda;
  bool skipped;
  const SicsObjective& model;
};

using IterationObserver = std::function<void(const IterationView&)>;

SymMatrixd initial_point(const SicsProblem& p, InitialPoint init);

/// Throws std::invalid_argument for inconsistent settings.
void validate(const SicsConfig& config);

SolveResult solve(const SicsProblem& p, const SicsConfig& config,
                  const IterationObserver& observer = {});

}  // namespace almsics::sics
