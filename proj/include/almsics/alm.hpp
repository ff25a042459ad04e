#pragma once

// Alternating linearization engine for min F(x) = f(x) + g(x), f smooth.
//
// One iteration (the skipping variant; without skips it is the symmetric
// alternating-direction augmented Lagrangian method):
//   1. x+ = argmin_x f(x) + g(y) - <lambda, x - y> + |x - y|^2 / (2 mu)
//   2. if F(x+) > Q(x+, y) then x+ = y            (skip)
//   3. y+ = prox_g(x+ - mu * grad f(x+), mu)
//   4. lambda+ = grad f(x+) - (x+ - y+) / mu
//
// Models plug in through the CompositeObjective concept. A handful of
// optional hooks let a model specialize a step without changing the loop:
//   initial_multiplier(x0)         lambda^0 (default grad f(x0))
//   skip_test(x+, y, lambda, mu)   equivalent cheaper form of step 2
//   accept_skip(y)                 false vetoes a skip (y outside the domain
//                                  of f); the step-1 solution is kept
//   multiplier(v, y+, mu)          closed form of step 4, v = x+ - mu grad f(x+)

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "almsics/errors.hpp"
#include "almsics/linalg.hpp"

namespace almsics::alm {

template <typename M>
concept CompositeObjective =
    requires(const M& m, const typename M::Point& p, typename M::Scalar mu) {
      { m.f_value(p) } -> std::convertible_to<typename M::Scalar>;
      { m.f_grad(p) } -> std::convertible_to<typename M::Point>;
      { m.g_value(p) } -> std::convertible_to<typename M::Scalar>;
      { m.prox_g(p, mu) } -> std::convertible_to<typename M::Point>;
      { m.solve_x_subproblem(p, p, mu) } -> std::convertible_to<typename M::Point>;
    };

// Relative slack applied to every inequality the engine evaluates.
inline constexpr double kInequalitySlack = 1e-12;

template <typename Point, typename Scalar>
struct AlmState {
  Point x;
  Point y;
  Point lambda;
  Scalar mu{1};
  long k = 0;    // iterations performed
  long k_n = 0;  // iterations without a skip
  bool skipped_last = false;
  bool skip_vetoed_last = false;  // step 2 fired but the model refused the reset
};

template <CompositeObjective M>
using StateOf = AlmState<typename M::Point, typename M::Scalar>;

template <CompositeObjective M>
typename M::Scalar objective(const M& model, const typename M::Point& x) {
  return model.f_value(x) + model.g_value(x);
}

/// Q(x, y) = f(x) + g(y) - <lambda, x - y> + |x - y|^2 / (2 mu).
template <CompositeObjective M>
typename M::Scalar upper_model(const M& model, const typename M::Point& x,
                               const typename M::Point& y, const typename M::Point& lambda,
                               typename M::Scalar mu) {
  using Point = typename M::Point;
  const Point d = x - y;
  return model.f_value(x) + model.g_value(y) - inner(lambda, d) + squared_norm(d) / (2 * mu);
}

/// Step 2 test evaluated with the full F and Q: true when F(x_next) exceeds
/// Q(x_next, y) by more than the relative slack.
template <CompositeObjective M>
bool skip_condition(const M& model, const typename M::Point& x_next, const typename M::Point& y,
                    const typename M::Point& lambda, typename M::Scalar mu) {
  using Scalar = typename M::Scalar;
  const Scalar lhs = objective(model, x_next);
  const Scalar rhs = upper_model(model, x_next, y, lambda, mu);
  return lhs > rhs + Scalar(kInequalitySlack) * std::max(Scalar(1), std::abs(rhs));
}

template <CompositeObjective M>
StateOf<M> initial_state(const M& model, typename M::Point x0, typename M::Scalar mu) {
  if (!(mu > 0)) throw std::invalid_argument("initial_state: mu must be positive");
  StateOf<M> s;
  if constexpr (requires { model.initial_multiplier(x0); }) {
    s.lambda = model.initial_multiplier(x0);
  } else {
    s.lambda = model.f_grad(x0);
  }
  s.y = x0;
  s.x = std::move(x0);
  s.mu = mu;
  return s;
}

namespace detail {

template <CompositeObjective M>
bool run_skip_test(const M& model, const typename M::Point& x_next, const typename M::Point& y,
                   const typename M::Point& lambda, typename M::Scalar mu) {
  if constexpr (requires { model.skip_test(x_next, y, lambda, mu); }) {
    return model.skip_test(x_next, y, lambda, mu);
  } else {
    return skip_condition(model, x_next, y, lambda, mu);
  }
}

template <typename Point>
bool point_is_finite(const Point& p) {
  return std::isfinite(squared_norm(p));
}

}  // namespace detail

/// One iteration of the skipping method. The observer, when given, sees the
/// state before the step, the raw step-1 solution, and the new state.
template <CompositeObjective M, typename Observer>
StateOf<M> alm_iterate(const M& model, const StateOf<M>& state, Observer&& observer) {
  using Point = typename M::Point;
  using Scalar = typename M::Scalar;
  const Scalar mu = state.mu;
  if (!(mu > 0)) throw std::invalid_argument("alm_iterate: mu must be positive");

  StateOf<M> next;
  next.mu = mu;
  next.k = state.k + 1;

  Point candidate = model.solve_x_subproblem(state.y, state.lambda, mu);
  bool skip = detail::run_skip_test(model, candidate, state.y, state.lambda, mu);
  if constexpr (requires { model.accept_skip(state.y); }) {
    if (skip && !model.accept_skip(state.y)) {
      skip = false;
      next.skip_vetoed_last = true;
    }
  }
  next.x = skip ? state.y : candidate;
  next.skipped_last = skip;
  next.k_n = state.k_n + (skip ? 0 : 1);

  const Scalar fx = model.f_value(next.x);
  if (!std::isfinite(fx) || !std::isfinite(model.g_value(next.x))) {
    std::ostringstream msg;
    msg << "alm_iterate: non-finite objective at iteration " << next.k;
    throw DivergenceError(msg.str(), next.k, static_cast<double>(mu));
  }

  const Point grad = model.f_grad(next.x);
  const Point v = next.x - mu * grad;
  next.y = model.prox_g(v, mu);
  if constexpr (requires { model.multiplier(v, next.y, mu); }) {
    next.lambda = model.multiplier(v, next.y, mu);
  } else {
    next.lambda = grad - (next.x - next.y) / mu;
  }

  if (!detail::point_is_finite(next.y) || !detail::point_is_finite(next.lambda)) {
    std::ostringstream msg;
    msg << "alm_iterate: non-finite iterate at iteration " << next.k;
    throw DivergenceError(msg.str(), next.k, static_cast<double>(mu));
  }

  observer(state, candidate, next);
  return next;
}

template <CompositeObjective M>
StateOf<M> alm_iterate(const M& model, const StateOf<M>& state) {
  return alm_iterate(model, state, [](const auto&, const auto&, const auto&) {});
}

/// Worst-case gap |x0 - x*|^2 / (2 mu (k + k_n)) after k iterations, k_n of
/// them unskipped.
inline double complexity_bound(long k, long k_n, double mu, double dist0_sq) {
  if (k < 1 || k_n < 0 || k_n > k) throw std::invalid_argument("complexity_bound: need 0 <= k_n <= k, k >= 1");
  if (!(mu > 0)) throw std::invalid_argument("complexity_bound: mu must be positive");
  return dist0_sq / (2.0 * mu * static_cast<double>(k + k_n));
}

template <typename Scalar>
struct TraceRecord {
  long iteration = 0;
  Scalar F_x = 0;
  Scalar F_y = 0;
  Scalar mu = 0;
  bool skipped = false;
};

enum class RunStatus { terminated, max_iterations };

template <typename Point, typename Scalar>
struct AlmRun {
  AlmState<Point, Scalar> state;
  std::vector<TraceRecord<Scalar>> trace;
  RunStatus status = RunStatus::terminated;
};

/// Drives alm_iterate until `done(state)` holds or `max_iter` iterations.
/// `mu_schedule(k)` supplies the mu used by iteration k+1; values must be
/// positive and nonincreasing. Each record is also handed to `sink`.
template <CompositeObjective M, typename Schedule, typename Done, typename Sink>
AlmRun<typename M::Point, typename M::Scalar> run_alm(const M& model, typename M::Point x0,
                                                      Schedule&& mu_schedule, Done&& done,
                                                      long max_iter, Sink&& sink) {
  using Scalar = typename M::Scalar;
  AlmRun<typename M::Point, Scalar> run;
  run.state = initial_state(model, std::move(x0), static_cast<Scalar>(mu_schedule(0L)));
  Scalar prev_mu = run.state.mu;
  while (!done(run.state)) {
    if (run.state.k >= max_iter) {
      run.status = RunStatus::max_iterations;
      return run;
    }
    const Scalar mu = static_cast<Scalar>(mu_schedule(run.state.k));
    if (!(mu > 0) || mu > prev_mu) {
      throw std::invalid_argument("run_alm: mu schedule must be positive and nonincreasing");
    }
    prev_mu = mu;
    run.state.mu = mu;
    run.state = alm_iterate(model, run.state);
    TraceRecord<Scalar> rec{run.state.k, objective(model, run.state.x),
                            objective(model, run.state.y), mu, run.state.skipped_last};
    sink(rec);
    run.trace.push_back(rec);
  }
  run.status = RunStatus::terminated;
  return run;
}

template <CompositeObjective M, typename Schedule, typename Done>
AlmRun<typename M::Point, typename M::Scalar> run_alm(const M& model, typename M::Point x0,
                                                      Schedule&& mu_schedule, Done&& done,
                                                      long max_iter) {
  return run_alm(model, std::move(x0), std::forward<Schedule>(mu_schedule),
                 std::forward<Done>(done), max_iter, [](const auto&) {});
}

}  // namespace almsics::alm
