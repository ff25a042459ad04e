#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "almsics/alm.hpp"

using namespace almsics;
using Vec = Eigen::VectorXd;

namespace {

enum class GKind { zero, l1, quadratic };

// f(x) = a/2 |x - c|^2 and one of g = 0, w |x|_1, b/2 |x|^2.
struct ToyModel {
  using Point = Vec;
  using Scalar = double;

  double a = 1;
  Vec c;
  GKind kind = GKind::zero;
  double w = 0;
  double b = 0;

  double f_value(const Vec& x) const { return a / 2 * (x - c).squaredNorm(); }
  Vec f_grad(const Vec& x) const { return a * (x - c); }
  double g_value(const Vec& x) const {
    switch (kind) {
      case GKind::zero: return 0;
      case GKind::l1: return w * x.lpNorm<1>();
      case GKind::quadratic: return b / 2 * x.squaredNorm();
    }
    return 0;
  }
  Vec prox_g(const Vec& v, double mu) const {
    switch (kind) {
      case GKind::zero: return v;
      case GKind::l1: {
        const double t = mu * w;
        return v.unaryExpr([t](double z) { return std::copysign(std::max(std::abs(z) - t, 0.0), z); });
      }
      case GKind::quadratic: return v / (1 + mu * b);
    }
    return v;
  }
  Vec solve_x_subproblem(const Vec& y, const Vec& lambda, double mu) const {
    return (a * c + lambda + y / mu) / (a + 1 / mu);
  }
};

static_assert(alm::CompositeObjective<ToyModel>);

Vec v1(double x) { return Vec::Constant(1, x); }

ToyModel zero_model() {
  ToyModel m;
  m.a = 0;
  m.c = v1(0);
  return m;
}

ToyModel lasso(double c, double w = 1) {
  ToyModel m;
  m.c = v1(c);
  m.kind = GKind::l1;
  m.w = w;
  return m;
}

// x = y = y0 with the given multiplier.
alm::StateOf<ToyModel> start_at(double y, double lambda, double mu) {
  alm::StateOf<ToyModel> s;
  s.x = v1(y);
  s.y = v1(y);
  s.lambda = v1(lambda);
  s.mu = mu;
  return s;
}

double sgn(double v) { return (v > 0) - (v < 0); }

}  // namespace

TEST(AlmIterate, ZeroObjectiveIsFixedPoint) {
  const ToyModel m = zero_model();
  const auto s = alm::alm_iterate(m, start_at(5, 0, 1));
  EXPECT_DOUBLE_EQ(s.x(0), 5);
  EXPECT_DOUBLE_EQ(s.y(0), 5);
  EXPECT_DOUBLE_EQ(s.lambda(0), 0);
  EXPECT_EQ(s.k, 1);
  EXPECT_EQ(s.k_n, 1);
  EXPECT_FALSE(s.skipped_last);
}

TEST(AlmIterate, QuadraticHandExample) {
  ToyModel m;
  m.c = v1(0);
  const auto s = alm::alm_iterate(m, start_at(1, 0, 0.5));
  EXPECT_NEAR(s.x(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.y(0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.lambda(0), 0.0, 1e-15);

  // x^1 is stationary for x^2/2 + (x - 1)^2 / (2 * 0.5)
  auto phi = [](double x) { return x * x / 2 + (x - 1) * (x - 1); };
  const double h = 1e-6;
  EXPECT_NEAR((phi(s.x(0) + h) - phi(s.x(0) - h)) / (2 * h), 0.0, 1e-8);
}

TEST(AlmIterate, LassoFromThreeDoesNotSkip) {
  const ToyModel m = lasso(0);
  const auto s = alm::alm_iterate(m, start_at(3, -1, 1));
  EXPECT_FALSE(s.skipped_last);
  EXPECT_DOUBLE_EQ(s.x(0), 1.0);
}

TEST(AlmIterate, NoSkipForLargeStartsWithUnitStep) {
  // f = x^2/2, g = |x|, mu = 1 = 1/L(f), lambda^0 = -sign(y^0)
  const ToyModel m = lasso(0);
  for (double y0 = -20; y0 <= 20; y0 += 0.125) {
    if (std::abs(y0) < 1) continue;
    const auto s0 = start_at(y0, -sgn(y0), 1);
    const Vec x = m.solve_x_subproblem(s0.y, s0.lambda, 1);
    const double F = alm::objective(m, x);
    const double Q = alm::upper_model(m, x, s0.y, s0.lambda, 1.0);
    EXPECT_LE(F, Q + 1e-12) << "y0=" << y0;
    EXPECT_FALSE(alm::alm_iterate(m, s0).skipped_last) << "y0=" << y0;
  }
}

TEST(AlmIterate, SmallStartCanSkipEvenAtUnitStep) {
  // y0 = 0.1, lambda = -1: x = (y0 - 1) / 2 = -0.45, and
  // F(x) = 0.55125 > Q(x, y0) = 0.10125 + 0.1 - 0.55 + 0.15125 = -0.1975.
  const ToyModel m = lasso(0);
  const auto s0 = start_at(0.1, -1, 1);
  const Vec x = m.solve_x_subproblem(s0.y, s0.lambda, 1);
  EXPECT_NEAR(x(0), -0.45, 1e-15);
  EXPECT_NEAR(alm::objective(m, x), 0.55125, 1e-14);
  EXPECT_NEAR(alm::upper_model(m, x, s0.y, s0.lambda, 1.0), -0.1975, 1e-14);
  const auto s1 = alm::alm_iterate(m, s0);
  EXPECT_TRUE(s1.skipped_last);
  EXPECT_EQ(s1.k_n, 0);
  EXPECT_DOUBLE_EQ(s1.x(0), 0.1);
}

TEST(AlmIterate, SkipBoundaryMatchesQuadraticRoot) {
  // for y in (0, 1) and lambda = -1 the skip fires iff y^2 + 10 y - 7 < 0
  const ToyModel m = lasso(0);
  const double root = std::sqrt(32.0) - 5;
  for (double y0 : {0.05, 0.3, 0.6, root - 1e-3, root + 1e-3, 0.7, 0.9}) {
    const bool skipped = alm::alm_iterate(m, start_at(y0, -1, 1)).skipped_last;
    EXPECT_EQ(skipped, y0 < root) << "y0=" << y0;
  }
}

TEST(AlmIterate, NonFiniteObjectiveThrowsDivergence) {
  ToyModel m;
  m.c = v1(0);
  try {
    (void)alm::alm_iterate(m, start_at(std::numeric_limits<double>::infinity(), 0, 1));
    FAIL() << "no throw";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.iteration(), 1);
    EXPECT_EQ(e.mu(), 1.0);
  }
  EXPECT_THROW(alm::alm_iterate(m, start_at(1, 0, 0)), std::invalid_argument);
}

TEST(SkipCondition, Examples) {
  const ToyModel m = lasso(0);
  EXPECT_FALSE(alm::skip_condition(m, v1(2.0), v1(2.0), v1(0.3), 1.0));

  ToyModel smooth;
  smooth.c = v1(1);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N(0, 5);
  // g = 0 and lambda = -grad g = 0: Q - F = |x - y|^2 / (2 mu) >= 0
  for (int i = 0; i < 100; ++i)
    EXPECT_FALSE(alm::skip_condition(smooth, v1(N(rng)), v1(N(rng)), v1(0), 0.1 + std::abs(N(rng))));

  // g = |x|, y = 0, lambda = 1: |x| > -x + x^2 / (2 mu)
  for (double mu : {0.1, 0.75, 1.0, 2.0}) {
    for (double x : {2 * mu + 1, -0.5, -4 * mu - 1, 0.3}) {
      const double lhs = std::abs(x);
      const double rhs = -x + x * x / (2 * mu);
      EXPECT_EQ(alm::skip_condition(m, v1(x), v1(0), v1(1), mu), lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs)))
          << "mu=" << mu << " x=" << x;
    }
  }
  EXPECT_FALSE(alm::skip_condition(m, v1(5.0), v1(0), v1(1), 1.0));
  EXPECT_TRUE(alm::skip_condition(m, v1(0.5), v1(0), v1(1), 1.0));
}

TEST(RunAlm, ImmediateTerminationLeavesTraceEmpty) {
  ToyModel m;
  m.c = v1(2);
  const auto run = alm::run_alm(m, v1(7), [](long) { return 1.0; }, [](const auto&) { return true; }, 100);
  EXPECT_TRUE(run.trace.empty());
  EXPECT_EQ(run.state.k, 0);
  EXPECT_DOUBLE_EQ(run.state.x(0), 7);
  EXPECT_EQ(run.status, alm::RunStatus::terminated);
}

TEST(RunAlm, QuadraticDecreasesMonotonically) {
  ToyModel m;
  m.a = 4;
  m.c = Vec::LinSpaced(5, -2, 2);
  m.kind = GKind::quadratic;
  m.b = 1;
  // optimum of 2|x - c|^2 + |x|^2 / 2 is 4c / 5
  const Vec x_star = 4 * m.c / 5;
  const double F_star = alm::objective(m, x_star);
  const auto run =
      alm::run_alm(m, Vec::Constant(5, 3.0), [](long) { return 0.25; }, [](const auto&) { return false; }, 60);
  EXPECT_EQ(run.status, alm::RunStatus::max_iterations);
  ASSERT_EQ(run.trace.size(), 60u);
  for (size_t i = 1; i < run.trace.size(); ++i) {
    EXPECT_LE(run.trace[i].F_y, run.trace[i - 1].F_y + 1e-12);
    EXPECT_FALSE(run.trace[i].skipped);
  }
  EXPECT_NEAR(run.trace.back().F_y, F_star, 1e-10);
  EXPECT_LE((run.state.y - x_star).norm(), 1e-6);
}

TEST(RunAlm, LassoConvergesToSoftThreshold) {
  const ToyModel m = lasso(2);
  std::vector<alm::TraceRecord<double>> sunk;
  const auto run = alm::run_alm(
      m, v1(-3), [](long) { return 1.0; },
      [](const auto& s) { return s.k > 0 && std::abs(s.y(0) - s.x(0)) < 1e-12 && s.k > 5; }, 1000,
      [&](const auto& r) { sunk.push_back(r); });
  EXPECT_EQ(run.status, alm::RunStatus::terminated);
  EXPECT_NEAR(run.state.y(0), 1.0, 1e-9);
  EXPECT_EQ(sunk.size(), run.trace.size());
}

TEST(RunAlm, RejectsIncreasingSchedule) {
  ToyModel m;
  m.c = v1(0);
  EXPECT_THROW(alm::run_alm(m, v1(1), [](long k) { return 1.0 + static_cast<double>(k); },
                            [](const auto&) { return false; }, 10),
               std::invalid_argument);
  EXPECT_THROW(alm::run_alm(m, v1(1), [](long) { return 0.0; }, [](const auto&) { return false; }, 10),
               std::invalid_argument);
}

TEST(ComplexityBound, Examples) {
  EXPECT_DOUBLE_EQ(alm::complexity_bound(1, 1, 0.5, 1), 0.5);
  EXPECT_DOUBLE_EQ(alm::complexity_bound(10, 10, 1, 4), 0.1);
  EXPECT_DOUBLE_EQ(alm::complexity_bound(8, 0, 0.25, 3), 3 / (2 * 0.25 * 8));
  EXPECT_THROW(alm::complexity_bound(0, 0, 1, 1), std::invalid_argument);
  EXPECT_THROW(alm::complexity_bound(3, 4, 1, 1), std::invalid_argument);
  EXPECT_THROW(alm::complexity_bound(3, 1, 0, 1), std::invalid_argument);
}

namespace {

struct Case {
  ToyModel model;
  Vec x_star;
  Vec x0;
};

// Lasso-type instances: a/2 |x - c|^2 + w |x|_1 has x* = soft(c, w / a).
Case random_lasso(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> U(-3, 3);
  Case k;
  k.model.a = 0.5 + std::abs(U(rng));
  k.model.c = Vec::NullaryExpr(dim, [&] { return U(rng); });
  k.model.kind = GKind::l1;
  k.model.w = 0.2 + std::abs(U(rng)) / 2;
  const double t = k.model.w / k.model.a;
  k.x_star = k.model.c.unaryExpr([t](double z) { return std::copysign(std::max(std::abs(z) - t, 0.0), z); });
  k.x0 = Vec::NullaryExpr(dim, [&] { return 3 * U(rng); });
  return k;
}

}  // namespace

TEST(AlmProperties, AppendixInequalitiesAndTheoremBound) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const Case k = random_lasso(rng, 1 + trial % 4);
    const ToyModel& m = k.model;
    const double mu = 1 / m.a;
    const double F_star = alm::objective(m, k.x_star);
    const double dist0 = (k.x0 - k.x_star).squaredNorm();
    auto slack = [](double v) { return 1e-10 * std::max(1.0, std::abs(v)); };

    // lambda^0 = -(a subgradient of g at y^0)
    alm::StateOf<ToyModel> s;
    s.x = s.y = k.x0;
    s.lambda = -m.w * k.x0.unaryExpr([](double v) { return sgn(v); });
    s.mu = mu;
    double Fx_prev = alm::objective(m, s.x);
    double Fy_prev = alm::objective(m, s.y);
    for (int it = 0; it < 60; ++it) {
      const auto prev = s;
      s = alm::alm_iterate(m, prev);
      const double Fx = alm::objective(m, s.x);
      const double Fy = alm::objective(m, s.y);

      EXPECT_LE((s.lambda - (m.f_grad(s.x) - (s.x - s.y) / mu)).norm(), 1e-12);
      EXPECT_LE(s.k_n, s.k);
      EXPECT_GE(2 * mu * (Fx - Fy) + slack(Fx), (s.y - s.x).squaredNorm());
      if (!s.skipped_last) {
        EXPECT_GE(2 * mu * (Fy_prev - Fx) + slack(Fx), (s.x - prev.y).squaredNorm());
      }
      EXPECT_LE(Fy, Fy_prev + slack(Fy_prev));
      EXPECT_LE(Fx, Fx_prev + slack(Fx_prev));
      // Lemma 1 with u = x*
      EXPECT_GE(2 * mu * (F_star - Fy) + slack(F_star),
                (s.y - k.x_star).squaredNorm() - (s.x - k.x_star).squaredNorm());
      EXPECT_LE(Fy - F_star, alm::complexity_bound(s.k, s.k_n, mu, dist0) * (1 + 1e-8) + 1e-14)
          << "trial " << trial << " k " << s.k;
      Fx_prev = Fx;
      Fy_prev = Fy;
    }
    EXPECT_LE((s.y - k.x_star).norm(), 1e-6);
  }
}

TEST(AlmProperties, SmoothGNeverSkips) {
  std::mt19937_64 rng(78);
  std::uniform_real_distribution<double> U(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    ToyModel m;
    m.a = 0.1 + std::abs(U(rng));
    m.c = Vec::NullaryExpr(3, [&] { return U(rng); });
    m.kind = GKind::quadratic;
    m.b = 0.1 + std::abs(U(rng));
    const double mu = 1 / std::max(m.a, m.b);
    alm::StateOf<ToyModel> s;
    s.x = s.y = Vec::NullaryExpr(3, [&] { return U(rng); });
    s.lambda = -m.b * s.y;
    s.mu = mu;
    for (int it = 0; it < 30; ++it) {
      s = alm::alm_iterate(m, s);
      EXPECT_FALSE(s.skipped_last);
    }
    EXPECT_EQ(s.k_n, s.k);
  }
}
