#include <doctest.h>

#include <cmath>

#include "tenfuse/optimizer.hpp"
#include "test_support.hpp"

using namespace tenfuse;

namespace {

double quadratic(const Vector& x, Vector& g) {
  g = 2.0 * x;
  return x.squaredNorm();
}

double rosenbrock(const Vector& x, Vector& g) {
  const double a = x(1) - x(0) * x(0);
  const double b = 1.0 - x(0);
  g(0) = -400.0 * x(0) * a - 2.0 * b;
  g(1) = 200.0 * a;
  return 100.0 * a * a + b * b;
}

bool non_increasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] > trace[i - 1]) return false;
  return true;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("quadratic bowl reaches the minimum in a few iterations") {
  Vector x0 = test_support::random_matrix(20, 1, 3).col(0);
  const OptimizeOutcome out = minimize(quadratic, x0, OptimizerConfig{});
  CHECK(out.final_f <= 1e-16 * (1.0 + x0.squaredNorm()));
  CHECK(out.iterations <= 60);
  CHECK(non_increasing(out.f_trace));
  CHECK((out.termination == Termination::rel_f_tol ||
         out.termination == Termination::grad_tol));
}

TEST_CASE("Rosenbrock from the classic start") {
  Vector x0(2);
  x0 << -1.2, 1.0;
  OptimizerConfig cfg;
  cfg.rel_f_tol = 1e-16;  // push close to the minimizer
  const OptimizeOutcome out = minimize(rosenbrock, x0, cfg);
  CHECK(out.final_f <= 1e-12);
  CHECK(out.iterations <= 10000);
  CHECK(out.final_point(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(out.final_point(1) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(non_increasing(out.f_trace));
}

TEST_CASE("a stationary start terminates at iteration 0 via grad_tol") {
  Vector x0 = Vector::Zero(5);
  const OptimizeOutcome out = minimize(quadratic, x0, OptimizerConfig{});
  CHECK(out.iterations == 0);
  CHECK(out.termination == Termination::grad_tol);
  CHECK(out.final_f == 0.0);
}

TEST_CASE("identical inputs give bit-identical outcomes") {
  Vector x0(2);
  x0 << -1.2, 1.0;
  const OptimizeOutcome a = minimize(rosenbrock, x0, OptimizerConfig{});
  const OptimizeOutcome b = minimize(rosenbrock, x0, OptimizerConfig{});
  CHECK(a.final_f == b.final_f);
  CHECK(a.iterations == b.iterations);
  CHECK(a.final_point == b.final_point);
  CHECK(a.f_trace == b.f_trace);
}

TEST_CASE("a linear objective ends in a soft line-search failure") {
  const auto linear = [](const Vector& x, Vector& g) {
    g.setConstant(1.0);
    return x.sum();
  };
  Vector x0 = Vector::Ones(3);
  const OptimizeOutcome out = minimize(linear, x0, OptimizerConfig{});
  CHECK(out.termination == Termination::line_search_failure);
  CHECK(out.final_f < x0.sum());  // surrendered the best point visited
  CHECK(non_increasing(out.f_trace));
}

TEST_CASE("PR+ fallback engages on a non-descent update") {
  Vector g_prev(2), g(2), d(2);
  g_prev << 1.0, 0.0;
  d << -1.0, 0.0;  // previous direction, descent for g_prev
  g << -1.0, 3.0;  // beta = 11, update gives an ascent direction
  CHECK(detail::update_direction(g, g_prev, d));
  CHECK(d == -g);

  // A well-behaved update is left alone.
  g_prev << 1.0, 1.0;
  d << -1.0, -1.0;
  g << 0.5, 0.5;
  CHECK_FALSE(detail::update_direction(g, g_prev, d));
  CHECK(g.dot(d) < 0.0);
}

TEST_CASE("configuration is validated") {
  OptimizerConfig bad;
  bad.line_search.c2 = 1e-5;  // c2 < c1
  CHECK_THROWS_AS(minimize(quadratic, Vector::Ones(2), bad),
                  std::invalid_argument);
  OptimizerConfig bad_tol;
  bad_tol.rel_f_tol = 0.0;
  CHECK_THROWS_AS(minimize(quadratic, Vector::Ones(2), bad_tol),
                  std::invalid_argument);
}

}  // TEST_SUITE
