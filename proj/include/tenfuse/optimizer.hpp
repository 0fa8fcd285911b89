#pragma once

#include <functional>
#include <vector>

#include "tenfuse/tensor.hpp"

namespace tenfuse {

struct LineSearchConfig {
  double c1 = 1e-4;    // sufficient-decrease slope
  double c2 = 0.1;     // curvature slope, 0 < c1 < c2 < 1
  int max_trials = 50; // function evaluations per search
};

enum class CgUpdate { polak_ribiere_plus };

struct OptimizerConfig {
  int max_iterations = 10000;
  double rel_f_tol = 1e-10;  // stop when |f_prev - f| / (1 + |f_prev|) below
  double grad_tol = 1e-9;    // stop when ||g|| / (1 + |f|) below
  LineSearchConfig line_search{};
  CgUpdate cg_update = CgUpdate::polak_ribiere_plus;
};

enum class Termination {
  rel_f_tol,
  grad_tol,
  max_iterations,
  line_search_failure
};

const char* to_string(Termination t);

struct OptimizeOutcome {
  Vector final_point;
  double final_f = 0.0;
  int iterations = 0;
  Termination termination = Termination::max_iterations;
  std::vector<double> f_trace;  // f0 then every accepted iterate; non-increasing
  int descent_restarts = 0;     // PR+ direction failed the descent test
  int scheduled_restarts = 0;   // periodic steepest-descent restarts
  long function_evaluations = 0;
};

/// Objective callback: returns f(x) and writes the gradient into `grad`
/// (already sized to x).  Must be deterministic.
using ObjectiveFunction = std::function<double(const Vector& x, Vector& grad)>;

namespace detail {
/// In-place PR+ update of the conjugate direction: d <- -g + beta+ * d.
/// Falls back to steepest descent (and returns true) when the updated
/// direction fails the descent test g.d >= -1e-12 ||g|| ||d||.
bool update_direction(const Vector& g, const Vector& g_prev, Vector& d);
}  // namespace detail

/// Minimizes f with Polak-Ribiere+ nonlinear conjugate gradient under a
/// strong Wolfe line search.  The direction is reset to steepest descent
/// whenever the PR+ direction fails the descent test
/// (g.d >= -1e-12 ||g|| ||d||) and on a periodic schedule of every
/// n-parameters iterations.  Line-search failure is a soft termination that
/// returns the best point seen.
OptimizeOutcome minimize(const ObjectiveFunction& f, Vector x0,
                         const OptimizerConfig& cfg);

}  // namespace tenfuse
