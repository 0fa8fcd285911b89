#include "tenfuse/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tenfuse {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::rel_f_tol: return "rel_f_tol";
    case Termination::grad_tol: return "grad_tol";
    case Termination::max_iterations: return "max_iterations";
    case Termination::line_search_failure: return "line_search_failure";
  }
  return "unknown";
}

namespace {

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  double f = 0.0;  // f and g at x + alpha * d when ok
};

// Cubic minimizer of the interpolant through (a, fa, da) and (b, fb, db).
// Returns NaN when the interpolation degenerates; the caller bisects.
double cubic_minimizer(double a, double fa, double da, double b, double fb,
                       double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (db + d2 - d1) / denom;
}

// Strong Wolfe line search (bracket + zoom with cubic interpolation).
// Shares the caller's trial budget and best-point tracking via references:
// every evaluation updates (best_f, best_x) so a failed search still
// surrenders the best point visited.
class WolfeSearch {
 public:
  WolfeSearch(const ObjectiveFunction& fn, const Vector& x, const Vector& d,
              double f0, double dphi0, const LineSearchConfig& cfg,
              long& eval_count, double& best_f, Vector& best_x, Vector& x_out,
              Vector& g_out)
      : fn_(fn), x_(x), d_(d), f0_(f0), dphi0_(dphi0), cfg_(cfg),
        eval_count_(eval_count), best_f_(best_f), best_x_(best_x),
        x_out_(x_out), g_out_(g_out) {}

  LineSearchResult run(double alpha_init) {
    double alpha_prev = 0.0, f_prev = f0_, dphi_prev = dphi0_;
    double alpha = alpha_init;
    for (int trial = 0; trials_ < cfg_.max_trials; ++trial) {
      double f, dphi;
      evaluate(alpha, f, dphi);
      if (!std::isfinite(f) ||
          f > f0_ + cfg_.c1 * alpha * dphi0_ || (trial > 0 && f >= f_prev))
        return zoom(alpha_prev, f_prev, dphi_prev, alpha, f, dphi);
      if (std::abs(dphi) <= -cfg_.c2 * dphi0_)
        return accept(alpha, f);
      if (dphi >= 0.0)
        return zoom(alpha, f, dphi, alpha_prev, f_prev, dphi_prev);
      alpha_prev = alpha;
      f_prev = f;
      dphi_prev = dphi;
      alpha *= 2.0;
      if (!(alpha < kAlphaMax)) break;
    }
    return {};
  }

 private:
  static constexpr double kAlphaMax = 1e20;

  void evaluate(double alpha, double& f, double& dphi) {
    x_out_ = x_ + alpha * d_;
    f = fn_(x_out_, g_out_);
    dphi = g_out_.dot(d_);
    ++eval_count_;
    ++trials_;
    if (std::isfinite(f) && f < best_f_) {
      best_f_ = f;
      best_x_ = x_out_;
    }
  }

  LineSearchResult accept(double alpha, double f) {
    // x_out_/g_out_ already hold the accepted point.
    return {true, alpha, f};
  }

  LineSearchResult zoom(double lo, double f_lo, double dphi_lo, double hi,
                        double f_hi, double dphi_hi) {
    while (trials_ < cfg_.max_trials) {
      const double left = std::min(lo, hi), right = std::max(lo, hi);
      const double width = right - left;
      if (width <= 0.0) break;
      double alpha = cubic_minimizer(lo, f_lo, dphi_lo, hi, f_hi, dphi_hi);
      if (!std::isfinite(alpha) || alpha <= left + 0.05 * width ||
          alpha >= right - 0.05 * width)
        alpha = 0.5 * (lo + hi);
      double f, dphi;
      evaluate(alpha, f, dphi);
      if (!std::isfinite(f) || f > f0_ + cfg_.c1 * alpha * dphi0_ ||
          f >= f_lo) {
        hi = alpha;
        f_hi = f;
        dphi_hi = dphi;
      } else {
        if (std::abs(dphi) <= -cfg_.c2 * dphi0_) return accept(alpha, f);
        if (dphi * (hi - lo) >= 0.0) {
          hi = lo;
          f_hi = f_lo;
          dphi_hi = dphi_lo;
        }
        lo = alpha;
        f_lo = f;
        dphi_lo = dphi;
      }
    }
    return {};
  }

  const ObjectiveFunction& fn_;
  const Vector& x_;
  const Vector& d_;
  double f0_, dphi0_;
  const LineSearchConfig& cfg_;
  long& eval_count_;
  double& best_f_;
  Vector& best_x_;
  Vector& x_out_;
  Vector& g_out_;
  int trials_ = 0;
};

}  // namespace

namespace detail {

bool update_direction(const Vector& g, const Vector& g_prev, Vector& d) {
  const double beta = std::max(0.0, g.dot(g - g_prev) / g_prev.squaredNorm());
  d = -g + beta * d;
  if (g.dot(d) >= -1e-12 * g.norm() * d.norm()) {
    d = -g;
    return true;
  }
  return false;
}

}  // namespace detail

OptimizeOutcome minimize(const ObjectiveFunction& fn, Vector x0,
                         const OptimizerConfig& cfg) {
  if (!(cfg.line_search.c1 > 0.0 && cfg.line_search.c1 < cfg.line_search.c2 &&
        cfg.line_search.c2 < 1.0))
    throw std::invalid_argument("minimize: need 0 < c1 < c2 < 1");
  if (cfg.rel_f_tol <= 0.0 || cfg.grad_tol <= 0.0)
    throw std::invalid_argument("minimize: tolerances must be positive");

  const Eigen::Index n = x0.size();
  OptimizeOutcome out;
  out.final_point = std::move(x0);
  Vector g(n);
  double f = fn(out.final_point, g);
  out.function_evaluations = 1;
  out.f_trace.push_back(f);
  out.final_f = f;

  double best_f = f;
  Vector best_x = out.final_point;

  if (g.norm() / (1.0 + std::abs(f)) <= cfg.grad_tol) {
    out.termination = Termination::grad_tol;
    return out;
  }

  Vector d = -g;
  Vector g_prev(n), x_trial(n), g_trial(n);
  double f_prev_accepted = f;
  double alpha_prev = 0.0;
  int iters_since_restart = 0;

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    const double dphi0 = g.dot(d);
    double alpha_init;
    if (alpha_prev == 0.0) {
      alpha_init = std::min(1.0, 1.0 / (1.0 + g.norm()));
    } else {
      // Assume first-order change comparable to the previous iteration.
      alpha_init = 2.02 * (f - f_prev_accepted) / dphi0;
      if (!(alpha_init > 0.0) || !std::isfinite(alpha_init)) alpha_init = alpha_prev;
      alpha_init = std::clamp(alpha_init, 1e-12 * alpha_prev, 1e4 * alpha_prev);
    }

    WolfeSearch search(fn, out.final_point, d, f, dphi0, cfg.line_search,
                       out.function_evaluations, best_f, best_x, x_trial,
                       g_trial);
    const LineSearchResult ls = search.run(alpha_init);
    if (!ls.ok) {
      out.termination = Termination::line_search_failure;
      out.iterations = iter - 1;
      if (best_f < out.final_f) {
        out.final_f = best_f;
        out.final_point = best_x;
        out.f_trace.push_back(best_f);
      }
      return out;
    }

    f_prev_accepted = f;
    g_prev.swap(g);
    f = ls.f;
    out.final_point.swap(x_trial);
    g.swap(g_trial);
    alpha_prev = ls.alpha;
    out.f_trace.push_back(f);
    out.final_f = f;
    out.iterations = iter;
    ++iters_since_restart;

    if (std::abs(f_prev_accepted - f) / (1.0 + std::abs(f_prev_accepted)) <=
        cfg.rel_f_tol) {
      out.termination = Termination::rel_f_tol;
      return out;
    }
    if (g.norm() / (1.0 + std::abs(f)) <= cfg.grad_tol) {
      out.termination = Termination::grad_tol;
      return out;
    }

    if (iters_since_restart >= n) {
      d = -g;
      ++out.scheduled_restarts;
      iters_since_restart = 0;
      continue;
    }
    if (detail::update_direction(g, g_prev, d)) {
      ++out.descent_restarts;
      iters_since_restart = 0;
    }
  }

  out.termination = Termination::max_iterations;
  return out;
}

}  // namespace tenfuse
