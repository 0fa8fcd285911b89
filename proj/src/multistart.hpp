#pragma once

// Internal multi-start driver shared by fit_cp and fit_acmtf.  Starts are
// independent and deterministic given (seed, start index); workers may run
// them in parallel, but results are aggregated in start-index order so the
// report does not depend on scheduling.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "tenfuse/fit_report.hpp"
#include "tenfuse/optimizer.hpp"

namespace tenfuse::detail {

struct MultistartParams {
  int n_starts = 1;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer{};
  double uniqueness_fms_threshold = 0.95;
  int n_threads = 0;  // 0 = hardware concurrency
};

/// Runs `n_starts` minimizations and fills the start/cluster sections of a
/// FitReport.  `make_objective()` must return a fresh evaluator (workspaces
/// are per-thread); `make_init(s)` the start-s initial point; `to_model(x)`
/// reshapes a parameter vector into a model; `fms(a, b)` scores two models.
/// Returns the index of the best start; `models[best]` is its (unnormalized)
/// model.  Throws FitError when no start converged.
template <typename Model, typename MakeObjective, typename MakeInit,
          typename ToModel, typename FmsFn>
int run_multistart(const MultistartParams& params, MakeObjective make_objective,
                   MakeInit make_init, ToModel to_model, FmsFn fms,
                   std::vector<Model>& models, FitReport& report) {
  const int n = params.n_starts;
  std::vector<OptimizeOutcome> outcomes(n);

  int n_threads = params.n_threads > 0
                      ? params.n_threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  if (n_threads > n) n_threads = n;

  std::atomic<int> next{0};
  std::exception_ptr worker_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    try {
      auto objective = make_objective();
      for (int s = next.fetch_add(1); s < n; s = next.fetch_add(1))
        outcomes[s] = minimize(objective, make_init(s), params.optimizer);
    } catch (...) {
      std::scoped_lock lock(error_mutex);
      if (!worker_error) worker_error = std::current_exception();
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (worker_error) std::rethrow_exception(worker_error);

  report.starts.clear();
  report.starts.reserve(n);
  int best = 0;
  bool any_converged = false;
  for (int s = 0; s < n; ++s) {
    const auto& o = outcomes[s];
    StartOutcome so;
    so.index = s;
    so.objective = o.final_f;
    so.iterations = o.iterations;
    so.termination = o.termination;
    so.converged = o.termination == Termination::rel_f_tol ||
                   o.termination == Termination::grad_tol;
    any_converged = any_converged || so.converged;
    report.starts.push_back(so);
    if (o.final_f < outcomes[best].final_f) best = s;
  }
  report.best_start = best;
  report.best_objective = outcomes[best].final_f;
  report.uniqueness_threshold = params.uniqueness_fms_threshold;

  if (!any_converged)
    throw FitError("fit failed: no start converged", report);

  models.clear();
  models.reserve(n);
  for (int s = 0; s < n; ++s) models.push_back(to_model(outcomes[s].final_point));

  // Cross-restart uniqueness: FMS of the best model against every other
  // converged start within 1% of the best objective.
  double min_fms = std::numeric_limits<double>::quiet_NaN();
  for (int s = 0; s < n; ++s) {
    auto& so = report.starts[s];
    so.in_best_cluster =
        so.converged && so.objective <= 1.01 * report.best_objective;
    if (!so.in_best_cluster || s == best) continue;
    so.fms_vs_best = fms(models[best], models[s]);
    if (std::isnan(min_fms) || so.fms_vs_best < min_fms) min_fms = so.fms_vs_best;
  }
  report.min_cluster_fms = min_fms;
  report.uniqueness_ok =
      std::isnan(min_fms) || min_fms >= params.uniqueness_fms_threshold;
  return best;
}

}  // namespace tenfuse::detail
