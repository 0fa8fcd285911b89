#pragma once

#include <array>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tenfuse/optimizer.hpp"

namespace tenfuse {

struct StartOutcome {
  int index = 0;
  double objective = 0.0;
  int iterations = 0;
  Termination termination = Termination::max_iterations;
  bool converged = false;       // terminated via rel_f_tol or grad_tol
  bool in_best_cluster = false; // converged and within 1% of the best objective
  double fms_vs_best = std::numeric_limits<double>::quiet_NaN();
};

/// Multi-start fit summary: every start's outcome, the winning start, and
/// the cross-restart stability evidence (cluster FMS, congruence).
struct FitReport {
  std::vector<StartOutcome> starts;
  int best_start = -1;
  double best_objective = std::numeric_limits<double>::quiet_NaN();
  /// Objective recomputed at the returned (normalized) model; this is the
  /// value a result bundle must reproduce when reloaded.
  double model_objective = std::numeric_limits<double>::quiet_NaN();
  double congruence = 0.0;
  bool degeneracy_warning = false;
  double uniqueness_threshold = 0.95;
  /// Min FMS between the best model and other cluster members; NaN when the
  /// cluster holds only the best start.
  double min_cluster_fms = std::numeric_limits<double>::quiet_NaN();
  bool uniqueness_ok = true;
  /// ACMTF only: per-component (lambda_r, sigma_r) of the returned model.
  std::vector<std::array<double, 2>> weight_table;
};

/// Raised when no start of a multi-start fit converged.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& message, FitReport report)
      : std::runtime_error(message), report_(std::move(report)) {}
  const FitReport& report() const { return report_; }

 private:
  FitReport report_;
};

}  // namespace tenfuse
