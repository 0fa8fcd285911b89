#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tenfuse/fit_report.hpp"
#include "tenfuse/kruskal.hpp"
#include "tenfuse/optimizer.hpp"
#include "tenfuse/tensor.hpp"

namespace tenfuse {

struct AcmtfConfig {
  int rank = 10;
  double beta = 1e-3;       // 1-norm penalty on the component weights
  double gamma = 1.0;       // quadratic penalty enforcing unit-norm columns
  double l1_epsilon = 1e-8; // smoothing: |w| -> sqrt(w^2 + eps)
  int n_starts = 32;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer{};
  double share_threshold = 0.05;  // relative weight below which a component
                                  // is absent from a dataset
  double uniqueness_fms_threshold = 0.95;
  int n_threads = 0;
};

/// The structure-revealing coupled objective over CoupledModel-shaped
/// variables (lambda, sigma, A, B, C, V):
///   ||X - [[lambda; A,B,C]]||^2 + ||Y - A diag(sigma) V'||^2
///   + beta * sum_r sqrt(lambda_r^2 + eps) + beta * sum_r sqrt(sigma_r^2 + eps)
///   + gamma * sum over factor columns of (||col|| - 1)^2
/// The smoothed 1-norm keeps the objective differentiable; the quadratic
/// penalty stands in for the unit-norm constraints during optimization.
double acmtf_objective(const DenseTensor3& x, const Matrix& y,
                       const CoupledModel& vars, const AcmtfConfig& cfg);

/// Exact analytic gradient of acmtf_objective, returned in the same shape as
/// the variables.  A receives contributions from both residual terms.
CoupledModel acmtf_gradient(const DenseTensor3& x, const Matrix& y,
                            const CoupledModel& vars, const AcmtfConfig& cfg);

/// Multi-start nonlinear-CG fit; the returned model is normalized (the norm
/// penalty leaves columns near-unit, normalize() folds the residual scales
/// into lambda and sigma).  Throws FitError when no start converged.
std::pair<CoupledModel, FitReport> fit_acmtf(const DenseTensor3& x,
                                             const Matrix& y,
                                             const AcmtfConfig& cfg);

enum class ComponentLabel { shared, tensor_only, matrix_only, degenerate };

const char* to_string(ComponentLabel label);

/// Labels component r tensor_only when |sigma_r| / max_s |sigma_s| is below
/// the threshold, matrix_only for the analogous lambda test, degenerate when
/// both hold, shared otherwise.  Expects a normalized model.
std::vector<ComponentLabel> classify_components(const CoupledModel& m,
                                                double threshold);

}  // namespace tenfuse
