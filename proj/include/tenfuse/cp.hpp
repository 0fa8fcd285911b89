#pragma once

#include <cstdint>
#include <utility>

#include "tenfuse/fit_report.hpp"
#include "tenfuse/kruskal.hpp"
#include "tenfuse/optimizer.hpp"
#include "tenfuse/tensor.hpp"

namespace tenfuse {

struct CpConfig {
  int rank = 3;
  int n_starts = 32;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer{};
  double uniqueness_fms_threshold = 0.95;
  int n_threads = 0;  // 0 = hardware concurrency; starts are scheduling-independent
};

struct CpGradient {
  Matrix A, B, C;
};

/// ||X - [[A, B, C]]||^2 over unnormalized factors; weights are extracted by
/// normalize() at reporting time.
double cp_objective(const DenseTensor3& x, const Matrix& A, const Matrix& B,
                    const Matrix& C);

/// dF/dA = 2 (A ((B'B) .* (C'C)) - mttkrp(X, B, C, 1)) and cyclic analogues.
CpGradient cp_gradient(const DenseTensor3& x, const Matrix& A, const Matrix& B,
                       const Matrix& C);

/// Multi-start nonlinear-CG fit of an R-component CP model.  Each start is
/// deterministic given (seed, start index); the returned model is the
/// normalized minimum-objective start.  Throws FitError when no start
/// converged.
std::pair<KruskalModel, FitReport> fit_cp(const DenseTensor3& x,
                                          const CpConfig& cfg);

}  // namespace tenfuse
