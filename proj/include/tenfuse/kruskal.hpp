#pragma once

#include <vector>

#include "tenfuse/tensor.hpp"

namespace tenfuse {

/// CP decomposition in Kruskal form: per-component weights plus factor
/// matrices whose columns are unit norm after normalize().
struct KruskalModel {
  Vector weights;  // lambda, length R
  Matrix A, B, C;  // I x R, J x R, K x R

  int rank() const { return static_cast<int>(weights.size()); }
};

/// Coupled tensor-matrix decomposition: the tensor part is a Kruskal model
/// with weights lambda, the matrix part shares the first-mode factor A and
/// adds weights sigma and a factor V, Y ~ A * diag(sigma) * V^T.
struct CoupledModel {
  Vector tensor_weights;  // lambda
  Vector matrix_weights;  // sigma
  Matrix A, B, C, V;

  int rank() const { return static_cast<int>(tensor_weights.size()); }
  KruskalModel tensor_part() const { return {tensor_weights, A, B, C}; }
};

/// Entry (i,j,k) = sum_r lambda_r A(i,r) B(j,r) C(k,r).
DenseTensor3 reconstruct_tensor(const KruskalModel& m);
DenseTensor3 reconstruct_tensor(const CoupledModel& m);

/// A * diag(sigma) * V^T.
Matrix reconstruct_matrix(const CoupledModel& m);

/// Scales every factor column to unit 2-norm, folding the absorbed scales
/// into the weights (for the shared factor A of a coupled model, into both
/// lambda and sigma).  Sign convention: the largest-magnitude entry of each
/// column of A is made positive, with the compensating flip applied to the
/// last factor of each dataset (C, and V for coupled models), so the
/// reconstruction is unchanged.
///
/// Throws on an exactly zero factor column, naming the mode and component.
KruskalModel normalize(KruskalModel m);
CoupledModel normalize(CoupledModel m);

struct FmsResult {
  double score = 0.0;              // min over components of the matched congruence
  std::vector<int> permutation;    // permutation[r] = column of m2 matched to m1's r
};

/// Factor match score: after greedy best-match column pairing, the minimum
/// over components of the product over modes of |cos| between matched
/// columns.  1.0 iff the models agree up to permutation, sign and scale.
FmsResult factor_match_score(const KruskalModel& m1, const KruskalModel& m2);
FmsResult factor_match_score(const CoupledModel& m1, const CoupledModel& m2);

/// Max over component pairs r != s of
/// |cos(a_r,a_s) * cos(b_r,b_s) * cos(c_r,c_s)|.  Values near 1 indicate a
/// degenerate (nearly collinear, cancelling) pair of components.
double congruence_check(const KruskalModel& m);

/// Congruence above which fits carry a degeneracy warning.
inline constexpr double kDegeneracyCongruenceThreshold = 0.97;

}  // namespace tenfuse
