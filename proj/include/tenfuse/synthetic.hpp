#pragma once

#include <cstdint>
#include <vector>

#include "tenfuse/kruskal.hpp"
#include "tenfuse/stats.hpp"
#include "tenfuse/tensor.hpp"

namespace tenfuse {

/// Per-component ground-truth structure.  A component absent from one
/// dataset must carry weight exactly 0 there.
struct ComponentSpec {
  bool in_tensor = true;
  bool in_matrix = true;
  double lambda = 1.0;       // planted tensor weight (0 when !in_tensor)
  double sigma = 1.0;        // planted matrix weight (0 when !in_matrix)
  double group_shift = 0.0;  // additive shift on group-1 subject loadings
};

struct SynthSpec {
  int subjects = 0, time_samples = 0, electrodes = 0, voxels = 0;  // I, J, K, M
  int rank = 0;
  std::vector<ComponentSpec> components;  // one per component
  double noise_tensor = 0.0;  // relative Frobenius noise on X
  double noise_matrix = 0.0;  // relative Frobenius noise on Y
  int n_group0 = 0;           // subjects 0 .. n_group0-1 are group 0
  bool smooth_time = true;    // draw time-mode columns as random smooth curves
  std::uint64_t seed = 0;
};

/// Throws unless the spec is internally consistent (extents, rank, weight /
/// membership agreement, nonempty groups, at least one component per
/// dataset, nonnegative noise).
void validate(const SynthSpec& spec);

struct SynthData {
  DenseTensor3 tensor;
  Matrix matrix;
  CoupledModel truth;  // normalized; weights fold in the raw column scales
  GroupLabels labels;
};

/// Deterministic ground-truth generator:
///   X = [[lambda; A, B, C]] + eta_x ||signal|| N / ||N||,
///   Y = A diag(sigma) V' + analogous noise,
/// with A drawn i.i.d. Gaussian plus the per-component group shift on
/// group-1 subjects, B smooth random curves (or Gaussian), C and V Gaussian,
/// and all factor columns normalized with the scales folded into the
/// weights before reconstruction.
SynthData generate(const SynthSpec& spec);

/// Desk-scale preset shaped like the paper's Case 2 data: a 38 x 451 x 11
/// tensor coupled with a 38 x 600 matrix (the voxels mode is downscaled
/// from the original 60186 to keep runtimes small; the math is
/// dimension-generic), R = 3 all-shared components, a group effect of 1.5
/// on component 1, 20% noise, groups of 22 and 16 subjects.
SynthSpec paper_shaped_preset();

}  // namespace tenfuse
