#pragma once

#include <utility>
#include <vector>

#include "tenfuse/tensor.hpp"

namespace tenfuse {

enum class PreprocessOp {
  center_fibers,  // per-fiber mean subtraction along `mode`
  scale_slices,   // per-slice division by the slice standard deviation
  center_rows,    // matrix rows: mean subtraction
  scale_rows      // matrix rows: division by the row standard deviation
};

const char* to_string(PreprocessOp op);

/// One applied operation with enough data to audit and undo it.  For
/// center_fibers the values are per-fiber offsets, indexed over the two
/// surviving modes with the lower-numbered one varying fastest; for the
/// scale ops they are the per-slice (or per-row) divisors, all positive.
struct PreprocessStep {
  PreprocessOp op;
  int mode = 0;  // tensor ops only
  std::vector<double> values;
};

struct PreprocessRecord {
  std::vector<PreprocessStep> steps;

  /// Appends another record's steps (for chaining center + scale).
  PreprocessRecord& append(const PreprocessRecord& other) {
    steps.insert(steps.end(), other.steps.begin(), other.steps.end());
    return *this;
  }
};

/// Subtracts the mean of every fiber along `mode`; output fiber means are 0.
/// Throws when the mode extent is 1 (nothing to center over).
std::pair<DenseTensor3, PreprocessRecord> center_tensor_across_mode(
    const DenseTensor3& t, int mode);

/// Divides each slice orthogonal to `mode` (horizontal slice for mode 1) by
/// the sample standard deviation of its entries (mean subtracted,
/// denominator count - 1); post-scaling slice stds are 1.  Throws with the
/// slice index when a slice has zero variance.
std::pair<DenseTensor3, PreprocessRecord> scale_tensor_within_mode(
    const DenseTensor3& t, int mode);

/// Centers each row to mean 0, then divides it by its sample standard
/// deviation (computed after centering).  Throws with the row index when a
/// row is constant.
std::pair<Matrix, PreprocessRecord> center_and_scale_matrix_rows(
    const Matrix& y);

/// Exact inverse: reapplies the recorded steps in reverse.
DenseTensor3 undo(const DenseTensor3& t, const PreprocessRecord& record);
Matrix undo(const Matrix& y, const PreprocessRecord& record);

}  // namespace tenfuse
