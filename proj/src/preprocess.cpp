#include "tenfuse/preprocess.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tenfuse {

const char* to_string(PreprocessOp op) {
  switch (op) {
    case PreprocessOp::center_fibers: return "center_fibers";
    case PreprocessOp::scale_slices: return "scale_slices";
    case PreprocessOp::center_rows: return "center_rows";
    case PreprocessOp::scale_rows: return "scale_rows";
  }
  return "unknown";
}

namespace {

// Sample standard deviation (mean subtracted, denominator n - 1).
double sample_std(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double mean = v.mean();
  const double ss = (v.array() - mean).square().sum();
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

// A mode-m fiber is a column of the mode-m unfolding and a slice orthogonal
// to mode m is one of its rows, so both tensor ops work on the unfolding and
// fold back.

std::pair<DenseTensor3, PreprocessRecord> center_tensor_across_mode(
    const DenseTensor3& t, int mode) {
  if (t.extent(mode) < 2)
    throw std::domain_error(
        "center_tensor_across_mode: mode " + std::to_string(mode) +
        " has extent 1, nothing to center across");
  Matrix u = unfold(t, mode);
  PreprocessStep step{PreprocessOp::center_fibers, mode, {}};
  step.values.resize(static_cast<std::size_t>(u.cols()));
  for (Eigen::Index f = 0; f < u.cols(); ++f) {
    const double mean = u.col(f).mean();
    step.values[static_cast<std::size_t>(f)] = mean;
    u.col(f).array() -= mean;
  }
  return {fold(u, mode, t.dims()), PreprocessRecord{{std::move(step)}}};
}

std::pair<DenseTensor3, PreprocessRecord> scale_tensor_within_mode(
    const DenseTensor3& t, int mode) {
  Matrix u = unfold(t, mode);
  if (u.cols() < 2)
    throw std::domain_error(
        "scale_tensor_within_mode: slices have a single entry");
  PreprocessStep step{PreprocessOp::scale_slices, mode, {}};
  step.values.resize(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index s = 0; s < u.rows(); ++s) {
    const double sd = sample_std(u.row(s));
    if (sd == 0.0)
      throw std::domain_error("scale_tensor_within_mode: slice " +
                              std::to_string(s) + " of mode " +
                              std::to_string(mode) + " has zero variance");
    step.values[static_cast<std::size_t>(s)] = sd;
    u.row(s) /= sd;
  }
  return {fold(u, mode, t.dims()), PreprocessRecord{{std::move(step)}}};
}

std::pair<Matrix, PreprocessRecord> center_and_scale_matrix_rows(
    const Matrix& y) {
  if (y.cols() < 2)
    throw std::domain_error(
        "center_and_scale_matrix_rows: rows need at least 2 entries");
  Matrix out = y;
  PreprocessStep center{PreprocessOp::center_rows, 0, {}};
  PreprocessStep scale{PreprocessOp::scale_rows, 0, {}};
  center.values.resize(static_cast<std::size_t>(y.rows()));
  scale.values.resize(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double mean = out.row(i).mean();
    out.row(i).array() -= mean;
    const double sd = sample_std(out.row(i));
    if (sd == 0.0)
      throw std::domain_error("center_and_scale_matrix_rows: row " +
                              std::to_string(i) + " is constant");
    out.row(i) /= sd;
    center.values[static_cast<std::size_t>(i)] = mean;
    scale.values[static_cast<std::size_t>(i)] = sd;
  }
  return {std::move(out),
          PreprocessRecord{{std::move(center), std::move(scale)}}};
}

DenseTensor3 undo(const DenseTensor3& t, const PreprocessRecord& record) {
  DenseTensor3 out = t;
  for (auto it = record.steps.rbegin(); it != record.steps.rend(); ++it) {
    const PreprocessStep& step = *it;
    if (step.op != PreprocessOp::center_fibers &&
        step.op != PreprocessOp::scale_slices)
      throw std::invalid_argument("undo: record contains a matrix operation");
    Matrix u = unfold(out, step.mode);
    if (step.op == PreprocessOp::center_fibers) {
      if (static_cast<Eigen::Index>(step.values.size()) != u.cols())
        throw std::invalid_argument("undo: offset count mismatch");
      for (Eigen::Index f = 0; f < u.cols(); ++f)
        u.col(f).array() += step.values[static_cast<std::size_t>(f)];
    } else {
      if (static_cast<Eigen::Index>(step.values.size()) != u.rows())
        throw std::invalid_argument("undo: scale count mismatch");
      for (Eigen::Index s = 0; s < u.rows(); ++s)
        u.row(s) *= step.values[static_cast<std::size_t>(s)];
    }
    out = fold(u, step.mode, out.dims());
  }
  return out;
}

Matrix undo(const Matrix& y, const PreprocessRecord& record) {
  Matrix out = y;
  for (auto it = record.steps.rbegin(); it != record.steps.rend(); ++it) {
    const PreprocessStep& step = *it;
    if (static_cast<Eigen::Index>(step.values.size()) != out.rows())
      throw std::invalid_argument("undo: row count mismatch");
    switch (step.op) {
      case PreprocessOp::center_rows:
        for (Eigen::Index i = 0; i < out.rows(); ++i)
          out.row(i).array() += step.values[static_cast<std::size_t>(i)];
        break;
      case PreprocessOp::scale_rows:
        for (Eigen::Index i = 0; i < out.rows(); ++i)
          out.row(i) *= step.values[static_cast<std::size_t>(i)];
        break;
      default:
        throw std::invalid_argument("undo: record contains a tensor operation");
    }
  }
  return out;
}

}  // namespace tenfuse
