#include "tenfuse/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace tenfuse {

DenseTensor3::DenseTensor3(int i, int j, int k, std::vector<double> values,
                           std::array<std::string, 3> mode_names)
    : i_(i), j_(j), k_(k), values_(std::move(values)),
      mode_names_(std::move(mode_names)) {
  if (i_ < 1 || j_ < 1 || k_ < 1)
    throw std::invalid_argument("DenseTensor3: all extents must be >= 1");
  const auto expected =
      static_cast<std::size_t>(i_) * static_cast<std::size_t>(j_) *
      static_cast<std::size_t>(k_);
  if (values_.size() != expected)
    throw std::invalid_argument(
        "DenseTensor3: value count does not match extents");
  for (double v : values_)
    if (!std::isfinite(v))
      throw std::invalid_argument("DenseTensor3: non-finite value");
}

int DenseTensor3::extent(int mode) const {
  switch (mode) {
    case 1: return i_;
    case 2: return j_;
    case 3: return k_;
    default:
      throw std::invalid_argument("DenseTensor3: mode must be 1, 2 or 3");
  }
}

Matrix unfold(const DenseTensor3& t, int mode) {
  const int I = t.extent(1), J = t.extent(2), K = t.extent(3);
  const double* v = t.values().data();
  switch (mode) {
    case 1:
      return Eigen::Map<const Matrix>(v, I, static_cast<Eigen::Index>(J) * K);
    case 2: {
      Matrix out(J, static_cast<Eigen::Index>(I) * K);
      for (int k = 0; k < K; ++k)
        out.middleCols(static_cast<Eigen::Index>(I) * k, I) =
            t.frontal_slice(k).transpose();
      return out;
    }
    case 3:
      return Eigen::Map<const Matrix>(v, static_cast<Eigen::Index>(I) * J, K)
          .transpose();
    default:
      throw std::invalid_argument("unfold: mode must be 1, 2 or 3");
  }
}

DenseTensor3 fold(const Matrix& m, int mode, std::array<int, 3> dims) {
  const int I = dims[0], J = dims[1], K = dims[2];
  if (I < 1 || J < 1 || K < 1)
    throw std::invalid_argument("fold: all extents must be >= 1");
  const Eigen::Index rows[] = {0, I, J, K};
  if (mode < 1 || mode > 3)
    throw std::invalid_argument("fold: mode must be 1, 2 or 3");
  const Eigen::Index total = static_cast<Eigen::Index>(I) * J * K;
  if (m.rows() != rows[mode] || m.rows() * m.cols() != total)
    throw std::invalid_argument("fold: matrix shape inconsistent with dims");

  std::vector<double> values(static_cast<std::size_t>(total));
  switch (mode) {
    case 1:
      Eigen::Map<Matrix>(values.data(), I, static_cast<Eigen::Index>(J) * K) =
          m;
      break;
    case 2:
      for (int k = 0; k < K; ++k)
        Eigen::Map<Matrix>(values.data() + static_cast<std::size_t>(I) * J * k,
                           I, J) =
            m.middleCols(static_cast<Eigen::Index>(I) * k, I).transpose();
      break;
    case 3:
      Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(I) * J, K) =
          m.transpose();
      break;
  }
  return DenseTensor3(I, J, K, std::move(values));
}

Matrix khatri_rao(const Eigen::Ref<const Matrix>& a,
                  const Eigen::Ref<const Matrix>& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("khatri_rao: column counts differ");
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.cols(); ++r)
    for (Eigen::Index p = 0; p < a.rows(); ++p)
      out.col(r).segment(p * b.rows(), b.rows()) = a(p, r) * b.col(r);
  return out;
}

Matrix mttkrp(const DenseTensor3& t, const Eigen::Ref<const Matrix>& f1,
              const Eigen::Ref<const Matrix>& f2, int mode) {
  const int I = t.extent(1), J = t.extent(2), K = t.extent(3);
  if (mode < 1 || mode > 3)
    throw std::invalid_argument("mttkrp: mode must be 1, 2 or 3");
  const int lo_extent[] = {0, J, I, I};
  const int hi_extent[] = {0, K, K, J};
  if (f1.rows() != lo_extent[mode] || f2.rows() != hi_extent[mode] ||
      f1.cols() != f2.cols())
    throw std::invalid_argument("mttkrp: factor shape mismatch");
  const Eigen::Index R = f1.cols();

  Matrix out = Matrix::Zero(t.extent(mode), R);
  switch (mode) {
    case 1:
      // out += X(:,:,k) * f1 * diag(f2(k,:))
      for (int k = 0; k < K; ++k)
        out.noalias() += t.frontal_slice(k) * f1 * f2.row(k).asDiagonal();
      break;
    case 2:
      for (int k = 0; k < K; ++k)
        out.noalias() +=
            t.frontal_slice(k).transpose() * f1 * f2.row(k).asDiagonal();
      break;
    case 3:
      for (int k = 0; k < K; ++k)
        out.row(k) =
            (f1.array() * (t.frontal_slice(k) * f2).array()).colwise().sum();
      break;
  }
  return out;
}

double frobenius_norm(const DenseTensor3& t) {
  return Eigen::Map<const Vector>(t.values().data(),
                                  static_cast<Eigen::Index>(t.size()))
      .norm();
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

}  // namespace tenfuse
