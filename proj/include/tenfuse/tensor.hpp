#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tenfuse {

using Matrix = Eigen::MatrixXd;  // column-major: row index fastest
using Vector = Eigen::VectorXd;

/// Dense order-3 tensor of real values with named modes.
///
/// Storage layout is fixed: entry (i, j, k) lives at offset i + I*j + I*J*k,
/// i.e. the first index varies fastest.  All unfolding and Khatri-Rao
/// conventions in this library are stated against this layout, which makes
/// the kernels bit-reproducible.
///
/// Tensors are immutable after construction and safe for concurrent reads.
/// Construction rejects NaN/Inf values and inconsistent extents, so the
/// kernels can assume finite data.
class DenseTensor3 {
 public:
  DenseTensor3(int i, int j, int k, std::vector<double> values,
               std::array<std::string, 3> mode_names = {"mode1", "mode2",
                                                        "mode3"});

  /// Extent of a mode, mode in {1, 2, 3}.
  int extent(int mode) const;
  std::array<int, 3> dims() const { return {i_, j_, k_}; }
  std::int64_t size() const {
    return static_cast<std::int64_t>(i_) * j_ * k_;
  }

  double operator()(int i, int j, int k) const {
    return values_[static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(i_) * j +
                   static_cast<std::size_t>(i_) * j_ * k];
  }

  const std::vector<double>& values() const { return values_; }
  const std::array<std::string, 3>& mode_names() const { return mode_names_; }

  /// Frontal slice X(:, :, k) as an I x J map over the underlying storage.
  Eigen::Map<const Matrix> frontal_slice(int k) const {
    return Eigen::Map<const Matrix>(
        values_.data() + static_cast<std::size_t>(i_) * j_ * k, i_, j_);
  }

 private:
  int i_, j_, k_;
  std::vector<double> values_;
  std::array<std::string, 3> mode_names_;
};

/// Mode-n unfolding.  The mode-n index becomes the row index; the surviving
/// modes order the columns with the lower-numbered one varying fastest:
///   mode 1: I x (J*K), column j + J*k
///   mode 2: J x (I*K), column i + I*k
///   mode 3: K x (I*J), column i + I*j
Matrix unfold(const DenseTensor3& t, int mode);

/// Exact inverse of unfold for the given mode and extents.
DenseTensor3 fold(const Matrix& m, int mode, std::array<int, 3> dims);

/// Column-wise Kronecker product.  Column r is kron(a_r, b_r) with the row
/// index of b varying fastest, consistent with the unfolding convention.
Matrix khatri_rao(const Eigen::Ref<const Matrix>& a,
                  const Eigen::Ref<const Matrix>& b);

/// Matricized tensor times Khatri-Rao product:
///   mttkrp(t, f1, f2, mode) == unfold(t, mode) * khatri_rao(f2, f1)
/// where f1/f2 are the factors of the lower/higher non-target modes.  The
/// Khatri-Rao product is never materialized; the result is accumulated
/// slice by slice.
Matrix mttkrp(const DenseTensor3& t, const Eigen::Ref<const Matrix>& f1,
              const Eigen::Ref<const Matrix>& f2, int mode);

double frobenius_norm(const DenseTensor3& t);
double frobenius_norm(const Matrix& m);

}  // namespace tenfuse
