#include "tenfuse/cp.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "multistart.hpp"
#include "tenfuse/rng.hpp"

namespace tenfuse {

namespace {

void check_factor_shapes(const DenseTensor3& x, const Matrix& A,
                         const Matrix& B, const Matrix& C) {
  if (A.rows() != x.extent(1) || B.rows() != x.extent(2) ||
      C.rows() != x.extent(3))
    throw std::invalid_argument("cp: factor row counts do not match tensor");
  if (A.cols() != B.cols() || B.cols() != C.cols())
    throw std::invalid_argument("cp: factors disagree on rank");
}

// Shared objective/gradient kernel.  The objective uses the Gram identity
//   ||X - M||^2 = ||X||^2 - 2 <X, M> + ||M||^2
// so no residual tensor is materialized; the three MTTKRPs double as the
// gradient ingredients.
struct CpKernel {
  const DenseTensor3& x;
  double norm_x_sq;

  explicit CpKernel(const DenseTensor3& t)
      : x(t), norm_x_sq(std::pow(frobenius_norm(t), 2)) {}

  double objective_and_gradient(const Eigen::Ref<const Matrix>& A,
                                const Eigen::Ref<const Matrix>& B,
                                const Eigen::Ref<const Matrix>& C,
                                Eigen::Ref<Matrix> gA, Eigen::Ref<Matrix> gB,
                                Eigen::Ref<Matrix> gC) const {
    const Matrix GA = A.transpose() * A;
    const Matrix GB = B.transpose() * B;
    const Matrix GC = C.transpose() * C;
    const Matrix M1 = mttkrp(x, B, C, 1);
    const double inner = (A.array() * M1.array()).sum();
    const double model_sq = (GA.array() * GB.array() * GC.array()).sum();
    gA.noalias() = 2.0 * (A * (GB.array() * GC.array()).matrix() - M1);
    gB.noalias() =
        2.0 * (B * (GA.array() * GC.array()).matrix() - mttkrp(x, A, C, 2));
    gC.noalias() =
        2.0 * (C * (GA.array() * GB.array()).matrix() - mttkrp(x, A, B, 3));
    return std::max(0.0, norm_x_sq - 2.0 * inner + model_sq);
  }
};

}  // namespace

// The public objective forms the residual against the (permutation-exact)
// reconstruction; the fit loop uses the Gram-identity kernel above, which
// agrees to rounding but avoids materializing the model tensor.
double cp_objective(const DenseTensor3& x, const Matrix& A, const Matrix& B,
                    const Matrix& C) {
  check_factor_shapes(x, A, B, C);
  const DenseTensor3 model =
      reconstruct_tensor(KruskalModel{Vector::Ones(A.cols()), A, B, C});
  double sum = 0.0;
  for (std::size_t i = 0; i < x.values().size(); ++i) {
    const double d = x.values()[i] - model.values()[i];
    sum += d * d;
  }
  return sum;
}

CpGradient cp_gradient(const DenseTensor3& x, const Matrix& A, const Matrix& B,
                       const Matrix& C) {
  check_factor_shapes(x, A, B, C);
  CpGradient g{Matrix(A.rows(), A.cols()), Matrix(B.rows(), B.cols()),
               Matrix(C.rows(), C.cols())};
  CpKernel(x).objective_and_gradient(A, B, C, g.A, g.B, g.C);
  return g;
}

std::pair<KruskalModel, FitReport> fit_cp(const DenseTensor3& x,
                                          const CpConfig& cfg) {
  if (cfg.rank < 1) throw std::invalid_argument("fit_cp: rank must be >= 1");
  if (cfg.n_starts < 1)
    throw std::invalid_argument("fit_cp: n_starts must be >= 1");
  const int I = x.extent(1), J = x.extent(2), K = x.extent(3);
  const long min_cross = std::min({static_cast<long>(J) * K,
                                   static_cast<long>(I) * K,
                                   static_cast<long>(I) * J});
  if (cfg.rank > min_cross)
    throw std::invalid_argument(
        "fit_cp: rank exceeds the sanity bound for these extents");

  const int R = cfg.rank;
  const Eigen::Index nA = static_cast<Eigen::Index>(I) * R;
  const Eigen::Index nB = static_cast<Eigen::Index>(J) * R;
  const Eigen::Index nC = static_cast<Eigen::Index>(K) * R;

  auto make_objective = [&]() -> ObjectiveFunction {
    auto kernel = std::make_shared<CpKernel>(x);
    return [kernel, I, J, K, R, nA, nB](const Vector& p,
                                        Vector& grad) -> double {
      Eigen::Map<const Matrix> A(p.data(), I, R);
      Eigen::Map<const Matrix> B(p.data() + nA, J, R);
      Eigen::Map<const Matrix> C(p.data() + nA + nB, K, R);
      Eigen::Map<Matrix> gA(grad.data(), I, R);
      Eigen::Map<Matrix> gB(grad.data() + nA, J, R);
      Eigen::Map<Matrix> gC(grad.data() + nA + nB, K, R);
      return kernel->objective_and_gradient(A, B, C, gA, gB, gC);
    };
  };

  auto make_init = [&](int start) {
    GaussianStream rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(start)));
    Vector p(nA + nB + nC);
    Eigen::Map<Matrix> A(p.data(), I, R);
    Eigen::Map<Matrix> B(p.data() + nA, J, R);
    Eigen::Map<Matrix> C(p.data() + nA + nB, K, R);
    for (Eigen::Map<Matrix>* f : {&A, &B, &C}) {
      rng.fill_gaussian(*f);
      for (int r = 0; r < R; ++r) f->col(r).normalize();
    }
    return p;
  };

  auto to_model = [&](const Vector& p) {
    KruskalModel m;
    m.weights = Vector::Ones(R);
    m.A = Eigen::Map<const Matrix>(p.data(), I, R);
    m.B = Eigen::Map<const Matrix>(p.data() + nA, J, R);
    m.C = Eigen::Map<const Matrix>(p.data() + nA + nB, K, R);
    return m;
  };

  auto fms = [](const KruskalModel& a, const KruskalModel& b) {
    return factor_match_score(a, b).score;
  };

  detail::MultistartParams params{cfg.n_starts, cfg.seed, cfg.optimizer,
                                  cfg.uniqueness_fms_threshold, cfg.n_threads};
  FitReport report;
  std::vector<KruskalModel> models;
  const int best = detail::run_multistart<KruskalModel>(
      params, make_objective, make_init, to_model, fms, models, report);

  KruskalModel model = normalize(std::move(models[best]));
  report.congruence = congruence_check(model);
  report.degeneracy_warning = report.congruence > kDegeneracyCongruenceThreshold;
  report.model_objective =
      cp_objective(x, model.A * model.weights.asDiagonal(), model.B, model.C);
  return {std::move(model), std::move(report)};
}

}  // namespace tenfuse
