#include "tenfuse/acmtf.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "multistart.hpp"
#include "tenfuse/rng.hpp"

namespace tenfuse {

namespace {

void check_coupled_model_shapes(const DenseTensor3& x, const Matrix& y,
                                const CoupledModel& m) {
  if (x.extent(1) != y.rows())
    throw std::invalid_argument(
        "acmtf: tensor and matrix disagree on the coupled (first) mode");
  const Eigen::Index r = m.tensor_weights.size();
  if (m.matrix_weights.size() != r || m.A.cols() != r || m.B.cols() != r ||
      m.C.cols() != r || m.V.cols() != r)
    throw std::invalid_argument("acmtf: variables disagree on rank");
  if (m.A.rows() != x.extent(1) || m.B.rows() != x.extent(2) ||
      m.C.rows() != x.extent(3) || m.V.rows() != y.cols())
    throw std::invalid_argument("acmtf: factor extents do not match data");
}

// Smoothed 1-norm penalty on a weight vector and its gradient contribution.
double smoothed_l1(const Eigen::Ref<const Vector>& w, double eps, double beta,
                   Eigen::Ref<Vector> grad) {
  double value = 0.0;
  for (Eigen::Index r = 0; r < w.size(); ++r) {
    const double root = std::sqrt(w(r) * w(r) + eps);
    value += root;
    grad(r) += beta * w(r) / root;
  }
  return beta * value;
}

// gamma * sum_r (||col_r|| - 1)^2 and its gradient contribution.
double norm_penalty(const Eigen::Ref<const Matrix>& f, double gamma,
                    Eigen::Ref<Matrix> grad) {
  double value = 0.0;
  for (Eigen::Index r = 0; r < f.cols(); ++r) {
    const double n = f.col(r).norm();
    const double dev = n - 1.0;
    value += dev * dev;
    if (n > 0.0) grad.col(r) += (2.0 * gamma * dev / n) * f.col(r);
  }
  return gamma * value;
}

// Objective and gradient in one pass; the tensor residual uses the Gram
// identity with the lambda-scaled copy of A, the matrix residual is formed
// explicitly (it is only I x M).  Workspace buffers make the evaluator
// single-thread only; the multistart driver builds one kernel per worker.
struct AcmtfKernel {
  const DenseTensor3& x;
  const Matrix& y;
  AcmtfConfig cfg;
  double norm_x_sq;
  Matrix abar, asig, e, ev;  // workspace

  AcmtfKernel(const DenseTensor3& t, const Matrix& m, const AcmtfConfig& c)
      : x(t), y(m), cfg(c), norm_x_sq(std::pow(frobenius_norm(t), 2)) {}

  double objective_and_gradient(
      const Eigen::Ref<const Vector>& lambda,
      const Eigen::Ref<const Vector>& sigma,
      const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
      const Eigen::Ref<const Matrix>& C, const Eigen::Ref<const Matrix>& V,
      Eigen::Ref<Vector> g_lambda, Eigen::Ref<Vector> g_sigma,
      Eigen::Ref<Matrix> gA, Eigen::Ref<Matrix> gB, Eigen::Ref<Matrix> gC,
      Eigen::Ref<Matrix> gV) {
    // Tensor residual over Abar = A diag(lambda).
    abar.noalias() = A * lambda.asDiagonal();
    const Matrix GAbar = abar.transpose() * abar;
    const Matrix GB = B.transpose() * B;
    const Matrix GC = C.transpose() * C;
    const Matrix M1 = mttkrp(x, B, C, 1);
    const double inner_x = (abar.array() * M1.array()).sum();
    const double model_x_sq = (GAbar.array() * GB.array() * GC.array()).sum();
    const double f_x = std::max(0.0, norm_x_sq - 2.0 * inner_x + model_x_sq);
    const Matrix gAbar =
        2.0 * (abar * (GB.array() * GC.array()).matrix() - M1);
    gA.noalias() = gAbar * lambda.asDiagonal();
    for (Eigen::Index r = 0; r < lambda.size(); ++r)
      g_lambda(r) = A.col(r).dot(gAbar.col(r));
    gB.noalias() = 2.0 * (B * (GAbar.array() * GC.array()).matrix() -
                          mttkrp(x, abar, C, 2));
    gC.noalias() = 2.0 * (C * (GAbar.array() * GB.array()).matrix() -
                          mttkrp(x, abar, B, 3));

    // Matrix residual E = A diag(sigma) V' - Y.
    asig.noalias() = A * sigma.asDiagonal();
    e.noalias() = asig * V.transpose();
    e -= y;
    const double f_y = e.squaredNorm();
    ev.noalias() = e * V;  // I x R
    gA.noalias() += 2.0 * ev * sigma.asDiagonal();
    gV.noalias() = 2.0 * e.transpose() * asig;
    for (Eigen::Index r = 0; r < sigma.size(); ++r)
      g_sigma(r) = 2.0 * A.col(r).dot(ev.col(r));

    double f = f_x + f_y;
    f += smoothed_l1(lambda, cfg.l1_epsilon, cfg.beta, g_lambda);
    f += smoothed_l1(sigma, cfg.l1_epsilon, cfg.beta, g_sigma);
    f += norm_penalty(A, cfg.gamma, gA);
    f += norm_penalty(B, cfg.gamma, gB);
    f += norm_penalty(C, cfg.gamma, gC);
    f += norm_penalty(V, cfg.gamma, gV);
    return f;
  }
};

void check_config(const AcmtfConfig& cfg) {
  if (cfg.rank < 1) throw std::invalid_argument("acmtf: rank must be >= 1");
  if (cfg.beta < 0.0) throw std::invalid_argument("acmtf: beta must be >= 0");
  if (cfg.gamma <= 0.0) throw std::invalid_argument("acmtf: gamma must be > 0");
  if (cfg.l1_epsilon <= 0.0)
    throw std::invalid_argument("acmtf: l1_epsilon must be > 0");
}

}  // namespace

namespace {

// Order-independent sum: the same multiset of addends gives the same result.
double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

double smoothed_l1_value(const Vector& w, double eps) {
  std::vector<double> terms(w.size());
  for (Eigen::Index r = 0; r < w.size(); ++r)
    terms[r] = std::sqrt(w(r) * w(r) + eps);
  return sorted_sum(terms);
}

double norm_penalty_value(const Matrix& f) {
  std::vector<double> terms(f.cols());
  for (Eigen::Index r = 0; r < f.cols(); ++r) {
    const double dev = f.col(r).norm() - 1.0;
    terms[r] = dev * dev;
  }
  return sorted_sum(terms);
}

}  // namespace

// The public objective forms both residuals against the permutation-exact
// reconstructions and accumulates the per-component penalty terms in sorted
// order, so its value is exactly invariant under a simultaneous column
// permutation of (lambda, sigma, A, B, C, V).  The fit loop uses the Gram
// kernel above instead, which agrees to rounding.
double acmtf_objective(const DenseTensor3& x, const Matrix& y,
                       const CoupledModel& vars, const AcmtfConfig& cfg) {
  check_config(cfg);
  check_coupled_model_shapes(x, y, vars);
  const DenseTensor3 xhat = reconstruct_tensor(vars);
  double f = 0.0;
  for (std::size_t i = 0; i < x.values().size(); ++i) {
    const double d = x.values()[i] - xhat.values()[i];
    f += d * d;
  }
  const Matrix yhat = reconstruct_matrix(vars);
  f += (y - yhat).squaredNorm();
  f += cfg.beta * smoothed_l1_value(vars.tensor_weights, cfg.l1_epsilon);
  f += cfg.beta * smoothed_l1_value(vars.matrix_weights, cfg.l1_epsilon);
  f += cfg.gamma * (norm_penalty_value(vars.A) + norm_penalty_value(vars.B) +
                    norm_penalty_value(vars.C) + norm_penalty_value(vars.V));
  return f;
}

CoupledModel acmtf_gradient(const DenseTensor3& x, const Matrix& y,
                            const CoupledModel& vars, const AcmtfConfig& cfg) {
  check_config(cfg);
  check_coupled_model_shapes(x, y, vars);
  CoupledModel g = vars;
  AcmtfKernel kernel(x, y, cfg);
  kernel.objective_and_gradient(vars.tensor_weights, vars.matrix_weights,
                                vars.A, vars.B, vars.C, vars.V,
                                g.tensor_weights, g.matrix_weights, g.A, g.B,
                                g.C, g.V);
  return g;
}

std::pair<CoupledModel, FitReport> fit_acmtf(const DenseTensor3& x,
                                             const Matrix& y,
                                             const AcmtfConfig& cfg) {
  check_config(cfg);
  if (cfg.n_starts < 1)
    throw std::invalid_argument("fit_acmtf: n_starts must be >= 1");
  if (x.extent(1) != y.rows())
    throw std::invalid_argument(
        "fit_acmtf: tensor and matrix disagree on the coupled (first) mode");

  const int I = x.extent(1), J = x.extent(2), K = x.extent(3);
  const int M = static_cast<int>(y.cols());
  const int R = cfg.rank;
  const Eigen::Index nA = static_cast<Eigen::Index>(I) * R;
  const Eigen::Index nB = static_cast<Eigen::Index>(J) * R;
  const Eigen::Index nC = static_cast<Eigen::Index>(K) * R;
  const Eigen::Index nV = static_cast<Eigen::Index>(M) * R;
  const Eigen::Index total = 2 * R + nA + nB + nC + nV;

  // Parameter layout: [lambda; sigma; vec A; vec B; vec C; vec V].
  auto unpack = [=](const Vector& p) {
    struct Views {
      Eigen::Map<const Vector> lambda, sigma;
      Eigen::Map<const Matrix> A, B, C, V;
    };
    const double* d = p.data();
    return Views{{d, R},
                 {d + R, R},
                 {d + 2 * R, I, R},
                 {d + 2 * R + nA, J, R},
                 {d + 2 * R + nA + nB, K, R},
                 {d + 2 * R + nA + nB + nC, M, R}};
  };

  auto make_objective = [&]() -> ObjectiveFunction {
    auto kernel = std::make_shared<AcmtfKernel>(x, y, cfg);
    return [kernel, unpack, I, J, K, M, R, nA, nB, nC](
               const Vector& p, Vector& grad) -> double {
      const auto v = unpack(p);
      double* gd = grad.data();
      Eigen::Map<Vector> g_lambda(gd, R);
      Eigen::Map<Vector> g_sigma(gd + R, R);
      Eigen::Map<Matrix> gA(gd + 2 * R, I, R);
      Eigen::Map<Matrix> gB(gd + 2 * R + nA, J, R);
      Eigen::Map<Matrix> gC(gd + 2 * R + nA + nB, K, R);
      Eigen::Map<Matrix> gV(gd + 2 * R + nA + nB + nC, M, R);
      return kernel->objective_and_gradient(v.lambda, v.sigma, v.A, v.B, v.C,
                                            v.V, g_lambda, g_sigma, gA, gB, gC,
                                            gV);
    };
  };

  auto make_init = [&](int start) {
    GaussianStream rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(start)));
    Vector p(total);
    p.head(2 * R).setOnes();  // weights start at 1
    double* d = p.data();
    Eigen::Map<Matrix> A(d + 2 * R, I, R);
    Eigen::Map<Matrix> B(d + 2 * R + nA, J, R);
    Eigen::Map<Matrix> C(d + 2 * R + nA + nB, K, R);
    Eigen::Map<Matrix> V(d + 2 * R + nA + nB + nC, M, R);
    for (Eigen::Map<Matrix>* f : {&A, &B, &C, &V}) {
      rng.fill_gaussian(*f);
      for (int r = 0; r < R; ++r) f->col(r).normalize();
    }
    return p;
  };

  auto to_model = [&](const Vector& p) {
    const auto v = unpack(p);
    CoupledModel m;
    m.tensor_weights = v.lambda;
    m.matrix_weights = v.sigma;
    m.A = v.A;
    m.B = v.B;
    m.C = v.C;
    m.V = v.V;
    return m;
  };

  auto fms = [](const CoupledModel& a, const CoupledModel& b) {
    return factor_match_score(a, b).score;
  };

  detail::MultistartParams params{cfg.n_starts, cfg.seed, cfg.optimizer,
                                  cfg.uniqueness_fms_threshold, cfg.n_threads};
  FitReport report;
  std::vector<CoupledModel> models;
  const int best = detail::run_multistart<CoupledModel>(
      params, make_objective, make_init, to_model, fms, models, report);

  CoupledModel model = normalize(std::move(models[best]));
  report.congruence = congruence_check(model.tensor_part());
  report.degeneracy_warning = report.congruence > kDegeneracyCongruenceThreshold;
  report.model_objective = acmtf_objective(x, y, model, cfg);
  report.weight_table.reserve(R);
  for (int r = 0; r < R; ++r)
    report.weight_table.push_back(
        {model.tensor_weights(r), model.matrix_weights(r)});
  return {std::move(model), std::move(report)};
}

const char* to_string(ComponentLabel label) {
  switch (label) {
    case ComponentLabel::shared: return "shared";
    case ComponentLabel::tensor_only: return "tensor_only";
    case ComponentLabel::matrix_only: return "matrix_only";
    case ComponentLabel::degenerate: return "degenerate";
  }
  return "unknown";
}

std::vector<ComponentLabel> classify_components(const CoupledModel& m,
                                                double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument(
        "classify_components: threshold must be in (0, 1)");
  const double max_lambda = m.tensor_weights.cwiseAbs().maxCoeff();
  const double max_sigma = m.matrix_weights.cwiseAbs().maxCoeff();
  if (max_lambda == 0.0 || max_sigma == 0.0)
    throw std::domain_error(
        "classify_components: all weights are zero in one dataset");
  std::vector<ComponentLabel> labels(m.rank());
  for (int r = 0; r < m.rank(); ++r) {
    const bool absent_matrix =
        std::abs(m.matrix_weights(r)) / max_sigma < threshold;
    const bool absent_tensor =
        std::abs(m.tensor_weights(r)) / max_lambda < threshold;
    if (absent_matrix && absent_tensor)
      labels[r] = ComponentLabel::degenerate;
    else if (absent_matrix)
      labels[r] = ComponentLabel::tensor_only;
    else if (absent_tensor)
      labels[r] = ComponentLabel::matrix_only;
    else
      labels[r] = ComponentLabel::shared;
  }
  return labels;
}

}  // namespace tenfuse
