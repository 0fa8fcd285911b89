#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tenfuse/acmtf.hpp"
#include "tenfuse/synthetic.hpp"
#include "test_support.hpp"

using namespace tenfuse;
using test_support::random_coupled;
using test_support::random_matrix;
using test_support::random_tensor;

namespace {

Vector flatten(const CoupledModel& m) {
  Vector p(2 * m.rank() + m.A.size() + m.B.size() + m.C.size() + m.V.size());
  p << m.tensor_weights, m.matrix_weights,
      Eigen::Map<const Vector>(m.A.data(), m.A.size()),
      Eigen::Map<const Vector>(m.B.data(), m.B.size()),
      Eigen::Map<const Vector>(m.C.data(), m.C.size()),
      Eigen::Map<const Vector>(m.V.data(), m.V.size());
  return p;
}

CoupledModel unflatten(const Vector& p, int I, int J, int K, int M, int R) {
  CoupledModel m;
  m.tensor_weights = p.head(R);
  m.matrix_weights = p.segment(R, R);
  Eigen::Index off = 2 * R;
  m.A = Eigen::Map<const Matrix>(p.data() + off, I, R);
  off += static_cast<Eigen::Index>(I) * R;
  m.B = Eigen::Map<const Matrix>(p.data() + off, J, R);
  off += static_cast<Eigen::Index>(J) * R;
  m.C = Eigen::Map<const Matrix>(p.data() + off, K, R);
  off += static_cast<Eigen::Index>(K) * R;
  m.V = Eigen::Map<const Matrix>(p.data() + off, M, R);
  return m;
}

// From-scratch termwise objective oracle: reconstruct both datasets by
// explicit loops, sum squared residuals, add every penalty term.
double objective_oracle(const DenseTensor3& x, const Matrix& y,
                        const CoupledModel& m, const AcmtfConfig& cfg) {
  const KruskalModel tensor_part{m.tensor_weights, m.A, m.B, m.C};
  const DenseTensor3 xhat = test_support::reconstruct_oracle(tensor_part);
  double f = 0.0;
  for (std::size_t i = 0; i < x.values().size(); ++i) {
    const double d = x.values()[i] - xhat.values()[i];
    f += d * d;
  }
  const Matrix yhat = test_support::coupled_matrix_oracle(m);
  for (Eigen::Index c = 0; c < y.cols(); ++c)
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double d = y(r, c) - yhat(r, c);
      f += d * d;
    }
  for (int r = 0; r < m.rank(); ++r) {
    f += cfg.beta * std::sqrt(m.tensor_weights(r) * m.tensor_weights(r) +
                              cfg.l1_epsilon);
    f += cfg.beta * std::sqrt(m.matrix_weights(r) * m.matrix_weights(r) +
                              cfg.l1_epsilon);
  }
  for (const Matrix* f_mat : {&m.A, &m.B, &m.C, &m.V})
    for (Eigen::Index r = 0; r < f_mat->cols(); ++r) {
      const double dev = f_mat->col(r).norm() - 1.0;
      f += cfg.gamma * dev * dev;
    }
  return f;
}

SynthSpec small_spec(bool shared_only, std::uint64_t seed) {
  SynthSpec spec;
  spec.subjects = 15;
  spec.time_samples = 14;
  spec.electrodes = 9;
  spec.voxels = 20;
  spec.rank = 3;
  spec.components.assign(3, ComponentSpec{});
  if (!shared_only) {
    spec.components[2].in_matrix = false;  // tensor-only component
    spec.components[2].sigma = 0.0;
  }
  spec.noise_tensor = 0.01;
  spec.noise_matrix = 0.01;
  spec.n_group0 = 8;
  spec.smooth_time = false;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_SUITE("acmtf") {

TEST_CASE("objective at a residual-free point is exactly the beta terms") {
  const SynthSpec spec = [] {
    SynthSpec s = small_spec(true, 7);
    s.noise_tensor = 0.0;
    s.noise_matrix = 0.0;
    return s;
  }();
  const SynthData data = generate(spec);
  AcmtfConfig cfg;
  cfg.rank = 3;
  const double f = acmtf_objective(data.tensor, data.matrix, data.truth, cfg);
  double beta_terms = 0.0;
  for (int r = 0; r < 3; ++r)
    beta_terms +=
        cfg.beta *
        (std::sqrt(std::pow(data.truth.tensor_weights(r), 2) + cfg.l1_epsilon) +
         std::sqrt(std::pow(data.truth.matrix_weights(r), 2) + cfg.l1_epsilon));
  CHECK(f == doctest::Approx(beta_terms).epsilon(1e-9));

  SUBCASE("beta = 0 leaves only the epsilon-free terms") {
    AcmtfConfig zero = cfg;
    zero.beta = 0.0;
    CHECK(acmtf_objective(data.tensor, data.matrix, data.truth, zero) <= 1e-12);
  }
}

TEST_CASE("objective matches the termwise summation oracle") {
  const DenseTensor3 x = random_tensor(4, 3, 2, 201);
  const Matrix y = random_matrix(4, 5, 202);
  const CoupledModel vars = random_coupled(4, 3, 2, 5, 2, 203);
  AcmtfConfig cfg;
  cfg.rank = 2;
  cfg.beta = 1e-3;
  const double got = acmtf_objective(x, y, vars, cfg);
  const double want = objective_oracle(x, y, vars, cfg);
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("objective is exactly invariant under column permutation") {
  const DenseTensor3 x = random_tensor(4, 3, 2, 204);
  const Matrix y = random_matrix(4, 5, 205);
  const CoupledModel vars = random_coupled(4, 3, 2, 5, 3, 206);
  AcmtfConfig cfg;
  cfg.rank = 3;
  const std::vector<int> perm = {2, 0, 1};
  CoupledModel permuted = vars;
  for (int r = 0; r < 3; ++r) {
    permuted.tensor_weights(r) = vars.tensor_weights(perm[r]);
    permuted.matrix_weights(r) = vars.matrix_weights(perm[r]);
    permuted.A.col(r) = vars.A.col(perm[r]);
    permuted.B.col(r) = vars.B.col(perm[r]);
    permuted.C.col(r) = vars.C.col(perm[r]);
    permuted.V.col(r) = vars.V.col(perm[r]);
  }
  CHECK(acmtf_objective(x, y, permuted, cfg) ==
        acmtf_objective(x, y, vars, cfg));
}

TEST_CASE("objective rejects a coupled-mode mismatch") {
  const DenseTensor3 x = random_tensor(4, 3, 2, 207);
  const Matrix y = random_matrix(5, 5, 208);
  const CoupledModel vars = random_coupled(4, 3, 2, 5, 2, 209);
  AcmtfConfig cfg;
  cfg.rank = 2;
  CHECK_THROWS_AS(acmtf_objective(x, y, vars, cfg), std::invalid_argument);
}

TEST_CASE("gradient matches central finite differences") {
  const int I = 4, J = 3, K = 2, M = 5, R = 2;
  for (int trial = 0; trial < 5; ++trial) {
    const DenseTensor3 x = random_tensor(I, J, K, 210 + trial);
    const Matrix y = random_matrix(I, M, 220 + trial);
    CoupledModel vars = random_coupled(I, J, K, M, R, 230 + trial);
    if (trial >= 3) vars.tensor_weights(0) = 1e-5;  // near the l1 kink
    AcmtfConfig cfg;
    cfg.rank = R;
    const CoupledModel g = acmtf_gradient(x, y, vars, cfg);
    const double err = test_support::max_gradient_error(
        [&](const Vector& p) {
          return acmtf_objective(x, y, unflatten(p, I, J, K, M, R), cfg);
        },
        flatten(vars), flatten(g));
    CHECK(err <= 1e-6);
  }
}

TEST_CASE("lambda gradient at lambda_r = 0 is the residual term alone") {
  const DenseTensor3 x = random_tensor(4, 3, 2, 240);
  const Matrix y = random_matrix(4, 5, 241);
  CoupledModel vars = random_coupled(4, 3, 2, 5, 2, 242);
  vars.tensor_weights(1) = 0.0;
  AcmtfConfig with_beta;
  with_beta.rank = 2;
  with_beta.beta = 1e-3;
  AcmtfConfig no_beta = with_beta;
  no_beta.beta = 0.0;
  const CoupledModel g1 = acmtf_gradient(x, y, vars, with_beta);
  const CoupledModel g0 = acmtf_gradient(x, y, vars, no_beta);
  CHECK(g1.tensor_weights(1) == g0.tensor_weights(1));
}

TEST_CASE("gradient vanishes at a planted noiseless optimum with beta = 0") {
  SynthSpec spec = small_spec(true, 8);
  spec.noise_tensor = 0.0;
  spec.noise_matrix = 0.0;
  const SynthData data = generate(spec);
  AcmtfConfig cfg;
  cfg.rank = 3;
  cfg.beta = 0.0;
  const CoupledModel g =
      acmtf_gradient(data.tensor, data.matrix, data.truth, cfg);
  const double gnorm = std::sqrt(
      g.tensor_weights.squaredNorm() + g.matrix_weights.squaredNorm() +
      g.A.squaredNorm() + g.B.squaredNorm() + g.C.squaredNorm() +
      g.V.squaredNorm());
  CHECK(gnorm <= 1e-8 * (1.0 + frobenius_norm(data.tensor) +
                         frobenius_norm(data.matrix)));
}

TEST_CASE("fit reveals a planted tensor-only component") {
  const SynthData data = generate(small_spec(false, 9));
  AcmtfConfig cfg;
  cfg.rank = 3;
  cfg.n_starts = 8;
  cfg.seed = 13;
  const auto [model, report] = fit_acmtf(data.tensor, data.matrix, cfg);

  // Map recovered components onto the planted ones via the tensor part; the
  // planted V column of the sigma = 0 component carries no weight, so its
  // recovered counterpart is arbitrary and must not enter the match.
  const FmsResult match =
      factor_match_score(data.truth.tensor_part(), model.tensor_part());
  CHECK(match.score >= 0.9);
  const int planted_unshared = match.permutation[2];
  const double max_sigma = model.matrix_weights.cwiseAbs().maxCoeff();
  CHECK(std::abs(model.matrix_weights(planted_unshared)) / max_sigma <= 0.05);
  for (int r = 0; r < 3; ++r) {
    if (r == planted_unshared) continue;
    CHECK(std::abs(model.matrix_weights(r)) >= 0.5 * max_sigma);
  }

  const auto labels = classify_components(model, cfg.share_threshold);
  for (int r = 0; r < 3; ++r)
    CHECK(labels[r] == (r == planted_unshared ? ComponentLabel::tensor_only
                                              : ComponentLabel::shared));
  CHECK(report.weight_table.size() == 3);
}

TEST_CASE("fit on all-shared data classifies every component as shared") {
  const SynthData data = generate(small_spec(true, 10));
  AcmtfConfig cfg;
  cfg.rank = 3;
  cfg.n_starts = 8;
  cfg.seed = 17;
  const auto [model, report] = fit_acmtf(data.tensor, data.matrix, cfg);
  for (const auto label : classify_components(model, cfg.share_threshold))
    CHECK(label == ComponentLabel::shared);
}

TEST_CASE("identical seeds give bit-identical fits") {
  const SynthData data = generate(small_spec(true, 11));
  AcmtfConfig cfg;
  cfg.rank = 2;
  cfg.n_starts = 3;
  cfg.seed = 19;
  cfg.optimizer.max_iterations = 300;
  const auto [m1, r1] = fit_acmtf(data.tensor, data.matrix, cfg);
  const auto [m2, r2] = fit_acmtf(data.tensor, data.matrix, cfg);
  CHECK(m1.tensor_weights == m2.tensor_weights);
  CHECK(m1.matrix_weights == m2.matrix_weights);
  CHECK(m1.A == m2.A);
  CHECK(m1.V == m2.V);
  CHECK(r1.best_objective == r2.best_objective);
  REQUIRE(r1.starts.size() == r2.starts.size());
  for (std::size_t s = 0; s < r1.starts.size(); ++s)
    CHECK(r1.starts[s].objective == r2.starts[s].objective);
}

TEST_CASE("classify_components thresholds and errors") {
  CoupledModel m = random_coupled(4, 3, 2, 5, 3, 250);
  m.tensor_weights << 1.0, 1.0, 1.0;
  m.matrix_weights << 1.0, 1.0, 0.001;
  const auto labels = classify_components(m, 0.05);
  CHECK(labels[0] == ComponentLabel::shared);
  CHECK(labels[1] == ComponentLabel::shared);
  CHECK(labels[2] == ComponentLabel::tensor_only);

  m.matrix_weights << 1.0, 1.0, 1.0;
  for (const auto label : classify_components(m, 0.05))
    CHECK(label == ComponentLabel::shared);

  m.tensor_weights(0) = 0.001;
  CHECK(classify_components(m, 0.05)[0] == ComponentLabel::matrix_only);

  m.matrix_weights(0) = 0.001;
  CHECK(classify_components(m, 0.05)[0] == ComponentLabel::degenerate);

  m.matrix_weights.setZero();
  CHECK_THROWS_AS(classify_components(m, 0.05), std::domain_error);
  m.matrix_weights.setOnes();
  CHECK_THROWS_AS(classify_components(m, 1.5), std::invalid_argument);
}

TEST_CASE("config validation") {
  const DenseTensor3 x = random_tensor(4, 3, 2, 260);
  const Matrix y = random_matrix(4, 5, 261);
  AcmtfConfig cfg;
  cfg.rank = 2;
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(fit_acmtf(x, y, cfg), std::invalid_argument);
  cfg.gamma = 1.0;
  cfg.beta = -1.0;
  CHECK_THROWS_AS(fit_acmtf(x, y, cfg), std::invalid_argument);
  cfg.beta = 1e-3;
  cfg.l1_epsilon = 0.0;
  CHECK_THROWS_AS(fit_acmtf(x, y, cfg), std::invalid_argument);
}

}  // TEST_SUITE
