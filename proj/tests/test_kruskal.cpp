#include <doctest.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "tenfuse/kruskal.hpp"
#include "test_support.hpp"

using namespace tenfuse;
using test_support::random_coupled;
using test_support::random_kruskal;

namespace {

KruskalModel basis_model() {
  KruskalModel m;
  m.weights = Vector::Constant(1, 2.0);
  m.A = Matrix::Zero(3, 1);
  m.B = Matrix::Zero(4, 1);
  m.C = Matrix::Zero(2, 1);
  m.A(0, 0) = m.B(0, 0) = m.C(0, 0) = 1.0;
  return m;
}

}  // namespace

TEST_SUITE("kruskal") {

TEST_CASE("reconstruct_tensor of a basis rank-1 model") {
  const DenseTensor3 t = reconstruct_tensor(basis_model());
  CHECK(t(0, 0, 0) == 2.0);
  double sum = 0.0;
  for (double v : t.values()) sum += std::abs(v);
  CHECK(sum == 2.0);
}

TEST_CASE("reconstruct_tensor with zero weights is the zero tensor") {
  KruskalModel m = random_kruskal(3, 4, 2, 2, 5);
  m.weights.setZero();
  const DenseTensor3 t = reconstruct_tensor(m);
  for (double v : t.values()) CHECK(v == 0.0);
}

TEST_CASE("reconstruct_tensor matches the triple-loop oracle") {
  const KruskalModel m = random_kruskal(4, 5, 6, 3, 6);
  const DenseTensor3 got = reconstruct_tensor(m);
  const DenseTensor3 want = test_support::reconstruct_oracle(m);
  CHECK(test_support::max_abs_diff(got, want) <=
        1e-13 * frobenius_norm(want));
}

TEST_CASE("reconstruct_matrix closed forms and oracle") {
  CoupledModel m = random_coupled(4, 3, 2, 5, 2, 7);
  SUBCASE("zero sigma gives the zero matrix") {
    m.matrix_weights.setZero();
    CHECK(reconstruct_matrix(m).isZero(0.0));
  }
  SUBCASE("single basis entry") {
    CoupledModel e = m;
    e.tensor_weights = Vector::Ones(1);
    e.matrix_weights = Vector::Constant(1, 3.0);
    e.A = Matrix::Zero(4, 1);
    e.B = Matrix::Zero(3, 1);
    e.C = Matrix::Zero(2, 1);
    e.V = Matrix::Zero(5, 1);
    e.A(0, 0) = 1.0;
    e.V(1, 0) = 1.0;
    e.B(0, 0) = e.C(0, 0) = 1.0;
    const Matrix y = reconstruct_matrix(e);
    CHECK(y(0, 1) == 3.0);
    CHECK(y.cwiseAbs().sum() == 3.0);
  }
  SUBCASE("double-loop oracle") {
    CHECK(test_support::rel_error(reconstruct_matrix(m),
                                  test_support::coupled_matrix_oracle(m)) <=
          1e-13);
  }
}

TEST_CASE("normalize scales columns and folds norms into the weights") {
  KruskalModel m;
  m.weights = Vector::Ones(1);
  m.A = (Matrix(3, 1) << 3.0, 4.0, 0.0).finished();
  m.B = Matrix::Zero(2, 1);
  m.C = Matrix::Zero(2, 1);
  m.B(0, 0) = 2.0;  // norm 2
  m.C(1, 0) = 1.0;  // norm 1
  const KruskalModel n = normalize(m);
  CHECK(n.A(0, 0) == doctest::Approx(0.6));
  CHECK(n.A(1, 0) == doctest::Approx(0.8));
  CHECK(n.A(2, 0) == 0.0);
  CHECK(n.weights(0) == doctest::Approx(5.0 * 2.0 * 1.0));
}

TEST_CASE("normalize is idempotent and leaves exact-unit models unchanged") {
  const KruskalModel m = basis_model();
  const KruskalModel once = normalize(m);
  CHECK(once.weights == m.weights);  // unit basis columns: nothing to fold
  const KruskalModel twice = normalize(once);
  CHECK(twice.weights == once.weights);
  CHECK(twice.A == once.A);

  const KruskalModel r1 = normalize(random_kruskal(4, 3, 5, 2, 8));
  const KruskalModel r2 = normalize(r1);
  CHECK((r2.weights - r1.weights).cwiseAbs().maxCoeff() <=
        1e-14 * r1.weights.cwiseAbs().maxCoeff());
  for (int r = 0; r < r1.rank(); ++r) {
    CHECK(r1.A.col(r).norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r1.B.col(r).norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r1.C.col(r).norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("normalize preserves the reconstruction") {
  const KruskalModel m = random_kruskal(4, 5, 3, 3, 9);
  const DenseTensor3 before = reconstruct_tensor(m);
  const DenseTensor3 after = reconstruct_tensor(normalize(m));
  CHECK(test_support::max_abs_diff(before, after) <=
        1e-12 * frobenius_norm(before));

  const CoupledModel c = random_coupled(4, 5, 3, 6, 2, 10);
  const CoupledModel cn = normalize(c);
  CHECK(test_support::max_abs_diff(reconstruct_tensor(c),
                                   reconstruct_tensor(cn)) <=
        1e-12 * frobenius_norm(reconstruct_tensor(c)));
  CHECK(test_support::rel_error(reconstruct_matrix(cn),
                                reconstruct_matrix(c)) <= 1e-12);
  for (int r = 0; r < cn.rank(); ++r)
    CHECK(cn.V.col(r).norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("normalize rejects a zero column, naming mode and component") {
  KruskalModel m = random_kruskal(4, 3, 2, 2, 11);
  m.B.col(1).setZero();
  try {
    normalize(m);
    FAIL("expected a degenerate-component error");
  } catch (const std::domain_error& e) {
    const std::string message = e.what();
    CHECK(message.find("B") != std::string::npos);
    CHECK(message.find("2") != std::string::npos);
  }
}

TEST_CASE("reconstruct is invariant under simultaneous column permutation") {
  const KruskalModel m = random_kruskal(3, 4, 5, 3, 12);
  const std::vector<int> perm = {2, 0, 1};
  KruskalModel p = m;
  for (int r = 0; r < 3; ++r) {
    p.weights(r) = m.weights(perm[r]);
    p.A.col(r) = m.A.col(perm[r]);
    p.B.col(r) = m.B.col(perm[r]);
    p.C.col(r) = m.C.col(perm[r]);
  }
  CHECK(reconstruct_tensor(p).values() == reconstruct_tensor(m).values());
}

TEST_CASE("reconstruct is invariant under even sign flips, lambda absorbs odd ones") {
  const KruskalModel m = random_kruskal(3, 4, 5, 2, 13);
  KruskalModel even = m;
  even.A.col(0) = -even.A.col(0);
  even.C.col(0) = -even.C.col(0);
  CHECK(reconstruct_tensor(even).values() == reconstruct_tensor(m).values());

  KruskalModel odd = m;
  odd.B.col(1) = -odd.B.col(1);
  odd.weights(1) = -odd.weights(1);
  CHECK(reconstruct_tensor(odd).values() == reconstruct_tensor(m).values());
}

TEST_CASE("factor_match_score identity and symmetry") {
  const KruskalModel m = random_kruskal(4, 5, 3, 3, 14);
  const FmsResult self = factor_match_score(m, m);
  CHECK(self.score == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(self.permutation == std::vector<int>{0, 1, 2});

  const KruskalModel other = random_kruskal(4, 5, 3, 3, 15);
  CHECK(factor_match_score(m, other).score ==
        doctest::Approx(factor_match_score(other, m).score).epsilon(1e-12));
}

TEST_CASE("factor_match_score recovers a planted permutation with sign flips") {
  const KruskalModel m = random_kruskal(4, 5, 3, 3, 16);
  const std::vector<int> perm = {1, 2, 0};  // m2 column perm[r] is m's column r
  KruskalModel shuffled = m;
  for (int r = 0; r < 3; ++r) {
    shuffled.weights(perm[r]) = m.weights(r);
    shuffled.A.col(perm[r]) = m.A.col(r);
    shuffled.B.col(perm[r]) = m.B.col(r);
    shuffled.C.col(perm[r]) = m.C.col(r);
  }
  // paired sign flips across two modes keep the component intact
  shuffled.A.col(0) = -shuffled.A.col(0);
  shuffled.C.col(0) = -shuffled.C.col(0);
  const FmsResult r = factor_match_score(m, shuffled);
  CHECK(r.score == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.permutation == perm);
}

TEST_CASE("factor_match_score drops when a column is replaced orthogonally") {
  KruskalModel m = random_kruskal(6, 5, 4, 3, 17);
  m = normalize(m);
  KruskalModel damaged = m;
  // Gram-Schmidt a vector orthogonal to column 0 of A.
  Vector v = Vector::Zero(6);
  v(1) = 1.0;
  v -= v.dot(m.A.col(0)) * m.A.col(0);
  v.normalize();
  damaged.A.col(0) = v;
  const double greedy = factor_match_score(m, damaged).score;
  const double exhaustive = test_support::fms_exhaustive(m, damaged);
  CHECK(greedy <= 0.5);
  CHECK(greedy == doctest::Approx(exhaustive).epsilon(1e-12));
}

TEST_CASE("greedy FMS agrees with the exhaustive oracle on perturbed copies") {
  for (int seed = 20; seed < 26; ++seed) {
    const KruskalModel m = normalize(random_kruskal(6, 7, 5, 3, seed));
    KruskalModel perturbed = m;
    tenfuse::GaussianStream rng(seed + 1000);
    Matrix noise(6, 3);
    rng.fill_gaussian(noise);
    perturbed.A += 0.05 * noise;
    const double greedy = factor_match_score(m, perturbed).score;
    const double exhaustive = test_support::fms_exhaustive(m, perturbed);
    CHECK(greedy == doctest::Approx(exhaustive).epsilon(1e-12));
  }
}

TEST_CASE("factor_match_score validates shapes") {
  const KruskalModel m = random_kruskal(4, 5, 3, 2, 27);
  CHECK_THROWS_AS(factor_match_score(m, random_kruskal(4, 5, 3, 3, 28)),
                  std::invalid_argument);
  CHECK_THROWS_AS(factor_match_score(m, random_kruskal(5, 5, 3, 2, 29)),
                  std::invalid_argument);
}

TEST_CASE("congruence_check closed forms and oracle") {
  KruskalModel ortho;
  ortho.weights = Vector::Ones(2);
  ortho.A = Matrix::Identity(3, 2);
  ortho.B = Matrix::Identity(4, 2);
  ortho.C = Matrix::Identity(2, 2);
  CHECK(congruence_check(ortho) == 0.0);

  KruskalModel twin = ortho;
  twin.A.col(1) = twin.A.col(0);
  twin.B.col(1) = twin.B.col(0);
  twin.C.col(1) = twin.C.col(0);
  CHECK(congruence_check(twin) == doctest::Approx(1.0));

  const KruskalModel m = normalize(random_kruskal(5, 6, 4, 3, 30));
  double oracle = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int s = 0; s < 3; ++s) {
      if (r == s) continue;
      double c = std::abs(m.A.col(r).dot(m.A.col(s))) *
                 std::abs(m.B.col(r).dot(m.B.col(s))) *
                 std::abs(m.C.col(r).dot(m.C.col(s)));
      oracle = std::max(oracle, c);
    }
  CHECK(congruence_check(m) == doctest::Approx(oracle).epsilon(1e-13));
}

}  // TEST_SUITE
