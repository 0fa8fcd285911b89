#include "tenfuse/kruskal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tenfuse {

namespace {

void check_kruskal_shapes(const KruskalModel& m) {
  const Eigen::Index r = m.weights.size();
  if (m.A.cols() != r || m.B.cols() != r || m.C.cols() != r)
    throw std::invalid_argument(
        "KruskalModel: factors and weights disagree on rank");
}

void check_coupled_shapes(const CoupledModel& m) {
  const Eigen::Index r = m.tensor_weights.size();
  if (m.matrix_weights.size() != r || m.A.cols() != r || m.B.cols() != r ||
      m.C.cols() != r || m.V.cols() != r)
    throw std::invalid_argument(
        "CoupledModel: factors and weights disagree on rank");
}

// Per-entry rank-one products are accumulated in value-sorted order, which
// makes the reconstruction exactly invariant under simultaneous column
// permutations and compensated sign flips (the addend multiset is identical,
// so the rounding sequence is too).  Reconstruction is a reporting path, not
// part of the fit inner loop, so the sort is affordable.
double sorted_sum(std::vector<double>& products) {
  std::sort(products.begin(), products.end());
  double sum = 0.0;
  for (double p : products) sum += p;
  return sum;
}

DenseTensor3 reconstruct_impl(const Vector& weights, const Matrix& A,
                              const Matrix& B, const Matrix& C) {
  const int I = static_cast<int>(A.rows());
  const int J = static_cast<int>(B.rows());
  const int K = static_cast<int>(C.rows());
  const int R = static_cast<int>(weights.size());
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(I) * J * K);
  std::vector<double> products(R);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < J; ++j) {
      for (int i = 0; i < I; ++i) {
        for (int r = 0; r < R; ++r)
          products[r] = weights(r) * A(i, r) * B(j, r) * C(k, r);
        values.push_back(sorted_sum(products));
      }
    }
  return DenseTensor3(I, J, K, std::move(values));
}

// Unit-normalizes the columns of f, multiplying the absorbed norms into
// each weight vector in `into`.  Throws if a column is exactly zero.
void normalize_factor(Matrix& f, std::initializer_list<Vector*> into,
                      const char* mode_name, int mode_index) {
  for (Eigen::Index r = 0; r < f.cols(); ++r) {
    const double n = f.col(r).norm();
    if (n == 0.0)
      throw std::domain_error("normalize: zero column in mode " +
                              std::string(mode_name) + ", component " +
                              std::to_string(r + 1) + " (mode index " +
                              std::to_string(mode_index) + ")");
    if (n != 1.0) f.col(r) /= n;
    for (Vector* w : into) (*w)(r) *= n;
  }
}

// Makes the largest-magnitude entry of each column of `lead` positive; the
// compensating sign flip goes to every matrix in `compensate`.
void fix_signs(Matrix& lead, std::initializer_list<Matrix*> compensate) {
  for (Eigen::Index r = 0; r < lead.cols(); ++r) {
    Eigen::Index imax = 0;
    lead.col(r).cwiseAbs().maxCoeff(&imax);
    if (lead(imax, r) < 0.0) {
      lead.col(r) = -lead.col(r);
      for (Matrix* m : compensate) m->col(r) = -m->col(r);
    }
  }
}

double abs_cosine(const Eigen::Ref<const Vector>& u,
                  const Eigen::Ref<const Vector>& v) {
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::abs(u.dot(v)) / (nu * nv);
}

FmsResult fms_impl(const std::vector<const Matrix*>& f1,
                   const std::vector<const Matrix*>& f2, int rank) {
  for (std::size_t m = 0; m < f1.size(); ++m)
    if (f1[m]->rows() != f2[m]->rows())
      throw std::invalid_argument("factor_match_score: mode extent mismatch");

  // Cross-congruence: product over modes of |cos| between columns.
  Matrix cong = Matrix::Ones(rank, rank);
  for (std::size_t m = 0; m < f1.size(); ++m)
    for (int r = 0; r < rank; ++r)
      for (int s = 0; s < rank; ++s)
        cong(r, s) *= abs_cosine(f1[m]->col(r), f2[m]->col(s));

  // Greedy matching, largest congruence first.
  FmsResult result;
  result.permutation.assign(rank, -1);
  result.score = 1.0;
  std::vector<bool> row_used(rank, false), col_used(rank, false);
  for (int step = 0; step < rank; ++step) {
    int best_r = -1, best_s = -1;
    double best = -1.0;
    for (int r = 0; r < rank; ++r) {
      if (row_used[r]) continue;
      for (int s = 0; s < rank; ++s) {
        if (col_used[s]) continue;
        if (cong(r, s) > best) {
          best = cong(r, s);
          best_r = r;
          best_s = s;
        }
      }
    }
    row_used[best_r] = true;
    col_used[best_s] = true;
    result.permutation[best_r] = best_s;
    result.score = std::min(result.score, best);
  }
  return result;
}

}  // namespace

DenseTensor3 reconstruct_tensor(const KruskalModel& m) {
  check_kruskal_shapes(m);
  return reconstruct_impl(m.weights, m.A, m.B, m.C);
}

DenseTensor3 reconstruct_tensor(const CoupledModel& m) {
  check_coupled_shapes(m);
  return reconstruct_impl(m.tensor_weights, m.A, m.B, m.C);
}

Matrix reconstruct_matrix(const CoupledModel& m) {
  check_coupled_shapes(m);
  const int R = m.rank();
  Matrix out(m.A.rows(), m.V.rows());
  std::vector<double> products(R);
  for (Eigen::Index v = 0; v < m.V.rows(); ++v)
    for (Eigen::Index i = 0; i < m.A.rows(); ++i) {
      for (int r = 0; r < R; ++r)
        products[r] = m.matrix_weights(r) * m.A(i, r) * m.V(v, r);
      out(i, v) = sorted_sum(products);
    }
  return out;
}

KruskalModel normalize(KruskalModel m) {
  check_kruskal_shapes(m);
  normalize_factor(m.A, {&m.weights}, "A", 1);
  normalize_factor(m.B, {&m.weights}, "B", 2);
  normalize_factor(m.C, {&m.weights}, "C", 3);
  fix_signs(m.A, {&m.C});
  return m;
}

CoupledModel normalize(CoupledModel m) {
  check_coupled_shapes(m);
  normalize_factor(m.A, {&m.tensor_weights, &m.matrix_weights}, "A", 1);
  normalize_factor(m.B, {&m.tensor_weights}, "B", 2);
  normalize_factor(m.C, {&m.tensor_weights}, "C", 3);
  normalize_factor(m.V, {&m.matrix_weights}, "V", 4);
  fix_signs(m.A, {&m.C, &m.V});
  return m;
}

FmsResult factor_match_score(const KruskalModel& m1, const KruskalModel& m2) {
  check_kruskal_shapes(m1);
  check_kruskal_shapes(m2);
  if (m1.rank() != m2.rank())
    throw std::invalid_argument("factor_match_score: rank mismatch");
  return fms_impl({&m1.A, &m1.B, &m1.C}, {&m2.A, &m2.B, &m2.C}, m1.rank());
}

FmsResult factor_match_score(const CoupledModel& m1, const CoupledModel& m2) {
  check_coupled_shapes(m1);
  check_coupled_shapes(m2);
  if (m1.rank() != m2.rank())
    throw std::invalid_argument("factor_match_score: rank mismatch");
  return fms_impl({&m1.A, &m1.B, &m1.C, &m1.V}, {&m2.A, &m2.B, &m2.C, &m2.V},
                  m1.rank());
}

double congruence_check(const KruskalModel& m) {
  check_kruskal_shapes(m);
  double worst = 0.0;
  for (int r = 0; r < m.rank(); ++r)
    for (int s = r + 1; s < m.rank(); ++s) {
      const double c = abs_cosine(m.A.col(r), m.A.col(s)) *
                       abs_cosine(m.B.col(r), m.B.col(s)) *
                       abs_cosine(m.C.col(r), m.C.col(s));
      worst = std::max(worst, c);
    }
  return worst;
}

}  // namespace tenfuse
