#include "tenfuse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tenfuse {

int GroupLabels::count(int group) const {
  return static_cast<int>(std::count(labels.begin(), labels.end(), group));
}

void GroupLabels::validate() const {
  for (int l : labels)
    if (l != 0 && l != 1)
      throw std::invalid_argument("GroupLabels: labels must be 0 or 1");
  if (count(0) == 0 || count(1) == 0)
    throw std::invalid_argument("GroupLabels: both groups must be nonempty");
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

struct GroupMoments {
  int n = 0;
  double mean = 0.0;
  double ss = 0.0;  // sum of squared deviations from the mean
};

GroupMoments moments(const Vector& values, const GroupLabels& labels,
                     int group) {
  GroupMoments m;
  double sum = 0.0;
  for (int i = 0; i < labels.size(); ++i)
    if (labels.labels[i] == group) {
      sum += values(i);
      ++m.n;
    }
  m.mean = sum / m.n;
  for (int i = 0; i < labels.size(); ++i)
    if (labels.labels[i] == group) {
      const double d = values(i) - m.mean;
      m.ss += d * d;
    }
  return m;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("regularized_incomplete_beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                std::lgamma(b) + a * std::log(x) +
                                b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double students_t_two_sided_p(double t, double df) {
  if (!(df > 0.0))
    throw std::invalid_argument("students_t_two_sided_p: df must be > 0");
  if (t == 0.0) return 1.0;
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

TTestResult two_sample_ttest(const Vector& values, const GroupLabels& labels,
                             TTestKind kind) {
  labels.validate();
  if (values.size() != labels.size())
    throw std::invalid_argument(
        "two_sample_ttest: value count does not match label count");
  const GroupMoments g0 = moments(values, labels, 0);
  const GroupMoments g1 = moments(values, labels, 1);
  if (g0.n < 2 || g1.n < 2)
    throw std::domain_error("two_sample_ttest: each group needs >= 2 members");

  TTestResult result;
  if (kind == TTestKind::pooled) {
    result.df = g0.n + g1.n - 2;
    const double pooled_var = (g0.ss + g1.ss) / result.df;
    if (pooled_var == 0.0)
      throw std::domain_error("two_sample_ttest: both groups have zero variance");
    result.t = (g0.mean - g1.mean) /
               std::sqrt(pooled_var * (1.0 / g0.n + 1.0 / g1.n));
  } else {
    const double v0 = g0.ss / (g0.n - 1) / g0.n;  // s0^2 / n0
    const double v1 = g1.ss / (g1.n - 1) / g1.n;
    const double se2 = v0 + v1;
    if (se2 == 0.0)
      throw std::domain_error("two_sample_ttest: both groups have zero variance");
    result.t = (g0.mean - g1.mean) / std::sqrt(se2);
    result.df = se2 * se2 / (v0 * v0 / (g0.n - 1) + v1 * v1 / (g1.n - 1));
  }
  result.p = students_t_two_sided_p(result.t, result.df);
  return result;
}

std::vector<ComponentSignificance> significance_report(
    const Matrix& subject_factor, const GroupLabels& labels, TTestKind kind) {
  if (subject_factor.rows() != labels.size())
    throw std::invalid_argument(
        "significance_report: factor rows do not match label count");
  const int R = static_cast<int>(subject_factor.cols());
  std::vector<ComponentSignificance> out;
  out.reserve(R);
  for (int r = 0; r < R; ++r) {
    const TTestResult tt = two_sample_ttest(subject_factor.col(r), labels, kind);
    ComponentSignificance cs;
    cs.component = r + 1;
    cs.t = tt.t;
    cs.df = tt.df;
    cs.p = tt.p;
    cs.p_bonferroni = std::min(1.0, R * tt.p);
    cs.significant_raw = cs.p < 0.05;
    cs.significant_bonferroni = cs.p_bonferroni < 0.05;
    out.push_back(cs);
  }
  return out;
}

}  // namespace tenfuse
