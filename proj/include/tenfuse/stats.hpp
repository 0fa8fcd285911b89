#pragma once

#include <vector>

#include "tenfuse/kruskal.hpp"
#include "tenfuse/tensor.hpp"

namespace tenfuse {

/// Per-subject group membership, aligned to the tensor's first-mode index.
struct GroupLabels {
  std::vector<int> labels;  // 0 or 1 per subject

  int size() const { return static_cast<int>(labels.size()); }
  int count(int group) const;
  /// Throws unless every label is 0/1 and both groups are nonempty.
  void validate() const;
};

enum class TTestKind { pooled, welch };

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Unpaired two-sample t-test of group 0 against group 1 (t > 0 when group 0
/// has the larger mean).  The default is the pooled-variance Student test
/// with df = n0 + n1 - 2; Welch's test is available behind the flag.
/// Two-sided p via the regularized incomplete beta function.
TTestResult two_sample_ttest(const Vector& values, const GroupLabels& labels,
                             TTestKind kind = TTestKind::pooled);

struct ComponentSignificance {
  int component = 0;  // 1-based
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double p_bonferroni = 1.0;  // min(1, R * p)
  bool significant_raw = false;         // p < 0.05
  bool significant_bonferroni = false;  // p_bonferroni < 0.05
};

/// Tests every column of the subjects-mode factor for a group difference,
/// with Bonferroni adjustment over the R components.
std::vector<ComponentSignificance> significance_report(
    const Matrix& subject_factor, const GroupLabels& labels,
    TTestKind kind = TTestKind::pooled);

inline std::vector<ComponentSignificance> significance_report(
    const KruskalModel& m, const GroupLabels& labels,
    TTestKind kind = TTestKind::pooled) {
  return significance_report(m.A, labels, kind);
}

inline std::vector<ComponentSignificance> significance_report(
    const CoupledModel& m, const GroupLabels& labels,
    TTestKind kind = TTestKind::pooled) {
  return significance_report(m.A, labels, kind);
}

/// I_x(a, b) by the standard continued-fraction evaluation; absolute
/// accuracy well under 1e-10 over the arguments used by the t-test.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability of Student's t at |t| with df degrees of
/// freedom: I_{df/(df+t^2)}(df/2, 1/2).
double students_t_two_sided_p(double t, double df);

}  // namespace tenfuse
