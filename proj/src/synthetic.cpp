#include "tenfuse/synthetic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tenfuse/rng.hpp"

namespace tenfuse {

namespace {

// Random smooth curve: a low-order Fourier series with 1/k-decaying
// coefficient scales, evaluated on [0, 1].  Mimics ERP-like morphology
// without claiming physiological realism.
void fill_smooth_curves(Matrix& b, GaussianStream& rng) {
  constexpr int kHarmonics = 5;
  const int n = static_cast<int>(b.rows());
  for (Eigen::Index r = 0; r < b.cols(); ++r) {
    double cos_coef[kHarmonics], sin_coef[kHarmonics];
    for (int h = 0; h < kHarmonics; ++h) {
      cos_coef[h] = rng.gaussian() / (h + 1);
      sin_coef[h] = rng.gaussian() / (h + 1);
    }
    for (int j = 0; j < n; ++j) {
      const double t = static_cast<double>(j) / n;
      double v = 0.0;
      for (int h = 0; h < kHarmonics; ++h) {
        const double w = 2.0 * M_PI * (h + 1) * t;
        v += cos_coef[h] * std::cos(w) + sin_coef[h] * std::sin(w);
      }
      b(j, r) = v;
    }
  }
}

// Adds relative-Frobenius Gaussian noise in place:
// values += eta * ||values|| * N / ||N||.
void add_noise(std::vector<double>& values, double eta, GaussianStream& rng) {
  if (eta == 0.0) return;
  const Eigen::Index n = static_cast<Eigen::Index>(values.size());
  Vector noise(n);
  for (Eigen::Index i = 0; i < n; ++i) noise(i) = rng.gaussian();
  Eigen::Map<Vector> signal(values.data(), n);
  const double scale = eta * signal.norm() / noise.norm();
  signal += scale * noise;
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.subjects < 1 || spec.time_samples < 1 || spec.electrodes < 1 ||
      spec.voxels < 1)
    throw std::domain_error("SynthSpec: all extents must be >= 1");
  if (spec.rank < 1) throw std::domain_error("SynthSpec: rank must be >= 1");
  if (static_cast<int>(spec.components.size()) != spec.rank)
    throw std::domain_error(
        "SynthSpec: component list length must equal rank");
  if (spec.noise_tensor < 0.0 || spec.noise_matrix < 0.0)
    throw std::domain_error("SynthSpec: noise levels must be >= 0");
  if (spec.n_group0 < 1 || spec.n_group0 >= spec.subjects)
    throw std::domain_error("SynthSpec: both groups must be nonempty");
  bool any_tensor = false, any_matrix = false;
  for (std::size_t r = 0; r < spec.components.size(); ++r) {
    const ComponentSpec& c = spec.components[r];
    if (!c.in_tensor && c.lambda != 0.0)
      throw std::domain_error("SynthSpec: component " + std::to_string(r + 1) +
                              " is not in the tensor but has lambda != 0");
    if (!c.in_matrix && c.sigma != 0.0)
      throw std::domain_error("SynthSpec: component " + std::to_string(r + 1) +
                              " is not in the matrix but has sigma != 0");
    if (c.in_tensor && c.lambda == 0.0)
      throw std::domain_error("SynthSpec: component " + std::to_string(r + 1) +
                              " is in the tensor but has lambda == 0");
    if (c.in_matrix && c.sigma == 0.0)
      throw std::domain_error("SynthSpec: component " + std::to_string(r + 1) +
                              " is in the matrix but has sigma == 0");
    any_tensor = any_tensor || c.in_tensor;
    any_matrix = any_matrix || c.in_matrix;
  }
  if (!any_tensor || !any_matrix)
    throw std::domain_error(
        "SynthSpec: each dataset needs at least one component");
}

SynthData generate(const SynthSpec& spec) {
  validate(spec);
  const int I = spec.subjects, J = spec.time_samples, K = spec.electrodes,
            M = spec.voxels;
  const int R = spec.rank;

  GaussianStream rng(mix_seed(spec.seed, 0x5f4e7448));  // factor stream

  CoupledModel truth;
  truth.tensor_weights.resize(R);
  truth.matrix_weights.resize(R);
  for (int r = 0; r < R; ++r) {
    truth.tensor_weights(r) = spec.components[r].lambda;
    truth.matrix_weights(r) = spec.components[r].sigma;
  }

  truth.A.resize(I, R);
  rng.fill_gaussian(truth.A);
  for (int r = 0; r < R; ++r) {
    const double shift = spec.components[r].group_shift;
    if (shift != 0.0)
      for (int i = spec.n_group0; i < I; ++i) truth.A(i, r) += shift;
  }

  truth.B.resize(J, R);
  if (spec.smooth_time)
    fill_smooth_curves(truth.B, rng);
  else
    rng.fill_gaussian(truth.B);

  truth.C.resize(K, R);
  rng.fill_gaussian(truth.C);
  truth.V.resize(M, R);
  rng.fill_gaussian(truth.V);

  // Unit columns, raw scales folded into the weights; zero planted weights
  // stay exactly zero.
  truth = normalize(std::move(truth));

  DenseTensor3 signal_x = reconstruct_tensor(truth);
  Matrix y = reconstruct_matrix(truth);

  std::vector<double> x_values = signal_x.values();
  GaussianStream noise_rng_x(mix_seed(spec.seed, 0x6e6f6973));
  add_noise(x_values, spec.noise_tensor, noise_rng_x);

  std::vector<double> y_values(y.data(), y.data() + y.size());
  GaussianStream noise_rng_y(mix_seed(spec.seed, 0x6e6f6974));
  add_noise(y_values, spec.noise_matrix, noise_rng_y);
  Eigen::Map<const Matrix> y_noisy(y_values.data(), I, M);

  GroupLabels labels;
  labels.labels.assign(I, 0);
  for (int i = spec.n_group0; i < I; ++i) labels.labels[i] = 1;

  return SynthData{
      DenseTensor3(I, J, K, std::move(x_values),
                   {"subjects", "time", "electrodes"}),
      Matrix(y_noisy), std::move(truth), std::move(labels)};
}

SynthSpec paper_shaped_preset() {
  SynthSpec spec;
  spec.subjects = 38;
  spec.time_samples = 451;
  spec.electrodes = 11;
  spec.voxels = 600;
  spec.rank = 3;
  spec.components.assign(3, ComponentSpec{});
  spec.components[0].group_shift = 1.5;
  spec.noise_tensor = 0.2;
  spec.noise_matrix = 0.2;
  spec.n_group0 = 22;
  spec.smooth_time = true;
  spec.seed = 1;
  return spec;
}

}  // namespace tenfuse
