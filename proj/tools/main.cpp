// tenfuse command-line interface.
//
// Subcommands: synth (ground-truth coupled data), cp (CP fit), acmtf
// (coupled fit with shared/unshared classification), stats (group-difference
// table on a factor file).  Exit codes: 0 success, 2 argument error, 3 data
// error, 4 fit failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tenfuse/acmtf.hpp"
#include "tenfuse/cp.hpp"
#include "tenfuse/io.hpp"
#include "tenfuse/preprocess.hpp"
#include "tenfuse/stats.hpp"
#include "tenfuse/synthetic.hpp"

namespace {

using namespace tenfuse;

constexpr int kExitArgs = 2;
constexpr int kExitData = 3;
constexpr int kExitFit = 4;

struct FitFlags {
  int inits = 32;
  std::uint64_t seed = 0;
  double tol_rel_f = 1e-10;
  double grad_tol = 1e-9;
  int max_iters = 10000;
  int threads = 0;
  bool no_preprocess = false;
  bool welch = false;
  std::string out;
  std::string groups;
};

void add_fit_flags(CLI::App* cmd, FitFlags& flags) {
  cmd->add_option("--inits", flags.inits, "Number of random starts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", flags.seed, "Base random seed")
      ->capture_default_str();
  cmd->add_option("--tol-rel-f", flags.tol_rel_f,
                  "Relative objective-change stopping tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--grad-tol", flags.grad_tol,
                  "Scaled gradient-norm stopping tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iters", flags.max_iters,
                  "Iteration cap per start")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--threads", flags.threads,
                  "Worker threads for the starts (0 = hardware)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_flag("--no-preprocess", flags.no_preprocess,
                "Skip centering/scaling");
  cmd->add_flag("--welch", flags.welch,
                "Welch t-test instead of pooled variance");
  cmd->add_option("--out", flags.out, "Result bundle directory");
  cmd->add_option("--groups", flags.groups,
                  "Group labels file (enables significance testing)");
}

OptimizerConfig optimizer_config(const FitFlags& flags) {
  OptimizerConfig opt;
  opt.max_iterations = flags.max_iters;
  opt.rel_f_tol = flags.tol_rel_f;
  opt.grad_tol = flags.grad_tol;
  return opt;
}

// The paper's protocol: center the tensor across the time mode (2), then
// scale within the subjects mode (1).
PreprocessRecord preprocess_tensor(DenseTensor3& tensor) {
  PreprocessRecord record;
  auto [centered, center_rec] = center_tensor_across_mode(tensor, 2);
  record.append(center_rec);
  auto [scaled, scale_rec] = scale_tensor_within_mode(centered, 1);
  record.append(scale_rec);
  tensor = std::move(scaled);
  return record;
}

std::optional<GroupLabels> load_groups(const FitFlags& flags) {
  if (flags.groups.empty()) return std::nullopt;
  GroupLabels labels = read_labels_file(flags.groups);
  labels.validate();
  return labels;
}

int run_cp(const std::string& input, int rank, const FitFlags& flags) {
  DenseTensor3 tensor = read_tensor_file(input);
  PreprocessRecord record;
  if (!flags.no_preprocess) record = preprocess_tensor(tensor);

  CpConfig cfg;
  cfg.rank = rank;
  cfg.n_starts = flags.inits;
  cfg.seed = flags.seed;
  cfg.optimizer = optimizer_config(flags);
  cfg.n_threads = flags.threads;

  auto [model, report] = fit_cp(tensor, cfg);

  std::optional<std::vector<ComponentSignificance>> significance;
  if (auto labels = load_groups(flags))
    significance = significance_report(
        model, *labels, flags.welch ? TTestKind::welch : TTestKind::pooled);

  const auto* sig = significance ? &*significance : nullptr;
  if (!flags.out.empty())
    write_cp_bundle(flags.out, model, report, cfg, sig, &record);
  write_cp_report(std::cout, cfg, model, report, sig);
  return 0;
}

int run_acmtf(const std::string& tensor_path, const std::string& matrix_path,
              int rank, double beta, double gamma, double share_threshold,
              const FitFlags& flags) {
  DenseTensor3 tensor = read_tensor_file(tensor_path);
  Matrix matrix = read_matrix_file(matrix_path);
  if (tensor.extent(1) != matrix.rows())
    throw IoError("tensor and matrix disagree on the subjects mode: " +
                  std::to_string(tensor.extent(1)) + " vs " +
                  std::to_string(matrix.rows()));

  PreprocessRecord tensor_record, matrix_record;
  if (!flags.no_preprocess) {
    tensor_record = preprocess_tensor(tensor);
    auto [scaled, rec] = center_and_scale_matrix_rows(matrix);
    matrix = std::move(scaled);
    matrix_record = rec;
  }

  AcmtfConfig cfg;
  cfg.rank = rank;
  cfg.beta = beta;
  cfg.gamma = gamma;
  cfg.share_threshold = share_threshold;
  cfg.n_starts = flags.inits;
  cfg.seed = flags.seed;
  cfg.optimizer = optimizer_config(flags);
  cfg.n_threads = flags.threads;

  auto [model, report] = fit_acmtf(tensor, matrix, cfg);
  const auto labels = classify_components(model, cfg.share_threshold);

  std::optional<std::vector<ComponentSignificance>> significance;
  if (auto groups = load_groups(flags))
    significance = significance_report(
        model, *groups, flags.welch ? TTestKind::welch : TTestKind::pooled);

  const auto* sig = significance ? &*significance : nullptr;
  if (!flags.out.empty())
    write_acmtf_bundle(flags.out, model, report, cfg, &labels, sig,
                       &tensor_record, &matrix_record);
  write_acmtf_report(std::cout, cfg, model, report, &labels, sig);
  return 0;
}

int run_synth(const std::string& spec_path, bool preset_paper,
              const std::string& out_dir) {
  SynthSpec spec =
      preset_paper ? paper_shaped_preset() : read_synth_spec(spec_path);
  SynthData data = generate(spec);

  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  fs::create_directories(dir / "truth");
  write_tensor_file(dir / "tensor.t3", data.tensor);
  write_matrix_file(dir / "matrix.mat", data.matrix);
  write_labels_file(dir / "labels.txt", data.labels);
  write_synth_spec(dir / "spec.cfg", spec);
  write_matrix_file(dir / "truth" / "factor_A.mat", data.truth.A);
  write_matrix_file(dir / "truth" / "factor_B.mat", data.truth.B);
  write_matrix_file(dir / "truth" / "factor_C.mat", data.truth.C);
  write_matrix_file(dir / "truth" / "factor_V.mat", data.truth.V);
  write_vector_file(dir / "truth" / "weights_lambda.txt",
                    data.truth.tensor_weights);
  write_vector_file(dir / "truth" / "weights_sigma.txt",
                    data.truth.matrix_weights);
  std::cout << "wrote " << (dir / "tensor.t3").string() << " ("
            << data.tensor.extent(1) << "x" << data.tensor.extent(2) << "x"
            << data.tensor.extent(3) << "), " << (dir / "matrix.mat").string()
            << " (" << data.matrix.rows() << "x" << data.matrix.cols()
            << ")\n";
  return 0;
}

int run_stats(const std::string& factors_path, const std::string& groups_path,
              bool welch) {
  const Matrix factors = read_matrix_file(factors_path);
  GroupLabels labels = read_labels_file(groups_path);
  labels.validate();
  const auto significance = significance_report(
      factors, labels, welch ? TTestKind::welch : TTestKind::pooled);
  std::cout << "# component t df p p_bonferroni significant_raw "
               "significant_bonferroni\n";
  for (const auto& cs : significance)
    std::cout << cs.component << ' ' << format_full(cs.t) << ' '
              << format_full(cs.df) << ' ' << format_full(cs.p) << ' '
              << format_full(cs.p_bonferroni) << ' ' << cs.significant_raw
              << ' ' << cs.significant_bonferroni << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CP tensor decomposition and coupled matrix-tensor fusion"};
  app.require_subcommand(1);

  // cp
  auto* cp_cmd = app.add_subcommand("cp", "Fit a CP model to a tensor file");
  std::string cp_input;
  int cp_rank = 3;
  FitFlags cp_flags;
  cp_cmd->add_option("--input", cp_input, "TensorFile to model")->required();
  cp_cmd->add_option("--rank", cp_rank, "Number of components")
      ->required()
      ->check(CLI::PositiveNumber);
  add_fit_flags(cp_cmd, cp_flags);

  // acmtf
  auto* acmtf_cmd = app.add_subcommand(
      "acmtf", "Jointly factorize a tensor and a coupled matrix");
  std::string acmtf_tensor, acmtf_matrix;
  int acmtf_rank = 10;
  double acmtf_beta = 1e-3, acmtf_gamma = 1.0, acmtf_share = 0.05;
  FitFlags acmtf_flags;
  acmtf_cmd->add_option("--tensor", acmtf_tensor, "TensorFile")->required();
  acmtf_cmd->add_option("--matrix", acmtf_matrix, "MatrixFile coupled in mode 1")
      ->required();
  acmtf_cmd->add_option("--rank", acmtf_rank, "Number of components")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  acmtf_cmd->add_option("--beta", acmtf_beta, "Weight 1-norm penalty")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  acmtf_cmd->add_option("--gamma", acmtf_gamma, "Unit-norm penalty weight")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  acmtf_cmd
      ->add_option("--share-threshold", acmtf_share,
                   "Relative weight below which a component is unshared")
      ->check(CLI::Range(1e-12, 1.0))
      ->capture_default_str();
  add_fit_flags(acmtf_cmd, acmtf_flags);

  // synth
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate ground-truth coupled data");
  std::string synth_spec, synth_out, synth_preset;
  auto* spec_opt =
      synth_cmd->add_option("--spec", synth_spec, "SynthSpec config file");
  auto* preset_opt = synth_cmd->add_option(
      "--preset", synth_preset, "Named preset ('paper': 38x451x11 + 38x600)");
  spec_opt->excludes(preset_opt);
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  // stats
  auto* stats_cmd = app.add_subcommand(
      "stats", "Group-difference table for a subjects-mode factor file");
  std::string stats_factors, stats_groups;
  bool stats_welch = false;
  stats_cmd->add_option("--factors", stats_factors, "MatrixFile of loadings")
      ->required();
  stats_cmd->add_option("--groups", stats_groups, "Labels file")->required();
  stats_cmd->add_flag("--welch", stats_welch,
                      "Welch t-test instead of pooled variance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitArgs;
  }

  try {
    if (cp_cmd->parsed()) return run_cp(cp_input, cp_rank, cp_flags);
    if (acmtf_cmd->parsed())
      return run_acmtf(acmtf_tensor, acmtf_matrix, acmtf_rank, acmtf_beta,
                       acmtf_gamma, acmtf_share, acmtf_flags);
    if (synth_cmd->parsed()) {
      if (synth_preset.empty() && synth_spec.empty()) {
        std::cerr << "synth: either --spec or --preset is required\n";
        return kExitArgs;
      }
      if (!synth_preset.empty() && synth_preset != "paper") {
        std::cerr << "synth: unknown preset '" << synth_preset << "'\n";
        return kExitArgs;
      }
      return run_synth(synth_spec, !synth_preset.empty(), synth_out);
    }
    if (stats_cmd->parsed())
      return run_stats(stats_factors, stats_groups, stats_welch);
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return kExitFit;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::domain_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
