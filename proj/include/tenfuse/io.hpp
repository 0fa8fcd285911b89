#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tenfuse/acmtf.hpp"
#include "tenfuse/cp.hpp"
#include "tenfuse/kruskal.hpp"
#include "tenfuse/preprocess.hpp"
#include "tenfuse/stats.hpp"
#include "tenfuse/synthetic.hpp"
#include "tenfuse/tensor.hpp"

namespace tenfuse {

/// File parse/format failure; commands report these as data errors.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal form that round-trips the double exactly.
std::string format_full(double v);

// --- primitive file formats -------------------------------------------------
//
// TensorFile:  header `tensor3 I J K`, then I*J*K whitespace-separated
//              values in first-index-fastest order.  Lines starting with `#`
//              are comments; the writer records mode names in one.
// MatrixFile:  header `matrix ROWS COLS`, then values row-major.
// Labels file: one `0` or `1` per line, line i = subject i.
// Vector file: one value per line.

DenseTensor3 read_tensor_file(const std::filesystem::path& path);
void write_tensor_file(const std::filesystem::path& path,
                       const DenseTensor3& t);

Matrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const Matrix& m);

GroupLabels read_labels_file(const std::filesystem::path& path);
void write_labels_file(const std::filesystem::path& path,
                       const GroupLabels& labels);

Vector read_vector_file(const std::filesystem::path& path);
void write_vector_file(const std::filesystem::path& path, const Vector& v);

// --- synthetic spec config ---------------------------------------------------
//
// Flat `key = value` text; per-component lists are comma-separated.  Keys:
// subjects, time_samples, electrodes, voxels, rank, lambda, sigma,
// in_tensor, in_matrix, group_shift, noise_tensor, noise_matrix, n_group0,
// smooth_time, seed.

SynthSpec read_synth_spec(const std::filesystem::path& path);
void write_synth_spec(const std::filesystem::path& path, const SynthSpec& spec);

// --- result bundles -----------------------------------------------------------

void write_preprocess_record(const std::filesystem::path& path,
                             const PreprocessRecord& record);

/// Fit reports as key-value text with nested start/component lists; the
/// same text goes to report.txt in a bundle and to stdout in the CLI.
void write_cp_report(std::ostream& os, const CpConfig& cfg,
                     const KruskalModel& model, const FitReport& report,
                     const std::vector<ComponentSignificance>* significance);
void write_acmtf_report(std::ostream& os, const AcmtfConfig& cfg,
                        const CoupledModel& model, const FitReport& report,
                        const std::vector<ComponentLabel>* labels,
                        const std::vector<ComponentSignificance>* significance);

/// Writes factor matrices, weights, per-component time traces, the
/// preprocessing records and report.txt into `dir` (created if needed).
/// Reloading the factor files and recomputing the objective on the same
/// (preprocessed) data reproduces the report's model_objective.
void write_cp_bundle(const std::filesystem::path& dir, const KruskalModel& model,
                     const FitReport& report, const CpConfig& cfg,
                     const std::vector<ComponentSignificance>* significance,
                     const PreprocessRecord* tensor_record);

void write_acmtf_bundle(const std::filesystem::path& dir,
                        const CoupledModel& model, const FitReport& report,
                        const AcmtfConfig& cfg,
                        const std::vector<ComponentLabel>* labels,
                        const std::vector<ComponentSignificance>* significance,
                        const PreprocessRecord* tensor_record,
                        const PreprocessRecord* matrix_record);

}  // namespace tenfuse
