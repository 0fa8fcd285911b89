#include "tenfuse/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tenfuse {

namespace fs = std::filesystem;

std::string format_full(double v) {
  char buf[40];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

bool is_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return false;  // blank
}

bool is_blank(const std::string& line) {
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

// First non-comment, non-blank line; comments may also carry mode names.
std::string read_header(std::istream& in, const fs::path& path,
                        std::array<std::string, 3>* mode_names) {
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    if (is_comment(line)) {
      if (mode_names) {
        std::istringstream ss(line);
        std::string hash, key;
        ss >> hash >> key;
        if (key == "modes:") ss >> (*mode_names)[0] >> (*mode_names)[1] >>
            (*mode_names)[2];
      }
      continue;
    }
    return line;
  }
  throw IoError(path.string() + ": missing header line");
}

// Reads exactly `count` finite doubles, skipping comment lines.
std::vector<double> read_values(std::istream& in, std::int64_t count,
                                const fs::path& path,
                                std::array<std::string, 3>* mode_names) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count));
  std::string line;
  while (std::getline(in, line)) {
    if (is_comment(line)) {
      if (mode_names) {
        std::istringstream ss(line);
        std::string hash, key;
        ss >> hash >> key;
        if (key == "modes:") ss >> (*mode_names)[0] >> (*mode_names)[1] >>
            (*mode_names)[2];
      }
      continue;
    }
    const char* p = line.c_str();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
      if (p >= end) break;
      char* next = nullptr;
      const double v = std::strtod(p, &next);
      if (next == p)
        throw IoError(path.string() + ": cannot parse value '" +
                      std::string(p) + "'");
      if (!std::isfinite(v))
        throw IoError(path.string() + ": non-finite value");
      values.push_back(v);
      p = next;
    }
  }
  if (static_cast<std::int64_t>(values.size()) != count)
    throw IoError(path.string() + ": expected " + std::to_string(count) +
                  " values, found " + std::to_string(values.size()));
  return values;
}

void write_values_block(std::ostream& out, const double* v, std::int64_t count,
                        std::int64_t per_line) {
  for (std::int64_t i = 0; i < count; ++i) {
    out << format_full(v[i]);
    out << (((i + 1) % per_line == 0 || i + 1 == count) ? '\n' : ' ');
  }
}

}  // namespace

DenseTensor3 read_tensor_file(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::array<std::string, 3> names = {"mode1", "mode2", "mode3"};
  std::istringstream header(read_header(in, path, &names));
  std::string magic;
  long long i = 0, j = 0, k = 0;
  header >> magic >> i >> j >> k;
  if (magic != "tensor3" || header.fail())
    throw IoError(path.string() + ": malformed tensor3 header");
  if (i < 1 || j < 1 || k < 1)
    throw IoError(path.string() + ": tensor extents must be >= 1");
  auto values = read_values(in, i * j * k, path, &names);
  try {
    return DenseTensor3(static_cast<int>(i), static_cast<int>(j),
                        static_cast<int>(k), std::move(values), names);
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_tensor_file(const fs::path& path, const DenseTensor3& t) {
  std::ofstream out = open_output(path);
  out << "tensor3 " << t.extent(1) << ' ' << t.extent(2) << ' ' << t.extent(3)
      << '\n';
  out << "# modes: " << t.mode_names()[0] << ' ' << t.mode_names()[1] << ' '
      << t.mode_names()[2] << '\n';
  write_values_block(out, t.values().data(), t.size(), t.extent(1));
  if (!out) throw IoError("failed writing " + path.string());
}

Matrix read_matrix_file(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::istringstream header(read_header(in, path, nullptr));
  std::string magic;
  long long rows = 0, cols = 0;
  header >> magic >> rows >> cols;
  if (magic != "matrix" || header.fail())
    throw IoError(path.string() + ": malformed matrix header");
  if (rows < 1 || cols < 1)
    throw IoError(path.string() + ": matrix extents must be >= 1");
  const auto values = read_values(in, rows * cols, path, nullptr);
  Matrix m(rows, cols);
  std::int64_t idx = 0;
  for (long long r = 0; r < rows; ++r)
    for (long long c = 0; c < cols; ++c) m(r, c) = values[idx++];
  return m;
}

void write_matrix_file(const fs::path& path, const Matrix& m) {
  std::ofstream out = open_output(path);
  out << "matrix " << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << format_full(m(r, c));
      out << (c + 1 == m.cols() ? '\n' : ' ');
    }
  if (!out) throw IoError("failed writing " + path.string());
}

GroupLabels read_labels_file(const fs::path& path) {
  std::ifstream in = open_input(path);
  GroupLabels labels;
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line) || is_comment(line)) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    if (token == "0")
      labels.labels.push_back(0);
    else if (token == "1")
      labels.labels.push_back(1);
    else
      throw IoError(path.string() + ": label must be 0 or 1, got '" + token +
                    "'");
    std::string extra;
    if (ss >> extra)
      throw IoError(path.string() + ": one label per line expected");
  }
  if (labels.labels.empty()) throw IoError(path.string() + ": no labels");
  return labels;
}

void write_labels_file(const fs::path& path, const GroupLabels& labels) {
  std::ofstream out = open_output(path);
  for (int l : labels.labels) out << l << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Vector read_vector_file(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line) || is_comment(line)) continue;
    char* next = nullptr;
    const double v = std::strtod(line.c_str(), &next);
    if (next == line.c_str())
      throw IoError(path.string() + ": cannot parse value '" + line + "'");
    values.push_back(v);
  }
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Eigen::Index>(values.size()));
}

void write_vector_file(const fs::path& path, const Vector& v) {
  std::ofstream out = open_output(path);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_full(v(i)) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

// --- synth spec ----------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& s, const fs::path& path) {
  char* next = nullptr;
  const double v = std::strtod(s.c_str(), &next);
  if (next == s.c_str() || *next != '\0')
    throw IoError(path.string() + ": cannot parse number '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, const fs::path& path) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw IoError(path.string() + ": cannot parse integer '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, const fs::path& path) {
  if (s == "0" || s == "false") return false;
  if (s == "1" || s == "true") return true;
  throw IoError(path.string() + ": cannot parse boolean '" + s + "'");
}

}  // namespace

SynthSpec read_synth_spec(const fs::path& path) {
  std::ifstream in = open_input(path);
  SynthSpec spec;
  std::vector<double> lambda, sigma, shift;
  std::vector<bool> in_tensor, in_matrix;
  bool have_lambda = false, have_sigma = false, have_n_group0 = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line) || is_comment(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "subjects") spec.subjects = static_cast<int>(parse_int(value, path));
    else if (key == "time_samples")
      spec.time_samples = static_cast<int>(parse_int(value, path));
    else if (key == "electrodes")
      spec.electrodes = static_cast<int>(parse_int(value, path));
    else if (key == "voxels") spec.voxels = static_cast<int>(parse_int(value, path));
    else if (key == "rank") spec.rank = static_cast<int>(parse_int(value, path));
    else if (key == "noise_tensor") spec.noise_tensor = parse_double(value, path);
    else if (key == "noise_matrix") spec.noise_matrix = parse_double(value, path);
    else if (key == "n_group0") {
      spec.n_group0 = static_cast<int>(parse_int(value, path));
      have_n_group0 = true;
    } else if (key == "smooth_time") spec.smooth_time = parse_bool(value, path);
    else if (key == "seed")
      spec.seed = static_cast<std::uint64_t>(parse_int(value, path));
    else if (key == "lambda") {
      for (const auto& s : split_list(value)) lambda.push_back(parse_double(s, path));
      have_lambda = true;
    } else if (key == "sigma") {
      for (const auto& s : split_list(value)) sigma.push_back(parse_double(s, path));
      have_sigma = true;
    } else if (key == "group_shift") {
      for (const auto& s : split_list(value)) shift.push_back(parse_double(s, path));
    } else if (key == "in_tensor") {
      for (const auto& s : split_list(value)) in_tensor.push_back(parse_bool(s, path));
    } else if (key == "in_matrix") {
      for (const auto& s : split_list(value)) in_matrix.push_back(parse_bool(s, path));
    } else {
      throw IoError(path.string() + ": unknown key '" + key + "'");
    }
  }

  if (spec.rank < 1) throw IoError(path.string() + ": rank must be >= 1");
  const auto check_len = [&](std::size_t n, const char* what) {
    if (n != 0 && n != static_cast<std::size_t>(spec.rank))
      throw IoError(path.string() + ": " + what + " list length != rank");
  };
  check_len(lambda.size(), "lambda");
  check_len(sigma.size(), "sigma");
  check_len(shift.size(), "group_shift");
  check_len(in_tensor.size(), "in_tensor");
  check_len(in_matrix.size(), "in_matrix");

  spec.components.assign(spec.rank, ComponentSpec{});
  for (int r = 0; r < spec.rank; ++r) {
    ComponentSpec& c = spec.components[r];
    if (!in_tensor.empty()) c.in_tensor = in_tensor[r];
    if (!in_matrix.empty()) c.in_matrix = in_matrix[r];
    c.lambda = have_lambda ? lambda[r] : (c.in_tensor ? 1.0 : 0.0);
    c.sigma = have_sigma ? sigma[r] : (c.in_matrix ? 1.0 : 0.0);
    if (!shift.empty()) c.group_shift = shift[r];
  }
  if (!have_n_group0) spec.n_group0 = std::max(1, spec.subjects / 2);
  return spec;
}

void write_synth_spec(const fs::path& path, const SynthSpec& spec) {
  std::ofstream out = open_output(path);
  out << "# synthetic coupled-data spec\n";
  out << "subjects = " << spec.subjects << '\n';
  out << "time_samples = " << spec.time_samples << '\n';
  out << "electrodes = " << spec.electrodes << '\n';
  out << "voxels = " << spec.voxels << '\n';
  out << "rank = " << spec.rank << '\n';
  const auto list = [&](const char* key, auto&& get) {
    out << key << " = ";
    for (std::size_t r = 0; r < spec.components.size(); ++r)
      out << get(spec.components[r]) << (r + 1 < spec.components.size() ? ", " : "\n");
  };
  list("lambda", [](const ComponentSpec& c) { return format_full(c.lambda); });
  list("sigma", [](const ComponentSpec& c) { return format_full(c.sigma); });
  list("in_tensor", [](const ComponentSpec& c) { return c.in_tensor ? "1" : "0"; });
  list("in_matrix", [](const ComponentSpec& c) { return c.in_matrix ? "1" : "0"; });
  list("group_shift",
       [](const ComponentSpec& c) { return format_full(c.group_shift); });
  out << "noise_tensor = " << format_full(spec.noise_tensor) << '\n';
  out << "noise_matrix = " << format_full(spec.noise_matrix) << '\n';
  out << "n_group0 = " << spec.n_group0 << '\n';
  out << "smooth_time = " << (spec.smooth_time ? 1 : 0) << '\n';
  out << "seed = " << spec.seed << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

// --- result bundles --------------------------------------------------------------

void write_preprocess_record(const fs::path& path,
                             const PreprocessRecord& record) {
  std::ofstream out = open_output(path);
  out << "# preprocessing record, steps in application order\n";
  for (const auto& step : record.steps) {
    out << "op = " << to_string(step.op) << '\n';
    if (step.op == PreprocessOp::center_fibers ||
        step.op == PreprocessOp::scale_slices)
      out << "mode = " << step.mode << '\n';
    out << "values =";
    for (double v : step.values) out << ' ' << format_full(v);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

void write_report_body(std::ostream& os, const FitReport& report) {
  os << "best_start = " << report.best_start << '\n';
  os << "best_objective = " << format_full(report.best_objective) << '\n';
  os << "model_objective = " << format_full(report.model_objective) << '\n';
  os << "congruence = " << format_full(report.congruence) << '\n';
  os << "degeneracy_warning = " << (report.degeneracy_warning ? 1 : 0) << '\n';
  os << "uniqueness_threshold = " << format_full(report.uniqueness_threshold)
     << '\n';
  os << "min_cluster_fms = " << format_full(report.min_cluster_fms) << '\n';
  os << "uniqueness_ok = " << (report.uniqueness_ok ? 1 : 0) << '\n';
  os << "starts:\n";
  for (const auto& s : report.starts) {
    os << "  - start = " << s.index << '\n';
    os << "    objective = " << format_full(s.objective) << '\n';
    os << "    iterations = " << s.iterations << '\n';
    os << "    termination = " << to_string(s.termination) << '\n';
    os << "    converged = " << (s.converged ? 1 : 0) << '\n';
    os << "    in_best_cluster = " << (s.in_best_cluster ? 1 : 0) << '\n';
    if (s.in_best_cluster && s.index != report.best_start)
      os << "    fms_vs_best = " << format_full(s.fms_vs_best) << '\n';
  }
}

void write_components(std::ostream& os, int rank, const Vector* lambda,
                      const Vector* sigma,
                      const std::vector<ComponentLabel>* labels,
                      const std::vector<ComponentSignificance>* significance) {
  os << "components:\n";
  for (int r = 0; r < rank; ++r) {
    os << "  - component = " << (r + 1) << '\n';
    if (lambda) os << "    lambda = " << format_full((*lambda)(r)) << '\n';
    if (sigma) os << "    sigma = " << format_full((*sigma)(r)) << '\n';
    if (labels) os << "    label = " << to_string((*labels)[r]) << '\n';
    if (significance) {
      const auto& cs = (*significance)[r];
      os << "    t = " << format_full(cs.t) << '\n';
      os << "    df = " << format_full(cs.df) << '\n';
      os << "    p = " << format_full(cs.p) << '\n';
      os << "    p_bonferroni = " << format_full(cs.p_bonferroni) << '\n';
      os << "    significant_raw = " << (cs.significant_raw ? 1 : 0) << '\n';
      os << "    significant_bonferroni = "
         << (cs.significant_bonferroni ? 1 : 0) << '\n';
    }
  }
}

void write_optimizer_config(std::ostream& os, const OptimizerConfig& opt) {
  os << "max_iterations = " << opt.max_iterations << '\n';
  os << "rel_f_tol = " << format_full(opt.rel_f_tol) << '\n';
  os << "grad_tol = " << format_full(opt.grad_tol) << '\n';
}

}  // namespace

void write_cp_report(std::ostream& os, const CpConfig& cfg,
                     const KruskalModel& model, const FitReport& report,
                     const std::vector<ComponentSignificance>* significance) {
  os << "model = cp\n";
  os << "rank = " << cfg.rank << '\n';
  os << "n_starts = " << cfg.n_starts << '\n';
  os << "seed = " << cfg.seed << '\n';
  write_optimizer_config(os, cfg.optimizer);
  write_report_body(os, report);
  write_components(os, model.rank(), &model.weights, nullptr, nullptr,
                   significance);
}

void write_acmtf_report(std::ostream& os, const AcmtfConfig& cfg,
                        const CoupledModel& model, const FitReport& report,
                        const std::vector<ComponentLabel>* labels,
                        const std::vector<ComponentSignificance>* significance) {
  os << "model = acmtf\n";
  os << "rank = " << cfg.rank << '\n';
  os << "beta = " << format_full(cfg.beta) << '\n';
  os << "gamma = " << format_full(cfg.gamma) << '\n';
  os << "l1_epsilon = " << format_full(cfg.l1_epsilon) << '\n';
  os << "share_threshold = " << format_full(cfg.share_threshold) << '\n';
  os << "n_starts = " << cfg.n_starts << '\n';
  os << "seed = " << cfg.seed << '\n';
  write_optimizer_config(os, cfg.optimizer);
  write_report_body(os, report);
  write_components(os, model.rank(), &model.tensor_weights,
                   &model.matrix_weights, labels, significance);
}

namespace {

void write_time_traces(const fs::path& dir, const Matrix& b) {
  for (Eigen::Index r = 0; r < b.cols(); ++r) {
    std::ofstream out = open_output(
        dir / ("trace_component_" + std::to_string(r + 1) + ".txt"));
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      out << j << ' ' << format_full(b(j, r)) << '\n';
  }
}

}  // namespace

void write_cp_bundle(const fs::path& dir, const KruskalModel& model,
                     const FitReport& report, const CpConfig& cfg,
                     const std::vector<ComponentSignificance>* significance,
                     const PreprocessRecord* tensor_record) {
  fs::create_directories(dir);
  write_matrix_file(dir / "factor_A.mat", model.A);
  write_matrix_file(dir / "factor_B.mat", model.B);
  write_matrix_file(dir / "factor_C.mat", model.C);
  write_vector_file(dir / "weights_lambda.txt", model.weights);
  write_time_traces(dir, model.B);
  if (tensor_record && !tensor_record->steps.empty())
    write_preprocess_record(dir / "preprocess_tensor.txt", *tensor_record);
  std::ofstream report_out = open_output(dir / "report.txt");
  write_cp_report(report_out, cfg, model, report, significance);
  if (!report_out) throw IoError("failed writing report.txt");
}

void write_acmtf_bundle(const fs::path& dir, const CoupledModel& model,
                        const FitReport& report, const AcmtfConfig& cfg,
                        const std::vector<ComponentLabel>* labels,
                        const std::vector<ComponentSignificance>* significance,
                        const PreprocessRecord* tensor_record,
                        const PreprocessRecord* matrix_record) {
  fs::create_directories(dir);
  write_matrix_file(dir / "factor_A.mat", model.A);
  write_matrix_file(dir / "factor_B.mat", model.B);
  write_matrix_file(dir / "factor_C.mat", model.C);
  write_matrix_file(dir / "factor_V.mat", model.V);
  write_vector_file(dir / "weights_lambda.txt", model.tensor_weights);
  write_vector_file(dir / "weights_sigma.txt", model.matrix_weights);
  write_time_traces(dir, model.B);
  if (tensor_record && !tensor_record->steps.empty())
    write_preprocess_record(dir / "preprocess_tensor.txt", *tensor_record);
  if (matrix_record && !matrix_record->steps.empty())
    write_preprocess_record(dir / "preprocess_matrix.txt", *matrix_record);
  std::ofstream report_out = open_output(dir / "report.txt");
  write_acmtf_report(report_out, cfg, model, report, labels, significance);
  if (!report_out) throw IoError("failed writing report.txt");
}

}  // namespace tenfuse
