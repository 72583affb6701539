#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gfam {

/// Dense data matrix. Columns are data points (snapshots), rows are ambient coordinates.
using DataMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

enum class MatrixFormat { csv, gfam_bin, idx };

enum class Termination { tol_met, max_iter };

/// Per-run trace of the alternating minimization.
struct RunReport {
  std::vector<double> energy_trace;
  std::vector<std::size_t> k_trace;
  std::vector<std::vector<std::size_t>> dims_trace;
  std::size_t iterations = 0;
  Termination termination = Termination::max_iter;
  std::uint64_t seed = 0;
  std::vector<std::string> flags;
  double wall_seconds = 0.0;  // not serialized; keeps report files reproducible
};

std::string to_string(MatrixFormat f);
std::string to_string(Termination t);

/// Guess a format from the file extension (.csv, .gfam/.bin, idx3-ubyte/.idx).
MatrixFormat format_from_path(const std::filesystem::path& path);

DataMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const DataMatrix& m, const std::filesystem::path& path, MatrixFormat format);

/// IDX label file (magic 0x00000801).
Labels load_idx_labels(const std::filesystem::path& path);

/// Throws ValidationError naming the first non-finite (row, col).
void validate_finite(const DataMatrix& m);

/// JSON report with fixed key order. Throws ValidationError on empty or ragged traces.
std::string report_to_json(const RunReport& r);
void emit_report(const RunReport& r, const std::filesystem::path& path);

/// One label per line.
void save_labels(const Labels& labels, const std::filesystem::path& path);
Labels load_labels(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace gfam
