#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "zib/model.hpp"

namespace zib {

/// Numeric CSV with a header row. Cells must parse as doubles
/// ("nan" and empty cells become NaN).
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;

  int n_rows() const { return static_cast<int>(values.rows()); }
  bool has(const std::string& name) const;
  int col(const std::string& name) const;
  Eigen::VectorXd column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

/// Writes header + values with full round-trip precision, via a
/// temporary file renamed into place.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

void atomic_write_text(const std::string& path, const std::string& content);

/// FNV-1a hash of a file's bytes, as a hex string.
std::string file_hash(const std::string& path);

/// Column means and standard deviations used to center and scale
/// covariates; captured on training data, reapplied to new data.
struct Standardization {
  std::vector<std::string> names;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};

/// A dataset plus the header names its design matrices came from.
struct IngestResult {
  Dataset data;
  std::vector<std::string> x_names;  // including "intercept"
  std::vector<std::string> g_names;
  std::optional<Standardization> standardization;
};

/// Builds a Dataset from a table with columns: `y`, zero-inflation
/// covariates `x_*`, Beta-mean covariates `g_*`, optional coordinates
/// `s1`,`s2`. Intercept columns are prepended. With `standardize`,
/// covariates are centered and scaled (reusing `reuse` when given, so
/// test data is transformed with training statistics).
IngestResult ingest_dataset(const CsvTable& table, bool standardize = false,
                            const std::optional<Standardization>& reuse = std::nullopt);

/// Inverse of ingest_dataset's layout: emits y, x_*, g_* (without the
/// intercept columns), s1/s2 when present.
void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<std::string>& x_names,
                       const std::vector<std::string>& g_names);

}  // namespace zib
