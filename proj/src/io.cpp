#include "zib/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace zib {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, const std::string& path, int row, int col) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw IngestionError(path + ": row " + std::to_string(row) + ", column " +
                         std::to_string(col + 1) + ": cannot parse '" + cell + "' as a number");
  }
}

}  // namespace

bool CsvTable::has(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

int CsvTable::col(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IngestionError("missing required column '" + name + "'");
  return static_cast<int>(it - header.begin());
}

Eigen::VectorXd CsvTable::column(const std::string& name) const { return values.col(col(name)); }

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(path + ": empty file");
  CsvTable t;
  t.header = split_line(line);
  if (t.header.empty()) throw IngestionError(path + ": empty header row");

  std::vector<std::vector<double>> rows;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != t.header.size())
      throw IngestionError(path + ": row " + std::to_string(row_no) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(t.header.size()));
    std::vector<double> row(cells.size());
    for (size_t j = 0; j < cells.size(); ++j)
      row[j] = parse_cell(cells[j], path, row_no, static_cast<int>(j));
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<int>(rows.size()), static_cast<int>(t.header.size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) t.values(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  return t;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestionError("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw IngestionError("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
  if (values.cols() != static_cast<Eigen::Index>(header.size()))
    throw SpecificationError("write_csv: header/value width mismatch");
  std::ostringstream out;
  for (size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      const double v = values(i, j);
      if (std::isnan(v)) {
        out << "nan";
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
      }
    }
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open '" + path + "' for hashing");
  std::uint64_t h = 1469598103934665603ULL;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

IngestResult ingest_dataset(const CsvTable& table, bool standardize,
                            const std::optional<Standardization>& reuse) {
  const int n = table.n_rows();
  if (n == 0) throw IngestionError("dataset has no rows");

  IngestResult out;
  out.x_names.push_back("intercept");
  out.g_names.push_back("intercept");
  std::vector<int> x_cols, g_cols;
  for (size_t j = 0; j < table.header.size(); ++j) {
    const std::string& h = table.header[j];
    if (h.rfind("x_", 0) == 0) {
      out.x_names.push_back(h);
      x_cols.push_back(static_cast<int>(j));
    } else if (h.rfind("g_", 0) == 0) {
      out.g_names.push_back(h);
      g_cols.push_back(static_cast<int>(j));
    }
  }

  Dataset& d = out.data;
  d.y = table.column("y");
  {
    std::string bad;
    for (int i = 0; i < n; ++i) {
      if (!(d.y[i] >= 0.0 && d.y[i] < 1.0)) {
        if (!bad.empty()) bad += ", ";
        bad += std::to_string(i + 1);
      }
    }
    if (!bad.empty())
      throw IngestionError("column 'y' must lie in [0,1); offending rows: " + bad);
  }

  d.X.resize(n, static_cast<int>(x_cols.size()) + 1);
  d.X.col(0).setOnes();
  for (size_t k = 0; k < x_cols.size(); ++k) d.X.col(static_cast<int>(k) + 1) = table.values.col(x_cols[k]);
  d.G.resize(n, static_cast<int>(g_cols.size()) + 1);
  d.G.col(0).setOnes();
  for (size_t k = 0; k < g_cols.size(); ++k) d.G.col(static_cast<int>(k) + 1) = table.values.col(g_cols[k]);

  const bool has_s1 = table.has("s1");
  const bool has_s2 = table.has("s2");
  if (has_s1 != has_s2) throw IngestionError("coordinates require both 's1' and 's2' columns");
  if (has_s1) {
    Eigen::MatrixXd coords(n, 2);
    coords.col(0) = table.column("s1");
    coords.col(1) = table.column("s2");
    d.coords = coords;
  }

  if (standardize) {
    std::vector<std::string> names;
    for (size_t k = 1; k < out.x_names.size(); ++k) names.push_back(out.x_names[k]);
    for (size_t k = 1; k < out.g_names.size(); ++k) names.push_back(out.g_names[k]);
    Standardization st;
    if (reuse) {
      if (reuse->names != names)
        throw SpecificationError("standardization statistics do not match dataset covariates");
      st = *reuse;
    } else {
      st.names = names;
      st.mean.resize(static_cast<int>(names.size()));
      st.sd.resize(static_cast<int>(names.size()));
    }
    int idx = 0;
    auto apply = [&](Eigen::MatrixXd& M) {
      for (int j = 1; j < M.cols(); ++j, ++idx) {
        if (!reuse) {
          st.mean[idx] = M.col(j).mean();
          const double var =
              (M.col(j).array() - st.mean[idx]).square().sum() / std::max(1, n - 1);
          st.sd[idx] = std::sqrt(var);
          if (!(st.sd[idx] > 0.0)) st.sd[idx] = 1.0;
        }
        M.col(j) = (M.col(j).array() - st.mean[idx]) / st.sd[idx];
      }
    };
    apply(d.X);
    apply(d.G);
    out.standardization = std::move(st);
  }

  d.validate();
  return out;
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<std::string>& x_names,
                       const std::vector<std::string>& g_names) {
  const int n = data.n();
  const int px = static_cast<int>(x_names.size()) - 1;
  const int pg = static_cast<int>(g_names.size()) - 1;
  if (data.X.cols() != px + 1 || data.G.cols() != pg + 1)
    throw SpecificationError("write_dataset_csv: name/design width mismatch");
  std::vector<std::string> header{"y"};
  for (int j = 0; j < px; ++j) header.push_back(x_names[j + 1]);
  for (int j = 0; j < pg; ++j) header.push_back(g_names[j + 1]);
  const bool coords = data.coords.has_value();
  if (coords) {
    header.push_back("s1");
    header.push_back("s2");
  }
  Eigen::MatrixXd vals(n, static_cast<int>(header.size()));
  vals.col(0) = data.y;
  for (int j = 0; j < px; ++j) vals.col(1 + j) = data.X.col(j + 1);
  for (int j = 0; j < pg; ++j) vals.col(1 + px + j) = data.G.col(j + 1);
  if (coords) {
    vals.col(1 + px + pg) = data.coords->col(0);
    vals.col(2 + px + pg) = data.coords->col(1);
  }
  write_csv(path, header, vals);
}

}  // namespace zib
