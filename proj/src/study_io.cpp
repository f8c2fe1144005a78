#include "pcat/study_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <Eigen/QR>

namespace pcat {

namespace {
constexpr const char* kMagic = "pcat-study v1";

std::string trim(const std::string& s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::vector<double> parse_csv_row(const std::string& line,
                                  const std::string& where) {
  std::vector<double> row;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = line.find(',', pos);
    const std::string field =
        trim(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (field.empty())
      throw DataError(where + ": empty field");
    std::size_t used = 0;
    double value;
    try {
      value = std::stod(field, &used);
    } catch (const std::exception&) {
      throw DataError(where + ": cannot parse '" + field + "' as a number");
    }
    if (used != field.size())
      throw DataError(where + ": trailing characters in '" + field + "'");
    row.push_back(value);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return row;
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

StudyFile study_file_from_summary(const StudySummary& summary,
                                  CovarianceKind kind) {
  if (!summary.projector.basis)
    throw DataError("study file: summary projector carries no basis");
  StudyFile file;
  file.p = summary.projector.dim();
  file.r = summary.projector.rank;
  file.n = summary.n;
  file.n_eff = summary.n_eff;
  file.study_id = summary.study_id;
  switch (kind) {
    case CovarianceKind::classical: file.kind = "classical"; break;
    case CovarianceKind::kendall_tau: file.kind = "kendall_tau"; break;
    case CovarianceKind::external: file.kind = "external"; break;
  }
  file.basis = *summary.projector.basis;
  return file;
}

LoadedStudy summary_from_study_file(const StudyFile& file) {
  if (file.basis.rows() != file.p || file.basis.cols() != file.r)
    throw DataError("study file '" + file.study_id + "': basis shape mismatch");
  if (file.n < 1)
    throw DataError("study file '" + file.study_id + "': n must be positive");
  if (!(file.n_eff > 0.0))
    throw DataError("study file '" + file.study_id + "': n_eff must be positive");

  LoadedStudy loaded;
  loaded.kind = file.kind;
  Matrix basis = file.basis;
  const Matrix gram = basis.transpose() * basis;
  const double defect =
      (gram - Matrix::Identity(file.r, file.r)).cwiseAbs().maxCoeff();
  if (defect > 1e-3)
    throw DataError("study file '" + file.study_id +
                    "': basis far from orthonormal (defect " +
                    format_double(defect) + ")");
  if (defect > 1e-6) {
    Eigen::HouseholderQR<Matrix> qr(basis);
    basis = qr.householderQ() * Matrix::Identity(file.p, file.r);
    const Matrix r_factor = qr.matrixQR().topLeftCorner(file.r, file.r);
    for (int j = 0; j < file.r; ++j)
      if (r_factor(j, j) < 0.0) basis.col(j) = -basis.col(j);
    loaded.reorthonormalized = true;
  }

  loaded.summary.projector = projector_from_basis(basis);
  loaded.summary.n = file.n;
  loaded.summary.n_eff = file.n_eff;
  loaded.summary.study_id = file.study_id;
  return loaded;
}

void write_study_file(const StudyFile& file, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << kMagic << "\n";
  out << "study_id = " << file.study_id << "\n";
  out << "kind = " << file.kind << "\n";
  out << "p = " << file.p << "\n";
  out << "r = " << file.r << "\n";
  out << "n = " << file.n << "\n";
  out << "n_eff = " << format_double(file.n_eff) << "\n";
  for (int i = 0; i < file.p; ++i) {
    for (int j = 0; j < file.r; ++j) {
      if (j) out << ",";
      out << format_double(file.basis(i, j));
    }
    out << "\n";
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

StudyFile read_study_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open study file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != kMagic)
    throw DataError("'" + path.string() + "' is not a pcat study file");

  StudyFile file;
  bool have_p = false, have_r = false, have_n = false, have_n_eff = false;
  std::string pending_row;
  while (std::getline(in, line)) {
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      pending_row = text;  // first basis row
      break;
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    try {
      if (key == "study_id") file.study_id = value;
      else if (key == "kind") file.kind = value;
      else if (key == "p") { file.p = std::stoi(value); have_p = true; }
      else if (key == "r") { file.r = std::stoi(value); have_r = true; }
      else if (key == "n") { file.n = std::stol(value); have_n = true; }
      else if (key == "n_eff") { file.n_eff = std::stod(value); have_n_eff = true; }
      else throw DataError("unknown study file key '" + key + "'");
    } catch (const DataError&) {
      throw;
    } catch (const std::exception&) {
      throw DataError("'" + path.string() + "': bad value for key '" + key + "'");
    }
  }
  if (!have_p || !have_r || !have_n || !have_n_eff)
    throw DataError("'" + path.string() + "': incomplete header");
  if (file.p < 1 || file.r < 1 || file.r > file.p)
    throw DataError("'" + path.string() + "': invalid dimensions p = " +
                    std::to_string(file.p) + ", r = " + std::to_string(file.r));
  if (file.kind != "classical" && file.kind != "kendall_tau" &&
      file.kind != "external")
    throw DataError("'" + path.string() + "': unknown kind '" + file.kind + "'");

  file.basis.resize(file.p, file.r);
  int row = 0;
  const auto consume = [&](const std::string& text) {
    if (row >= file.p)
      throw DataError("'" + path.string() + "': more than p basis rows");
    const std::vector<double> fields =
        parse_csv_row(text, path.string() + " row " + std::to_string(row));
    if (static_cast<int>(fields.size()) != file.r)
      throw DataError("'" + path.string() + "': row " + std::to_string(row) +
                      " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(file.r));
    for (int j = 0; j < file.r; ++j) file.basis(row, j) = fields[j];
    ++row;
  };
  if (!pending_row.empty()) consume(pending_row);
  while (std::getline(in, line)) {
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    consume(text);
  }
  if (row != file.p)
    throw DataError("'" + path.string() + "': expected " + std::to_string(file.p) +
                    " basis rows, got " + std::to_string(row));
  return file;
}

Matrix read_csv_matrix(const std::filesystem::path& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  std::vector<std::vector<double>> rows;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (skip_header && line_number == 1) continue;
    const std::string text = trim(line);
    if (text.empty()) continue;
    rows.push_back(
        parse_csv_row(text, path.string() + " line " + std::to_string(line_number)));
    if (rows.size() > 1 && rows.back().size() != rows.front().size())
      throw DataError(path.string() + " line " + std::to_string(line_number) +
                      ": inconsistent column count");
  }
  if (rows.empty()) throw DataError("'" + path.string() + "' contains no data");
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      out(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  return out;
}

void write_csv_matrix(const Matrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  for (long i = 0; i < matrix.rows(); ++i) {
    for (long j = 0; j < matrix.cols(); ++j) {
      if (j) out << ",";
      out << format_double(matrix(i, j));
    }
    out << "\n";
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path.string() + "'");
  std::map<std::string, std::string> entries;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t hash = line.find('#');
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw DataError(path.string() + " line " + std::to_string(line_number) +
                      ": expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    if (key.empty())
      throw DataError(path.string() + " line " + std::to_string(line_number) +
                      ": empty key");
    entries[key] = trim(text.substr(eq + 1));
  }
  return entries;
}

}  // namespace pcat
