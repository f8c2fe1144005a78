#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "pcat/estimators.hpp"

namespace pcat {

// On-disk exchange format for one study summary: a small header plus the
// p x r basis in delimited text. The basis rather than the projector is
// persisted; the projector is rebuilt on load.
struct StudyFile {
  int p = 0;
  int r = 0;
  long n = 0;
  double n_eff = 0.0;
  std::string study_id;
  std::string kind = "classical";  // classical | kendall_tau | external
  Matrix basis;
};

StudyFile study_file_from_summary(const StudySummary& summary,
                                  CovarianceKind kind);

struct LoadedStudy {
  StudySummary summary;
  std::string kind;
  bool reorthonormalized = false;  // basis was repaired on load
};

// Rebuilds the summary. Basis orthonormality within 1e-6 is accepted as-is,
// within 1e-3 it is re-orthonormalized (flagged), beyond that the file is
// rejected.
LoadedStudy summary_from_study_file(const StudyFile& file);

void write_study_file(const StudyFile& file, const std::filesystem::path& path);
StudyFile read_study_file(const std::filesystem::path& path);

// Comma-delimited numeric matrix, one row per line, LF endings.
Matrix read_csv_matrix(const std::filesystem::path& path, bool skip_header = false);
void write_csv_matrix(const Matrix& matrix, const std::filesystem::path& path);

// `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path);

// 17 significant digits: doubles round-trip exactly.
std::string format_double(double value);

}  // namespace pcat
