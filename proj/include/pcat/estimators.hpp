#pragma once

#include <cstdint>
#include <string>

#include "pcat/grassmann.hpp"

namespace pcat {

// One study's raw observations, one per row.
struct Dataset {
  Matrix rows;

  long n() const { return rows.rows(); }
  int p() const { return static_cast<int>(rows.cols()); }
};

enum class CovarianceKind { classical, kendall_tau, external };

struct CovarianceEstimate {
  Matrix matrix;
  long n = 0;
  CovarianceKind kind = CovarianceKind::classical;
  bool centered = false;

  int p() const { return static_cast<int>(matrix.rows()); }
};

// Checks symmetry, PSD within -1e-8, and unit trace for kendall_tau.
void validate_covariance(const CovarianceEstimate& cov);

// (1/n) sum x x' in the mean-zero model; subtracts the sample mean first when
// center is set.
CovarianceEstimate sample_covariance(const Dataset& data, bool center = false);

// Spatial Kendall's tau: the average rank-one projector of pairwise
// differences. Exhaustive over all n(n-1)/2 pairs by default; max_pairs > 0
// subsamples that many distinct pairs (seeded, lexicographic evaluation order
// so that subsampling everything reproduces the exhaustive result exactly).
// Pairs closer than 1e-12 are skipped and counted.
struct KendallTau {
  CovarianceEstimate estimate;
  std::uint64_t pairs_used = 0;
  std::uint64_t degenerate_pairs = 0;
};
KendallTau kendall_tau(const Dataset& data, std::uint64_t max_pairs = 0,
                       std::uint64_t seed = 0, int threads = 1);

// Effective sample size of one PCA study: n / (kappa^2 r e) in the classical
// setting and n / (kappa^2 r e^2 log p) in the elliptical one, where
// kappa = lambda_1 / (lambda_r - lambda_{r+1}) and e = tr / lambda_1, all
// evaluated on the supplied full spectrum.
enum class SizeMode { classical, elliptical };

struct EffectiveSampleSize {
  double n_eff;
  double kappa;
  double effective_rank;
  double gap;
};
EffectiveSampleSize effective_sample_size(const Vector& eigenvalues, double n,
                                          int r, SizeMode mode);

// One study's exchangeable summary: the subspace estimate plus the weights
// the aggregation steps need.
struct StudySummary {
  Projector projector;
  long n = 0;
  double n_eff = 0.0;
  std::string study_id;
  bool degenerate_gap = false;
};

}  // namespace pcat
