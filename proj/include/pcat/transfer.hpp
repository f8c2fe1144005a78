#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcat/estimators.hpp"

namespace pcat {

enum class Variant { kmeans, gradient, newton };
enum class Weighting { raw_n, effective };
enum class Init { blind_barycenter, target_top, explicit_projector, multi_start };

struct TransferConfig {
  int r_s = 1;   // shared rank
  int r_0 = 1;   // target rank
  std::optional<double> tau;  // selection threshold; default 0.5 * r_s
  Variant variant = Variant::kmeans;
  Weighting weighting = Weighting::effective;
  int max_iter = 50;
  double tol = 1e-8;
  double alpha = 0.5;  // gradient step size before backtracking
  Init init = Init::blind_barycenter;
  std::optional<Projector> init_projector;  // for Init::explicit_projector
  int multi_starts = 8;          // extra Haar starts for Init::multi_start
  std::uint64_t init_seed = 0;   // seeds the Haar starts

  double effective_tau() const { return tau ? *tau : 0.5 * r_s; }
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;  // rectified objective at the accepted iterate
  std::vector<std::string> selected;
  double step_norm = 0.0;
};

struct TransferResult {
  Projector shared;                           // rank r_s
  std::optional<Projector> private_subspace;  // absent when r_s == r_0
  Projector combined;                         // rank r_0
  std::vector<std::string> selected;
  std::vector<IterationRecord> trace;
  bool converged = true;
};

double study_weight(const StudySummary& study, Weighting weighting);

// Individual PCA step: the rank-r projector of a covariance-like matrix plus
// the study's effective sample size evaluated on the plug-in spectrum
// (elliptical formula for Kendall's tau inputs). A degenerate r-th gap is
// flagged, not fatal; the effective size then falls back to n.
StudySummary individual_pca(const CovarianceEstimate& cov, int r,
                            std::string study_id = "");

// Fine-tuning step: leading r_p eigenvectors of the target covariance
// restricted to the orthogonal complement of the shared subspace. r_p == 0
// yields the rank-0 projector.
Projector fine_tune(const Projector& shared, const CovarianceEstimate& target_cov,
                    int r_p);

// Oracle knowledge transfer: barycenter over all provided studies (target
// first), then fine-tune on the target covariance.
TransferResult oracle_transfer(const std::vector<StudySummary>& studies,
                               const CovarianceEstimate& target_cov,
                               const TransferConfig& cfg);

// Ids of the candidates with tr(P P~_k) >= tau. The target is never part of
// the candidate list and is therefore never filtered.
std::vector<std::string> select_sources(const Projector& P,
                                        const std::vector<StudySummary>& candidates,
                                        double tau);

// The rectified objective: (w_0 tr(P~_0 P) + sum_k w_k max{tr(P~_k P), tau}) / N
// with N the total weight over target and all candidates.
double rectified_objective(const Projector& P, const StudySummary& target,
                           const std::vector<StudySummary>& candidates,
                           double tau, Weighting weighting);

// Non-oracle knowledge transfer: alternate source selection with one update
// step (barycenter re-fit, gradient, or Newton with gradient fallback), then
// fine-tune. The k-means variant is monotone in the rectified objective.
TransferResult non_oracle_transfer(const StudySummary& target,
                                   const CovarianceEstimate& target_cov,
                                   const std::vector<StudySummary>& candidates,
                                   const TransferConfig& cfg);

}  // namespace pcat
