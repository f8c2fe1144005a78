#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcat/rng.hpp"
#include "pcat/transfer.hpp"

namespace pcat {

// ---- data generation -------------------------------------------------------

// Haar-uniform orthonormal basis: QR of an iid Gaussian matrix with the sign
// of R's diagonal fixed.
Matrix haar_basis(int p, int r, Rng& rng);

// Haar-uniform orthonormal basis inside the orthogonal complement of U.
Matrix haar_basis_in_complement(const Matrix& U, int r, Rng& rng);

// Orthogonal matrix close to the identity: column-by-column Gram-Schmidt of
// I + N with N_ij iid N(0, h^2/p). h = 0 returns the identity exactly.
Matrix perturbed_rotation(int p, double h, Rng& rng);

// Sigma = (lam_s - 1) U_s U_s' + (lam_p - 1) U_p U_p' + I, spectrum
// {lam_p, lam_s, 1} with the stated multiplicities when lam_p > lam_s > 1.
Matrix build_covariance(const Matrix& U_s, const Matrix& U_p, double lam_s,
                        double lam_p);

enum class Distribution { gaussian, student_t };

// n iid rows with scatter Sigma: Gaussian, or multivariate t via the scale
// mixture Sigma^{1/2} z sqrt(df / chi2_df).
Dataset sample_dataset(const Matrix& sigma, long n, Distribution distribution,
                       double t_df, Rng& rng);

// GOE(p): symmetric, off-diagonal entries N(0, 1/(2p)), diagonal N(0, 1/p).
Matrix goe_matrix(int p, Rng& rng);

// ---- method comparison experiments ------------------------------------------

enum class Scenario { S1, S2, S3 };
enum class PcaKind { classical, elliptical };

struct ScenarioConfig {
  Scenario scenario = Scenario::S1;
  int p = 50;
  int K = 6;
  int n = 100;
  int r_k = 4;
  int r_s = 2;
  double h = 0.05;
  double lambda_p_target = 10.0;
  double lambda_p_source = 8.0;
  double lambda_s = 4.0;
  Distribution distribution = Distribution::gaussian;
  double t_df = 3.0;
  PcaKind pca = PcaKind::classical;
  double tau = 0.5;
  int iterations = 10;  // T for the rectified iteration
  Variant variant = Variant::kmeans;
  Weighting weighting = Weighting::effective;
  int replications = 100;
  std::uint64_t seed = 0;
  bool population = false;  // feed population covariances (n -> infinity)
  std::uint64_t kendall_max_pairs = 0;

  static ScenarioConfig preset(Scenario scenario);
};

struct MethodSummary {
  std::string method;
  double mean = 0.0;
  double se = 0.0;
};

struct ScenarioReport {
  ScenarioConfig config;
  std::vector<std::string> methods;
  std::vector<std::vector<double>> values;  // [method][replication]; NaN = failed
  std::vector<MethodSummary> summaries;
  std::vector<std::pair<int, std::string>> failures;
  std::optional<Matrix> alternative_center;  // S3's second cluster center
  double wall_seconds = 0.0;                 // console only, never serialized
};

ScenarioReport run_scenario(const ScenarioConfig& cfg, int threads = 1);

// ---- statistical rate experiments -------------------------------------------

enum class RateTerm { private_term, variance_n, variance_K, bias, deviation };

struct RatePoint {
  double x;  // the regressor: n, K, h, or the private gap
  int p;
  int K;
  int n;
  double h;
  double lambda_s;
  double lambda_p;
};

struct RateCurve {
  std::string label;
  std::vector<RatePoint> points;
};

struct RateConfig {
  RateTerm term = RateTerm::variance_n;
  std::vector<RateCurve> curves;
  int r_k = 4;
  int r_s = 2;
  int replications = 50;
  std::uint64_t seed = 0;
  Weighting weighting = Weighting::effective;

  static RateConfig preset(RateTerm term);
};

struct RateReport {
  RateConfig config;
  std::vector<std::vector<std::vector<double>>> values;  // [curve][point][rep]
  std::vector<std::vector<double>> means;                // [curve][point]
  std::vector<double> curve_slopes;
  double slope = 0.0;  // mean of the per-curve log-log slopes
  long dropped_replications = 0;  // private-term ratios with tiny denominators
  double wall_seconds = 0.0;
};

RateReport run_rate_experiment(const RateConfig& cfg, int threads = 1);

// ---- bilinear-form normality experiment -------------------------------------

struct NormalityConfig {
  int n0 = 100;
  int p = 50;
  int r_0 = 4;
  int r_s = 2;
  double lambda_p = 10.0;
  double lambda_s = 2.0;
  double perturbation = 0.05;  // scale of the GOE perturbation of the shared projector
  Distribution distribution = Distribution::gaussian;
  double t_df = 5.0;
  double nu4 = 3.0;  // fourth moment of the standardized innovations
  int replications = 2000;
  std::uint64_t seed = 0;
  std::optional<Vector> u;  // drawn once from the unit sphere when absent
  std::optional<Vector> v;

  static NormalityConfig gaussian_preset();
};

struct NormalityReport {
  NormalityConfig config;       // with u, v filled in
  std::vector<double> z_hat;    // after transfer, standardized by sigma_p
  std::vector<double> z_tilde;  // individual PCA, standardized by sigma_0
  double sigma_p = 0.0;
  double sigma_0 = 0.0;
  double ks_hat = 0.0;
  double ks_tilde = 0.0;
  double var_hat = 0.0;
  double var_tilde = 0.0;
  double wall_seconds = 0.0;
};

NormalityReport run_normality_experiment(const NormalityConfig& cfg,
                                         int threads = 1);

// ---- small numeric helpers ---------------------------------------------------

double standard_normal_cdf(double x);

// Two-sided Kolmogorov-Smirnov statistic against N(0, 1).
double ks_statistic_standard_normal(std::vector<double> samples);

// Slope of the least-squares fit of log(y) on log(x). Throws on non-positive
// values.
double ols_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double mean_of(const std::vector<double>& values);
double standard_error_of(const std::vector<double>& values);

}  // namespace pcat
