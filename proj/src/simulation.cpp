#include "pcat/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "pcat/diagnostics.hpp"
#include "pcat/parallel.hpp"

namespace pcat {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}
}  // namespace

// ---- data generation -------------------------------------------------------

Matrix haar_basis(int p, int r, Rng& rng) {
  if (r < 0 || r > p) throw DataError("haar_basis: r out of range");
  if (r == 0) return Matrix(p, 0);
  const Matrix gaussian = rng.normal_matrix(p, r);
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix q = qr.householderQ() * Matrix::Identity(p, r);
  const Matrix r_factor = qr.matrixQR().topLeftCorner(r, r);
  for (int j = 0; j < r; ++j)
    if (r_factor(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Matrix haar_basis_in_complement(const Matrix& U, int r, Rng& rng) {
  const int p = static_cast<int>(U.rows());
  if (r < 0 || r > p - U.cols())
    throw DataError("haar_basis_in_complement: r exceeds complement dimension");
  if (r == 0) return Matrix(p, 0);
  // Project a Gaussian draw off span(U); its QR is Haar on the complement.
  Matrix gaussian = rng.normal_matrix(p, r);
  gaussian -= U * (U.transpose() * gaussian);
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix q = qr.householderQ() * Matrix::Identity(p, r);
  const Matrix r_factor = qr.matrixQR().topLeftCorner(r, r);
  for (int j = 0; j < r; ++j)
    if (r_factor(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

namespace {

bool gram_schmidt(const Matrix& m, Matrix& q) {
  const int p = static_cast<int>(m.rows());
  q.resize(p, p);
  for (int j = 0; j < p; ++j) {
    Vector w = m.col(j);
    for (int i = 0; i < j; ++i) w -= q.col(i).dot(w) * q.col(i);
    const double norm = w.norm();
    if (norm < 1e-12) return false;
    q.col(j) = w / norm;  // positive diagonal of R by construction
  }
  return true;
}

}  // namespace

Matrix perturbed_rotation(int p, double h, Rng& rng) {
  if (h < 0.0) throw DataError("perturbed_rotation: h must be non-negative");
  if (h == 0.0) return Matrix::Identity(p, p);
  const double sigma = h / std::sqrt(static_cast<double>(p));
  Matrix q;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const Matrix noise = sigma * rng.normal_matrix(p, p);
    if (gram_schmidt(Matrix::Identity(p, p) + noise, q)) return q;
  }
  throw NumericalError("perturbed_rotation: numerically dependent columns");
}

Matrix build_covariance(const Matrix& U_s, const Matrix& U_p, double lam_s,
                        double lam_p) {
  const int p = static_cast<int>(U_s.rows());
  if (U_p.rows() != p) throw DataError("build_covariance: basis row mismatch");
  if (!(lam_s >= 1.0) || !(lam_p >= 1.0))
    throw DataError("build_covariance: eigenvalues must be at least 1");
  const int r_s = static_cast<int>(U_s.cols());
  const int r_p = static_cast<int>(U_p.cols());
  Matrix joint(p, r_s + r_p);
  joint.leftCols(r_s) = U_s;
  joint.rightCols(r_p) = U_p;
  const Matrix gram = joint.transpose() * joint;
  if ((gram - Matrix::Identity(r_s + r_p, r_s + r_p)).cwiseAbs().maxCoeff() > 1e-8)
    throw DataError("build_covariance: [U_s | U_p] is not jointly orthonormal");

  Matrix sigma = Matrix::Identity(p, p);
  if (r_s > 0) sigma += (lam_s - 1.0) * (U_s * U_s.transpose());
  if (r_p > 0) sigma += (lam_p - 1.0) * (U_p * U_p.transpose());
  return sigma;
}

Dataset sample_dataset(const Matrix& sigma, long n, Distribution distribution,
                       double t_df, Rng& rng) {
  require_symmetric(sigma, "sample_dataset");
  if (n < 1) throw DataError("sample_dataset: n must be positive");
  const int p = static_cast<int>(sigma.rows());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(sigma);
  if (solver.info() != Eigen::Success)
    throw NumericalError("sample_dataset: eigendecomposition failed");
  if (solver.eigenvalues().minCoeff() < -1e-8)
    throw DataError("sample_dataset: sigma is not positive semidefinite");
  const Vector roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix sqrt_sigma =
      solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();

  Dataset data;
  data.rows = rng.normal_matrix(static_cast<int>(n), p) * sqrt_sigma;
  if (distribution == Distribution::student_t) {
    if (!(t_df > 0)) throw DataError("sample_dataset: t_df must be positive");
    const int df = static_cast<int>(std::lround(t_df));
    for (long i = 0; i < n; ++i) {
      double chi2 = rng.chi_squared(df);
      while (chi2 < 1e-12) chi2 = rng.chi_squared(df);
      data.rows.row(i) *= std::sqrt(static_cast<double>(df) / chi2);
    }
  }
  return data;
}

Matrix goe_matrix(int p, Rng& rng) {
  if (p < 1) throw DataError("goe_matrix: p must be positive");
  const double diag_sd = 1.0 / std::sqrt(static_cast<double>(p));
  const double off_sd = 1.0 / std::sqrt(2.0 * static_cast<double>(p));
  Matrix g(p, p);
  for (int i = 0; i < p; ++i) {
    g(i, i) = diag_sd * rng.normal();
    for (int j = i + 1; j < p; ++j) {
      g(i, j) = off_sd * rng.normal();
      g(j, i) = g(i, j);
    }
  }
  return g;
}

// ---- small numeric helpers ---------------------------------------------------

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic_standard_normal(std::vector<double> samples) {
  if (samples.empty()) throw DataError("ks statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = standard_normal_cdf(samples[i]);
    stat = std::max(stat, (static_cast<double>(i) + 1.0) / n - cdf);
    stat = std::max(stat, cdf - static_cast<double>(i) / n);
  }
  return stat;
}

double ols_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DataError("ols_loglog_slope: need at least two matching points");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw NumericalError("ols_loglog_slope: non-positive value at index " +
                           std::to_string(i));
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = mean_of(lx);
  const double my = mean_of(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx <= 0.0) throw NumericalError("ols_loglog_slope: degenerate abscissa");
  return sxy / sxx;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw DataError("mean_of: empty vector");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double standard_error_of(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

namespace {

std::vector<double> finite_values(const std::vector<double>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values)
    if (std::isfinite(v)) out.push_back(v);
  return out;
}

}  // namespace

// ---- method comparison experiments ------------------------------------------

ScenarioConfig ScenarioConfig::preset(Scenario scenario) {
  ScenarioConfig cfg;
  cfg.scenario = scenario;
  return cfg;  // struct defaults carry the reference setting
}

namespace {

struct StudyFamily {
  std::vector<CovarianceEstimate> covariances;  // index 0 = target
  Projector target_truth;                       // rank r_k
};

CovarianceEstimate estimate_covariance(const ScenarioConfig& cfg, const Matrix& sigma,
                                       Rng& rng, int study_index) {
  if (cfg.population) {
    CovarianceEstimate cov;
    cov.matrix = sigma;
    cov.n = cfg.n;
    cov.kind = CovarianceKind::classical;
    return cov;
  }
  const Dataset data =
      sample_dataset(sigma, cfg.n, cfg.distribution, cfg.t_df, rng);
  if (cfg.pca == PcaKind::classical) return sample_covariance(data, false);
  return kendall_tau(data, cfg.kendall_max_pairs,
                     rng.child(1000 + study_index).seed())
      .estimate;
}

StudyFamily generate_family(const ScenarioConfig& cfg, Rng& rng,
                            const std::optional<Matrix>& alternative_center) {
  const int r_p = cfg.r_k - cfg.r_s;
  const int informative = cfg.scenario == Scenario::S1 ? cfg.K : cfg.K / 2;

  StudyFamily family;
  const Matrix u0s = haar_basis(cfg.p, cfg.r_s, rng);
  const Matrix u0p = haar_basis_in_complement(u0s, r_p, rng);
  {
    Matrix joint(cfg.p, cfg.r_k);
    joint.leftCols(cfg.r_s) = u0s;
    joint.rightCols(r_p) = u0p;
    family.target_truth = projector_from_basis(joint);
  }

  const Matrix sigma0 =
      build_covariance(u0s, u0p, cfg.lambda_s, cfg.lambda_p_target);
  family.covariances.push_back(estimate_covariance(cfg, sigma0, rng, 0));

  for (int k = 1; k <= cfg.K; ++k) {
    Matrix uks;
    if (k <= informative) {
      uks = perturbed_rotation(cfg.p, cfg.h, rng) * u0s;
    } else if (cfg.scenario == Scenario::S2) {
      uks = haar_basis(cfg.p, cfg.r_s, rng);
    } else {
      uks = perturbed_rotation(cfg.p, cfg.h, rng) * *alternative_center;
    }
    const Matrix ukp = haar_basis_in_complement(uks, r_p, rng);
    const Matrix sigma =
        build_covariance(uks, ukp, cfg.lambda_s, cfg.lambda_p_source);
    family.covariances.push_back(estimate_covariance(cfg, sigma, rng, k));
  }
  return family;
}

void validate_scenario(const ScenarioConfig& cfg) {
  if (cfg.p < 2 || cfg.K < 1 || cfg.n < 2 || cfg.replications < 1)
    throw DataError("scenario config: p, K, n, replications must be positive");
  if (cfg.r_s < 1 || cfg.r_s > cfg.r_k || cfg.r_k > cfg.p)
    throw DataError("scenario config: need 1 <= r_s <= r_k <= p");
  if (cfg.scenario != Scenario::S1 && cfg.K % 2 != 0)
    throw DataError("scenario config: S2 and S3 need an even K");
  if (cfg.distribution == Distribution::student_t && cfg.t_df <= 2.0 &&
      cfg.pca == PcaKind::classical)
    throw DataError(
        "scenario config: t with df <= 2 has no covariance; use elliptical PCA");
  if (cfg.iterations < 1) throw DataError("scenario config: iterations must be >= 1");
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& cfg, int threads) {
  validate_scenario(cfg);
  const auto start = std::chrono::steady_clock::now();

  const Rng master(cfg.seed);
  std::optional<Matrix> alternative_center;
  if (cfg.scenario == Scenario::S3) {
    Rng experiment_stream = master.child(0);
    alternative_center = haar_basis(cfg.p, cfg.r_s, experiment_stream);
  }

  ScenarioReport report;
  report.config = cfg;
  report.methods = {"blind_gb", "blind_pca", "selected_gb", "individual_pca"};
  report.values.assign(report.methods.size(),
                       std::vector<double>(cfg.replications, kNaN));
  report.alternative_center = alternative_center;
  std::vector<std::string> failure_messages(cfg.replications);

  parallel_for(cfg.replications, threads, [&](int rep) {
    try {
      Rng rng = master.child(static_cast<std::uint64_t>(rep) + 1);
      const StudyFamily family = generate_family(cfg, rng, alternative_center);

      std::vector<StudySummary> summaries;
      summaries.reserve(family.covariances.size());
      for (std::size_t k = 0; k < family.covariances.size(); ++k)
        summaries.push_back(individual_pca(family.covariances[k], cfg.r_k,
                                           std::to_string(k)));

      const auto scaled_distance = [&](const Projector& estimate) {
        return subspace_distance(estimate, family.target_truth).scaled;
      };

      TransferConfig blind;
      blind.r_s = cfg.r_s;
      blind.r_0 = cfg.r_k;
      blind.weighting = cfg.weighting;
      const TransferResult blind_gb =
          oracle_transfer(summaries, family.covariances[0], blind);
      report.values[0][rep] = scaled_distance(blind_gb.combined);

      {  // blind PCA: pooled covariance-like matrices, raw sample sizes
        Matrix pooled = Matrix::Zero(cfg.p, cfg.p);
        double total = 0.0;
        for (const auto& cov : family.covariances) {
          pooled += static_cast<double>(cov.n) * cov.matrix;
          total += static_cast<double>(cov.n);
        }
        pooled /= total;
        const Projector estimate =
            projector_from_basis(top_r_eig(pooled, cfg.r_k).vectors);
        report.values[1][rep] = scaled_distance(estimate);
      }

      TransferConfig selected = blind;
      selected.tau = cfg.tau;
      selected.variant = cfg.variant;
      selected.max_iter = cfg.iterations;
      const std::vector<StudySummary> sources(summaries.begin() + 1,
                                              summaries.end());
      const TransferResult selected_gb = non_oracle_transfer(
          summaries[0], family.covariances[0], sources, selected);
      report.values[2][rep] = scaled_distance(selected_gb.combined);

      report.values[3][rep] = scaled_distance(summaries[0].projector);
    } catch (const std::exception& err) {
      failure_messages[rep] = err.what();
    }
  });

  for (int rep = 0; rep < cfg.replications; ++rep)
    if (!failure_messages[rep].empty())
      report.failures.emplace_back(rep, failure_messages[rep]);
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const std::vector<double> ok = finite_values(report.values[m]);
    MethodSummary summary;
    summary.method = report.methods[m];
    summary.mean = ok.empty() ? kNaN : mean_of(ok);
    summary.se = ok.empty() ? kNaN : standard_error_of(ok);
    report.summaries.push_back(summary);
  }
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---- statistical rate experiments -------------------------------------------

RateConfig RateConfig::preset(RateTerm term) {
  RateConfig cfg;
  cfg.term = term;
  const auto curve = [](std::string label) {
    RateCurve c;
    c.label = std::move(label);
    return c;
  };
  switch (term) {
    case RateTerm::private_term:
      for (double lam_s : {5.0, 6.0, 7.0}) {
        RateCurve c = curve("lambda_s=" + std::to_string(static_cast<int>(lam_s)));
        for (double lam_p : {2.0, 4.0, 6.0, 8.0, 10.0})
          c.points.push_back({lam_p - 1.0, 50, 20, 100, 0.0, lam_s, lam_p});
        cfg.curves.push_back(std::move(c));
      }
      break;
    case RateTerm::variance_n:
      for (int p : {30, 40, 50}) {
        RateCurve c = curve("p=" + std::to_string(p));
        for (int n : {50, 80, 110, 140, 170})
          c.points.push_back({static_cast<double>(n), p, 5, n, 0.0, 4.0, 100.0});
        cfg.curves.push_back(std::move(c));
      }
      break;
    case RateTerm::variance_K:
      for (int p : {35, 40, 45}) {
        RateCurve c = curve("p=" + std::to_string(p));
        for (int K : {5, 7, 9, 11, 13})
          c.points.push_back({static_cast<double>(K), p, K, 150, 0.0, 2.0, 50.0});
        cfg.curves.push_back(std::move(c));
      }
      break;
    case RateTerm::bias:
      for (auto [p, K] : {std::pair{15, 10}, {25, 20}, {35, 30}}) {
        RateCurve c = curve("p=" + std::to_string(p) + ",K=" + std::to_string(K));
        for (int n : {35, 40, 45, 50})
          c.points.push_back({static_cast<double>(n), p, K, n, 0.0, 2.0, 1000.0});
        cfg.curves.push_back(std::move(c));
      }
      break;
    case RateTerm::deviation:
      for (auto [p, n] : {std::pair{15, 150}, {20, 200}, {25, 250}}) {
        RateCurve c = curve("p=" + std::to_string(p) + ",n=" + std::to_string(n));
        for (double h : {0.1, 0.12, 0.14, 0.16, 0.18, 0.2})
          c.points.push_back({h, p, 10, n, h, 50.0, 100.0});
        cfg.curves.push_back(std::move(c));
      }
      break;
  }
  return cfg;
}

RateReport run_rate_experiment(const RateConfig& cfg, int threads) {
  if (cfg.curves.empty()) throw DataError("rate config: no curves");
  if (cfg.replications < 1) throw DataError("rate config: replications must be >= 1");
  if (cfg.r_s < 1 || cfg.r_s > cfg.r_k)
    throw DataError("rate config: need 1 <= r_s <= r_k");
  const auto start = std::chrono::steady_clock::now();

  struct Task {
    std::size_t curve;
    std::size_t point;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cfg.curves.size(); ++c)
    for (std::size_t pt = 0; pt < cfg.curves[c].points.size(); ++pt)
      for (int rep = 0; rep < cfg.replications; ++rep) tasks.push_back({c, pt, rep});

  RateReport report;
  report.config = cfg;
  report.values.resize(cfg.curves.size());
  for (std::size_t c = 0; c < cfg.curves.size(); ++c)
    report.values[c].assign(cfg.curves[c].points.size(),
                            std::vector<double>(cfg.replications, kNaN));

  const Rng master(cfg.seed);
  parallel_for(static_cast<int>(tasks.size()), threads, [&](int task_index) {
    const Task& task = tasks[task_index];
    const RatePoint& point = cfg.curves[task.curve].points[task.point];
    Rng rng = master.child(static_cast<std::uint64_t>(task_index) + 1);

    const int r_p = cfg.r_k - cfg.r_s;
    const Matrix u0s = haar_basis(point.p, cfg.r_s, rng);

    std::vector<StudySummary> summaries;
    CovarianceEstimate target_cov;
    Projector truth;
    for (int k = 0; k <= point.K; ++k) {
      Matrix uks = u0s;
      if (k > 0 && point.h > 0.0)
        uks = perturbed_rotation(point.p, point.h, rng) * u0s;
      const Matrix ukp = haar_basis_in_complement(uks, r_p, rng);
      const Matrix sigma =
          build_covariance(uks, ukp, point.lambda_s, point.lambda_p);
      const Dataset data =
          sample_dataset(sigma, point.n, Distribution::gaussian, 3.0, rng);
      const CovarianceEstimate cov = sample_covariance(data, false);
      summaries.push_back(individual_pca(cov, cfg.r_k, std::to_string(k)));
      if (k == 0) {
        target_cov = cov;
        Matrix joint(point.p, cfg.r_k);
        joint.leftCols(cfg.r_s) = u0s;
        joint.rightCols(r_p) = ukp;
        truth = projector_from_basis(joint);
      }
    }

    TransferConfig oracle;
    oracle.r_s = cfg.r_s;
    oracle.r_0 = cfg.r_k;
    oracle.weighting = cfg.weighting;
    const TransferResult transferred =
        oracle_transfer(summaries, target_cov, oracle);
    const double error = frobenius_distance(transferred.combined, truth);

    if (cfg.term == RateTerm::private_term) {
      const double individual_error =
          frobenius_distance(summaries[0].projector, truth);
      const double denom = individual_error - error;
      report.values[task.curve][task.point][task.rep] =
          denom < 1e-6 ? kNaN : error / denom;
    } else {
      report.values[task.curve][task.point][task.rep] = error;
    }
  });

  report.means.resize(cfg.curves.size());
  for (std::size_t c = 0; c < cfg.curves.size(); ++c) {
    std::vector<double> xs, ys;
    for (std::size_t pt = 0; pt < cfg.curves[c].points.size(); ++pt) {
      const std::vector<double> ok = finite_values(report.values[c][pt]);
      report.dropped_replications +=
          static_cast<long>(report.values[c][pt].size() - ok.size());
      const double mean = ok.empty() ? kNaN : mean_of(ok);
      report.means[c].push_back(mean);
      if (std::isfinite(mean)) {
        xs.push_back(cfg.curves[c].points[pt].x);
        ys.push_back(mean);
      }
    }
    report.curve_slopes.push_back(ols_loglog_slope(xs, ys));
  }
  report.slope = mean_of(report.curve_slopes);
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---- bilinear-form normality experiment -------------------------------------

NormalityConfig NormalityConfig::gaussian_preset() { return {}; }

NormalityReport run_normality_experiment(const NormalityConfig& cfg, int threads) {
  if (cfg.p < 3 || cfg.r_0 < 1 || cfg.r_s < 1 || cfg.r_s >= cfg.r_0 ||
      cfg.r_0 >= cfg.p)
    throw DataError("normality config: need 1 <= r_s < r_0 < p");
  if (cfg.replications < 2)
    throw DataError("normality config: need at least two replications");
  if (!(cfg.lambda_p > cfg.lambda_s) || !(cfg.lambda_s > 1.0))
    throw DataError("normality config: need lambda_p > lambda_s > 1");
  const auto start = std::chrono::steady_clock::now();

  const Rng master(cfg.seed);
  Rng experiment_stream = master.child(0);

  const int r_p = cfg.r_0 - cfg.r_s;
  const Matrix u0s = haar_basis(cfg.p, cfg.r_s, experiment_stream);
  const Matrix u0p = haar_basis_in_complement(u0s, r_p, experiment_stream);
  const Matrix sigma0 = build_covariance(u0s, u0p, cfg.lambda_s, cfg.lambda_p);

  Matrix signal(cfg.p, cfg.r_0);
  signal.leftCols(cfg.r_s) = u0s;
  signal.rightCols(r_p) = u0p;
  const Matrix tail = haar_basis_in_complement(signal, cfg.p - cfg.r_0,
                                               experiment_stream);
  const Projector truth = projector_from_basis(signal);
  const Matrix shared_matrix = u0s * u0s.transpose();

  NormalityReport report;
  report.config = cfg;
  if (!report.config.u) report.config.u = experiment_stream.unit_vector(cfg.p);
  if (!report.config.v) report.config.v = experiment_stream.unit_vector(cfg.p);
  const Vector& u = *report.config.u;
  const Vector& v = *report.config.v;

  BilinearSpec spec_p;
  spec_p.u = u;
  spec_p.v = v;
  spec_p.nu4 = cfg.nu4;
  for (int i = 0; i < r_p; ++i)
    spec_p.private_pairs.emplace_back(cfg.lambda_p, u0p.col(i));
  for (int j = 0; j < cfg.p - cfg.r_0; ++j)
    spec_p.tail_pairs.emplace_back(1.0, tail.col(j));
  report.sigma_p = std::sqrt(bilinear_variance(spec_p));

  BilinearSpec spec_0 = spec_p;
  spec_0.private_pairs.clear();
  for (int i = 0; i < r_p; ++i)
    spec_0.private_pairs.emplace_back(cfg.lambda_p, u0p.col(i));
  for (int i = 0; i < cfg.r_s; ++i)
    spec_0.private_pairs.emplace_back(cfg.lambda_s, u0s.col(i));
  report.sigma_0 = std::sqrt(bilinear_variance(spec_0));

  if (!(report.sigma_p > 1e-12) || !(report.sigma_0 > 1e-12))
    throw NumericalError(
        "normality experiment: sigma vanishes for the chosen u, v");

  report.z_hat.assign(cfg.replications, kNaN);
  report.z_tilde.assign(cfg.replications, kNaN);
  const double scale = std::sqrt(static_cast<double>(cfg.n0));

  parallel_for(cfg.replications, threads, [&](int rep) {
    Rng rng = master.child(static_cast<std::uint64_t>(rep) + 1);
    const Dataset data =
        sample_dataset(sigma0, cfg.n0, cfg.distribution, cfg.t_df, rng);
    const CovarianceEstimate cov = sample_covariance(data, false);

    const Matrix perturbed =
        shared_matrix + cfg.perturbation * goe_matrix(cfg.p, rng);
    const Projector shared_hat =
        projector_from_basis(top_r_eig(perturbed, cfg.r_s).vectors);
    const Projector private_hat = fine_tune(shared_hat, cov, r_p);
    const Matrix transfer_matrix = shared_hat.matrix + private_hat.matrix;
    report.z_hat[rep] =
        scale * u.dot((transfer_matrix - truth.matrix) * v) / report.sigma_p;

    const Projector individual =
        projector_from_basis(top_r_eig(cov.matrix, cfg.r_0).vectors);
    report.z_tilde[rep] =
        scale * u.dot((individual.matrix - truth.matrix) * v) / report.sigma_0;
  });

  report.ks_hat = ks_statistic_standard_normal(report.z_hat);
  report.ks_tilde = ks_statistic_standard_normal(report.z_tilde);
  const double n = static_cast<double>(cfg.replications);
  const auto variance = [n](const std::vector<double>& z) {
    const double mean = mean_of(z);
    double ss = 0.0;
    for (double value : z) ss += (value - mean) * (value - mean);
    return ss / (n - 1.0);
  };
  report.var_hat = variance(report.z_hat);
  report.var_tilde = variance(report.z_tilde);
  report.wall_seconds = seconds_since(start);
  return report;
}

}  // namespace pcat
