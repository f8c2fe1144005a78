#include "pcat/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <vector>

#include "pcat/parallel.hpp"
#include "pcat/rng.hpp"

namespace pcat {

void validate_covariance(const CovarianceEstimate& cov) {
  require_symmetric(cov.matrix, "covariance");
  const Vector eig = sym_eigenvalues(cov.matrix);
  if (eig[eig.size() - 1] < -1e-8)
    throw DataError("covariance: matrix is not positive semidefinite (min eigenvalue " +
                    std::to_string(eig[eig.size() - 1]) + ")");
  if (cov.kind == CovarianceKind::kendall_tau &&
      std::abs(cov.matrix.trace() - 1.0) > 1e-8)
    throw DataError("covariance: Kendall's tau matrix must have unit trace");
}

CovarianceEstimate sample_covariance(const Dataset& data, bool center) {
  const long n = data.n();
  if (n < 1) throw DataError("sample_covariance: empty dataset");
  if (center && n < 2)
    throw DataError("sample_covariance: centering needs at least two rows");
  if (!data.rows.allFinite())
    throw DataError("sample_covariance: dataset contains non-finite entries");

  CovarianceEstimate cov;
  cov.n = n;
  cov.kind = CovarianceKind::classical;
  cov.centered = center;
  if (center) {
    const Matrix centered = data.rows.rowwise() - data.rows.colwise().mean();
    cov.matrix = centered.transpose() * centered / static_cast<double>(n);
  } else {
    cov.matrix = data.rows.transpose() * data.rows / static_cast<double>(n);
  }
  return cov;
}

namespace {

// Lexicographic pair order: index t in [0, n(n-1)/2) maps to (i, j), i < j,
// enumerated as (0,1), (0,2), ..., (0,n-1), (1,2), ...
std::pair<long, long> pair_from_index(std::uint64_t t, long n) {
  long i = 0;
  std::uint64_t remaining = static_cast<std::uint64_t>(n) - 1;
  while (t >= remaining) {
    t -= remaining;
    ++i;
    --remaining;
  }
  return {i, i + 1 + static_cast<long>(t)};
}

}  // namespace

KendallTau kendall_tau(const Dataset& data, std::uint64_t max_pairs,
                       std::uint64_t seed, int threads) {
  const long n = data.n();
  const int p = data.p();
  if (n < 2) throw DataError("kendall_tau: need at least two observations");
  if (!data.rows.allFinite())
    throw DataError("kendall_tau: dataset contains non-finite entries");

  const std::uint64_t total =
      static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;

  std::vector<std::uint64_t> selected;
  if (max_pairs > 0 && max_pairs < total) {
    // Floyd's sampling without replacement, then sorted so the evaluation
    // order matches the exhaustive lexicographic loop.
    Rng rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(max_pairs * 2);
    for (std::uint64_t j = total - max_pairs; j < total; ++j) {
      const std::uint64_t t = rng.uniform_index(j + 1);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    selected.assign(chosen.begin(), chosen.end());
    std::sort(selected.begin(), selected.end());
  }
  const std::uint64_t count = selected.empty() ? total : selected.size();

  // Fixed chunking keeps the reduction order independent of the thread count.
  const std::uint64_t chunk_size = 8192;
  const int chunks = static_cast<int>((count + chunk_size - 1) / chunk_size);
  std::vector<Matrix> partial(chunks, Matrix::Zero(p, p));
  std::vector<std::uint64_t> used(chunks, 0), degenerate(chunks, 0);

  parallel_for(chunks, threads, [&](int c) {
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * chunk_size;
    const std::uint64_t end = std::min(count, begin + chunk_size);
    Vector diff(p);
    for (std::uint64_t t = begin; t < end; ++t) {
      const std::uint64_t pair_index = selected.empty() ? t : selected[t];
      const auto [i, j] = pair_from_index(pair_index, n);
      diff = data.rows.row(i) - data.rows.row(j);
      const double norm2 = diff.squaredNorm();
      if (norm2 < 1e-24) {  // ||x_i - x_j|| < 1e-12
        ++degenerate[c];
        continue;
      }
      partial[c].selfadjointView<Eigen::Lower>().rankUpdate(diff, 1.0 / norm2);
      ++used[c];
    }
  });

  Matrix sum = Matrix::Zero(p, p);
  std::uint64_t pairs_used = 0, skipped = 0;
  for (int c = 0; c < chunks; ++c) {
    sum += partial[c];
    pairs_used += used[c];
    skipped += degenerate[c];
  }
  if (pairs_used == 0)
    throw NumericalError("kendall_tau: all pairs degenerate (constant dataset)");

  sum = Matrix(sum.selfadjointView<Eigen::Lower>());
  KendallTau out;
  out.estimate.matrix = sum / static_cast<double>(pairs_used);
  out.estimate.n = n;
  out.estimate.kind = CovarianceKind::kendall_tau;
  out.estimate.centered = false;
  out.pairs_used = pairs_used;
  out.degenerate_pairs = skipped;
  return out;
}

EffectiveSampleSize effective_sample_size(const Vector& eigenvalues, double n,
                                          int r, SizeMode mode) {
  const int p = static_cast<int>(eigenvalues.size());
  if (p < 1) throw DataError("effective_sample_size: empty spectrum");
  if (r < 1 || r >= p)
    throw DataError("effective_sample_size: r must satisfy 1 <= r < p");
  if (!(n > 0)) throw DataError("effective_sample_size: n must be positive");
  if (mode == SizeMode::elliptical && p < 2)
    throw DataError("effective_sample_size: elliptical mode needs p >= 2");
  for (int i = 0; i + 1 < p; ++i)
    if (eigenvalues[i] < eigenvalues[i + 1] - 1e-10)
      throw DataError("effective_sample_size: eigenvalues must be non-increasing");
  if (!(eigenvalues[0] > 0))
    throw DataError("effective_sample_size: leading eigenvalue must be positive");

  EffectiveSampleSize out;
  out.gap = eigenvalues[r - 1] - eigenvalues[r];
  if (!(out.gap > 0))
    throw NumericalError("effective_sample_size: zero eigenvalue gap at r = " +
                         std::to_string(r));
  out.kappa = eigenvalues[0] / out.gap;
  out.effective_rank = eigenvalues.sum() / eigenvalues[0];
  const double base = out.kappa * out.kappa * r * out.effective_rank;
  out.n_eff = (mode == SizeMode::classical)
                  ? n / base
                  : n / (base * out.effective_rank * std::log(p));
  return out;
}

}  // namespace pcat
